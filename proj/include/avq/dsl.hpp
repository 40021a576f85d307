#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avq/circuits.hpp"
#include "avq/core.hpp"
#include "avq/decompose.hpp"

// Line-oriented circuit description language. A file looks like:
//
//     # comments run to end of line
//     circuit bell
//     qubits 2
//     init zero
//     gate h 0
//     gate cx 0 1
//     partition singles
//
// Keywords and gate names are case-insensitive; serialization emits the
// canonical lowercase form with single spaces. Parsing never throws: bad
// input comes back as a ParseError with a 1-based line and column.

namespace avq::dsl {

// Gate line as written, before any matrices exist. `name` is canonical
// lowercase ("x", "cx", "phase", "iqft", "oracle", "umat").
struct GateSpec {
  std::string name;
  std::vector<int> targets;            // 1 for named gates, 2 for cx,
                                       // 2 for iqft (range ends)
  double angle = 0.0;                  // phase only
  std::string arg;                     // oracle kind or umat path
  std::vector<std::uint64_t> marked;   // oracle marked ...
  bool operator==(const GateSpec&) const = default;
};

struct PartitionDirective {
  enum class Mode { Whole, Singles, Explicit };
  Mode mode = Mode::Singles;
  std::vector<Group> groups;  // Explicit only
  bool operator==(const PartitionDirective&) const = default;
};

struct RebaseDirective {
  Basis basis = Basis::Zero;
  std::string gate_name = "i";   // "i" or "h", full-register
  std::optional<double> scale;   // q; resolved to <K>^phi when absent
  bool operator==(const RebaseDirective&) const = default;
};

struct CircuitDescription {
  std::string name;  // empty when the file has no circuit line
  int n_qubits = 0;
  enum class Init { Zero, Plus, Explicit };
  Init init = Init::Zero;
  std::vector<Complex> init_amplitudes;  // Explicit only
  std::vector<GateSpec> gates;
  PartitionDirective partition;  // defaults to singles
  std::optional<RebaseDirective> rebase;
  bool operator==(const CircuitDescription&) const = default;
};

struct ParseError {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
  std::string offending_token;  // may be empty (e.g. missing token)
};

// Total: any byte sequence yields either a description or an error, never an
// exception. On error the return value is empty and `error` is filled in.
std::optional<CircuitDescription> parse(std::string_view source,
                                        ParseError& error);

// Canonical text form; parse(serialize(d)) == d for any d that round-trips
// (i.e. any d that build() accepts structurally).
std::string serialize(const CircuitDescription& desc);

// Parses a partition given on the command line ("whole", "singles",
// "(0:1)(2:0)"); nullopt plus error message on bad syntax.
std::optional<PartitionDirective> parse_partition_text(std::string_view text,
                                                       std::string& error);

// A build-time problem that is structural rather than numerical: a umat file
// that cannot be read, a gate width mismatch, etc.
class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RebaseSettings {
  StateVector phi;
  GateMatrix gate;
  double q = 1.0;
};

struct BuiltCircuit {
  GateSequence sequence;
  StateVector initial;
  SubSequencePartition partition;
  std::optional<RebaseSettings> rebase;
};

// Turns a parsed description into matrices. `base_dir` anchors relative
// umat paths. Throws BuildError for structural problems and the usual
// numerical exceptions (NumericalError, ConditionViolated) for the rest.
BuiltCircuit build(const CircuitDescription& desc,
                   const std::string& base_dir = ".");

// Dense unitary from a text file: first line "dim <2^k>", then 2^k rows of
// 2^k whitespace-separated entries "re{+|-}im i". Throws BuildError on
// malformed content, NumericalError when the matrix is not unitary.
GateMatrix load_umat(const std::string& path,
                     double unitary_tol = Tolerances{}.unitarity);

// Writes the matching text form (shortest round-trip floats).
std::string serialize_umat(const GateMatrix& gate);

}  // namespace avq::dsl
