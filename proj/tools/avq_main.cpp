#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avq/av_identity.hpp"
#include "avq/circuits.hpp"
#include "avq/core.hpp"
#include "avq/decompose.hpp"
#include "avq/dsl.hpp"
#include "avq/report.hpp"
#include "avq/sampling.hpp"

// Exit codes: 0 success, 1 usage or bad parameters, 2 unreadable or
// unparseable input, 3 a numerical invariant failed.

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kParse = 2;
constexpr int kNumerical = 3;

struct CommonOpts {
  double tol = 1e-10;
  double prune_tol = 1e-12;
  std::string partition;  // overrides the file/builder partition when set
  std::string json_path;  // report destination; stdout when empty
  int threads = 1;
  std::uint64_t seed = 12345;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_json = true) {
  cmd->add_option("--tol", opts.tol,
                  "reconstruction residual ceiling (default 1e-10)");
  cmd->add_option("--prune-tol", opts.prune_tol,
                  "drop branches at or below this amplitude (default 1e-12)");
  cmd->add_option("--partition", opts.partition,
                  "whole, singles, or (start:span)(start:span)...");
  cmd->add_option("--threads", opts.threads,
                  "worker threads for tree expansion (default 1)");
  cmd->add_option("--seed", opts.seed, "seed for randomized commands");
  if (with_json) {
    cmd->add_option("--json", opts.json_path,
                    "write the report here instead of stdout");
  }
}

std::string partition_text(const avq::SubSequencePartition& part,
                           std::size_t n_gates) {
  if (part.groups.size() == 1 && n_gates > 0 &&
      part.groups[0].span + 1 == int(n_gates)) {
    return "whole";
  }
  bool singles = part.groups.size() == n_gates;
  for (const auto& g : part.groups) singles = singles && g.span == 0;
  if (singles) return "singles";
  std::string out;
  for (const auto& g : part.groups) {
    out += "(" + std::to_string(g.start) + ":" + std::to_string(g.span) + ")";
  }
  return out;
}

// Applies a --partition override, if any. Returns false (and sets the exit
// code) when the override text is malformed or does not tile the sequence.
bool resolve_partition(const CommonOpts& opts, const avq::GateSequence& seq,
                       avq::SubSequencePartition& part, int& exit_code) {
  if (opts.partition.empty()) return true;
  std::string err;
  auto dir = avq::dsl::parse_partition_text(opts.partition, err);
  if (!dir.has_value()) {
    std::cerr << "bad --partition: " << err << "\n";
    exit_code = kUsage;
    return false;
  }
  try {
    switch (dir->mode) {
      case avq::dsl::PartitionDirective::Mode::Whole:
        part = avq::make_partition(seq, avq::PartitionMode::Whole);
        break;
      case avq::dsl::PartitionDirective::Mode::Singles:
        part = avq::make_partition(seq, avq::PartitionMode::Singles);
        break;
      case avq::dsl::PartitionDirective::Mode::Explicit:
        part = avq::make_partition(seq, dir->groups);
        break;
    }
  } catch (const avq::InvalidPartition& e) {
    std::cerr << "bad --partition: " << e.what() << "\n";
    exit_code = kUsage;
    return false;
  }
  return true;
}

int write_text(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << "cannot write " << path << "\n";
    return kParse;
  }
  f << text;
  return kOk;
}

struct LoadedCircuit {
  avq::dsl::CircuitDescription desc;
  avq::dsl::BuiltCircuit built;
  std::string display_name;
};

// Reads, parses, and builds a .qc file; on failure prints a diagnostic and
// sets the exit code.
std::optional<LoadedCircuit> load_circuit(const std::string& path,
                                          int& exit_code) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::cerr << path << ": cannot read file\n";
    exit_code = kParse;
    return std::nullopt;
  }
  std::stringstream buf;
  buf << f.rdbuf();

  avq::dsl::ParseError perr;
  auto desc = avq::dsl::parse(buf.str(), perr);
  if (!desc.has_value()) {
    std::cerr << path << ":" << perr.line << ":" << perr.column << ": "
              << perr.message;
    if (!perr.offending_token.empty()) {
      std::cerr << " ('" << perr.offending_token << "')";
    }
    std::cerr << "\n";
    exit_code = kParse;
    return std::nullopt;
  }

  const std::string dir = std::filesystem::path(path).parent_path().string();
  try {
    auto built = avq::dsl::build(*desc, dir.empty() ? "." : dir);
    std::string name = desc->name.empty()
                           ? std::filesystem::path(path).stem().string()
                           : desc->name;
    return LoadedCircuit{std::move(*desc), std::move(built), std::move(name)};
  } catch (const avq::dsl::BuildError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    exit_code = kParse;
  } catch (const avq::ConditionViolated& e) {
    std::cerr << path << ": " << e.what() << "\n";
    exit_code = kNumerical;
  } catch (const avq::NumericalError& e) {
    std::cerr << path << ": " << e.what() << "\n";
    exit_code = kNumerical;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << "\n";
    exit_code = kParse;
  }
  return std::nullopt;
}

// Rebase of the sequence's total product, plus how well the two-term form
// rebuilds the directly simulated final state.
struct RebaseOutcome {
  avq::GeneralizedTerms terms;
  double residual = 0.0;
};

std::optional<RebaseOutcome> run_rebase(const avq::dsl::BuiltCircuit& built,
                                        int& exit_code) {
  try {
    avq::GeneralizedTerms terms =
        avq::rebase(built.sequence, built.initial, built.rebase->phi,
                    built.rebase->gate, built.rebase->q);
    avq::Vector recon = terms.weak_value_scaled *
                        avq::apply(terms.basis_gate, terms.phi);
    if (terms.phi_perp.has_value()) {
      recon += avq::Complex(terms.normalization / terms.q, 0.0) *
               terms.phi_perp->amplitudes();
    }
    const avq::Vector direct =
        avq::simulate(built.sequence, built.initial);
    return RebaseOutcome{std::move(terms),
                         (recon - direct).cwiseAbs().maxCoeff()};
  } catch (const avq::OrthogonalPostSelection& e) {
    std::cerr << "rebase: " << e.what() << "\n";
  } catch (const avq::ConditionViolated& e) {
    std::cerr << "rebase: " << e.what() << "\n";
  } catch (const avq::NumericalError& e) {
    std::cerr << "rebase: " << e.what() << "\n";
  }
  exit_code = kNumerical;
  return std::nullopt;
}

int report_and_check(const std::string& circuit_name,
                     const avq::dsl::BuiltCircuit& built,
                     const CommonOpts& opts,
                     const avq::SubSequencePartition& part) {
  avq::DecompositionResult result;
  try {
    result = avq::decompose(built.sequence, part, built.initial,
                            opts.prune_tol, opts.threads);
  } catch (const std::exception& e) {
    std::cerr << "decompose: " << e.what() << "\n";
    return kNumerical;
  }

  std::optional<avq::GeneralizedTerms> rebase_terms;
  std::optional<double> rebase_residual;
  if (built.rebase.has_value()) {
    int code = kOk;
    auto outcome = run_rebase(built, code);
    if (!outcome.has_value()) return code;
    rebase_residual = outcome->residual;
    rebase_terms = std::move(outcome->terms);
  }

  avq::ReportMeta meta{circuit_name, built.sequence.n_qubits(),
                       partition_text(part, built.sequence.size()),
                       opts.prune_tol, opts.tol};
  auto j = avq::tree_report(meta, result, rebase_terms);
  if (rebase_residual.has_value()) {
    j["rebase"]["reconstruction_residual"] = *rebase_residual;
  }
  const int write_code = write_text(avq::render_report(j), opts.json_path);
  if (write_code != kOk) return write_code;

  if (result.reconstruction_residual > opts.tol) {
    std::cerr << "reconstruction residual " << result.reconstruction_residual
              << " exceeds tolerance " << opts.tol << "\n";
    return kNumerical;
  }
  if (rebase_residual.has_value() && *rebase_residual > opts.tol) {
    std::cerr << "rebase residual " << *rebase_residual
              << " exceeds tolerance " << opts.tol << "\n";
    return kNumerical;
  }
  return kOk;
}

int run_decompose(const std::string& path, const CommonOpts& opts) {
  int exit_code = kOk;
  auto loaded = load_circuit(path, exit_code);
  if (!loaded.has_value()) return exit_code;
  avq::SubSequencePartition part = loaded->built.partition;
  if (!resolve_partition(opts, loaded->built.sequence, part, exit_code)) {
    return exit_code;
  }
  return report_and_check(loaded->display_name, loaded->built, opts, part);
}

int run_verify(const std::string& path, const CommonOpts& opts) {
  int exit_code = kOk;
  auto loaded = load_circuit(path, exit_code);
  if (!loaded.has_value()) return exit_code;
  const auto& built = loaded->built;

  struct Row {
    std::string label;
    avq::SubSequencePartition part;
  };
  std::vector<Row> rows;
  if (!opts.partition.empty()) {
    avq::SubSequencePartition part = built.partition;
    if (!resolve_partition(opts, built.sequence, part, exit_code)) {
      return exit_code;
    }
    rows.push_back(Row{opts.partition, std::move(part)});
  } else {
    rows.push_back(
        Row{"whole", avq::make_partition(built.sequence,
                                         avq::PartitionMode::Whole)});
    rows.push_back(
        Row{"singles", avq::make_partition(built.sequence,
                                           avq::PartitionMode::Singles)});
    if (loaded->desc.partition.mode ==
        avq::dsl::PartitionDirective::Mode::Explicit) {
      rows.push_back(Row{"file", built.partition});
    }
  }

  bool all_ok = true;
  std::cout << "circuit " << loaded->display_name << " ("
            << built.sequence.n_qubits() << " qubits, "
            << built.sequence.size() << " gates)\n";
  std::cout << "partition    groups  leaves  pruned  residual      status\n";
  for (const auto& row : rows) {
    avq::DecompositionResult result;
    try {
      result = avq::decompose(built.sequence, row.part, built.initial,
                              opts.prune_tol, opts.threads);
    } catch (const std::exception& e) {
      std::cerr << "decompose (" << row.label << "): " << e.what() << "\n";
      return kNumerical;
    }
    const bool ok = result.reconstruction_residual <= opts.tol;
    all_ok = all_ok && ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %-7zu %-7zu %-7d %-13.3e %s\n",
                  row.label.c_str(), row.part.groups.size(),
                  result.leaves.size(), result.pruned_count,
                  result.reconstruction_residual, ok ? "ok" : "FAIL");
    std::cout << buf;
  }
  if (built.rebase.has_value()) {
    auto outcome = run_rebase(built, exit_code);
    if (!outcome.has_value()) return exit_code;
    const bool ok = outcome->residual <= opts.tol;
    all_ok = all_ok && ok;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %-7s %-7s %-7s %-13.3e %s\n",
                  "rebase", "-", "2", "-", outcome->residual,
                  ok ? "ok" : "FAIL");
    std::cout << buf;
  }
  return all_ok ? kOk : kNumerical;
}

// ---- builtin circuits ----------------------------------------------------

avq::dsl::CircuitDescription deutsch_description(const std::string& kind) {
  using avq::dsl::CircuitDescription;
  using avq::dsl::GateSpec;
  CircuitDescription d;
  d.name = "deutsch_" + kind;
  d.n_qubits = 2;
  d.init = CircuitDescription::Init::Zero;
  d.gates.push_back(GateSpec{"x", {1}, 0.0, "", {}});
  d.gates.push_back(GateSpec{"h", {0}, 0.0, "", {}});
  d.gates.push_back(GateSpec{"h", {1}, 0.0, "", {}});
  d.gates.push_back(GateSpec{"oracle", {}, 0.0, kind, {}});
  d.gates.push_back(GateSpec{"h", {0}, 0.0, "", {}});
  // Group the two Hadamards so the four tree groups match the four stages.
  d.partition.mode = avq::dsl::PartitionDirective::Mode::Explicit;
  d.partition.groups = {{0, 0}, {1, 1}, {3, 0}, {4, 0}};
  return d;
}

avq::dsl::CircuitDescription grover_description(
    int n, const std::vector<std::uint64_t>& marked, int iters) {
  using avq::dsl::CircuitDescription;
  using avq::dsl::GateSpec;
  CircuitDescription d;
  d.name = "grover_n" + std::to_string(n);
  d.n_qubits = n;
  d.init = CircuitDescription::Init::Zero;
  auto push_h_layer = [&] {
    for (int t = 0; t < n; ++t) {
      d.gates.push_back(GateSpec{"h", {t}, 0.0, "", {}});
    }
  };
  d.partition.mode = avq::dsl::PartitionDirective::Mode::Explicit;
  push_h_layer();  // state preparation
  d.partition.groups.push_back({0, n - 1});
  int cursor = n;
  for (int i = 0; i < iters; ++i) {
    // preparation^dag after the sign flip on marked states
    d.gates.push_back(GateSpec{"oracle", {}, 0.0, "marked", marked});
    push_h_layer();
    d.partition.groups.push_back({cursor, n});
    cursor += n + 1;
    // preparation after the sign flip on |0...0>
    d.gates.push_back(GateSpec{"oracle", {}, 0.0, "zero", {}});
    push_h_layer();
    d.partition.groups.push_back({cursor, n});
    cursor += n + 1;
  }
  return d;
}

avq::dsl::CircuitDescription qpe_description(int n_count, int phase_k) {
  using avq::dsl::CircuitDescription;
  using avq::dsl::GateSpec;
  const int n = n_count + 1;
  const double phi =
      2.0 * 3.141592653589793 * double(phase_k) / double(1 << n_count);
  CircuitDescription d;
  d.name = "qpe_c" + std::to_string(n_count) + "_k" + std::to_string(phase_k);
  d.n_qubits = n;
  d.init = CircuitDescription::Init::Explicit;
  // |0...0> on the counting register, |1> on the phase register.
  d.init_amplitudes.assign(std::size_t(1) << n, avq::Complex(0.0, 0.0));
  d.init_amplitudes[1] = avq::Complex(1.0, 0.0);
  d.partition.mode = avq::dsl::PartitionDirective::Mode::Explicit;
  for (int t = 0; t < n_count; ++t) {
    d.gates.push_back(GateSpec{"h", {t}, 0.0, "", {}});
  }
  d.partition.groups.push_back({0, n_count - 1});
  int cursor = n_count;
  for (int c = 0; c < n_count; ++c) {
    // Controlled phase by theta = 2^(n_count-1-c) * phi, via two
    // controlled-nots and three phase gates.
    const double theta = double(std::uint64_t(1) << (n_count - 1 - c)) * phi;
    d.gates.push_back(GateSpec{"cx", {c, n - 1}, 0.0, "", {}});
    d.gates.push_back(GateSpec{"phase", {n - 1}, -theta / 2.0, "", {}});
    d.gates.push_back(GateSpec{"cx", {c, n - 1}, 0.0, "", {}});
    d.gates.push_back(GateSpec{"phase", {n - 1}, theta / 2.0, "", {}});
    d.gates.push_back(GateSpec{"phase", {c}, theta / 2.0, "", {}});
    d.partition.groups.push_back({cursor, 4});
    cursor += 5;
  }
  d.gates.push_back(GateSpec{"iqft", {0, n_count - 1}, 0.0, "", {}});
  d.partition.groups.push_back({cursor, 0});
  return d;
}

// In memory the builtins run the builder sequences directly; --emit writes a
// gate-level DSL equivalent whose partition groups reproduce the builder's
// gates as group matrices.
int run_builtin(avq::GateSequence sequence, avq::StateVector initial,
                const avq::dsl::CircuitDescription& emit_desc,
                const std::string& emit_path, const CommonOpts& opts) {
  if (!emit_path.empty()) {
    return write_text(avq::dsl::serialize(emit_desc), emit_path);
  }
  avq::SubSequencePartition singles =
      avq::make_partition(sequence, avq::PartitionMode::Singles);
  avq::dsl::BuiltCircuit built{std::move(sequence), std::move(initial),
                               std::move(singles), std::nullopt};
  int exit_code = kOk;
  avq::SubSequencePartition part = built.partition;
  if (!resolve_partition(opts, built.sequence, part, exit_code)) {
    return exit_code;
  }
  return report_and_check("builtin:" + emit_desc.name, built, opts, part);
}

// ---- selftest --------------------------------------------------------------

int run_selftest(std::uint64_t seed, int cases) {
  namespace smp = avq::sampling;
  smp::Rng rng(seed);
  std::uniform_int_distribution<int> width(1, 4);
  bool all_ok = true;

  {
    double worst_residual = 0.0, worst_overlap = 0.0;
    for (int i = 0; i < cases; ++i) {
      const int n = width(rng);
      const avq::GateMatrix a = (i % 2 == 0)
                                    ? smp::random_unitary(n, rng)
                                    : smp::random_hermitian(n, rng);
      const avq::StateVector psi = smp::random_state(n, rng);
      const avq::AVTerms terms = avq::av_decompose(a, psi);
      avq::Vector recon = terms.expectation * psi.amplitudes();
      if (terms.orthogonal_state.has_value()) {
        recon += avq::Complex(terms.uncertainty, 0.0) *
                 terms.orthogonal_state->amplitudes();
        worst_overlap = std::max(
            worst_overlap,
            std::abs(avq::inner(psi, *terms.orthogonal_state)));
      }
      worst_residual = std::max(
          worst_residual,
          (recon - avq::apply(a, psi)).cwiseAbs().maxCoeff());
    }
    const bool ok = worst_residual <= 1e-10 && worst_overlap <= 1e-12;
    all_ok = all_ok && ok;
    std::cout << (ok ? "ok  " : "FAIL") << " single-operator split: residual "
              << worst_residual << ", orthogonality " << worst_overlap << " ("
              << cases << " cases)\n";
  }

  {
    const double qs[] = {0.5, 1.0, 2.0};
    double worst_rel = 0.0, worst_recon = 0.0;
    for (int i = 0; i < cases; ++i) {
      const int n = width(rng);
      const avq::GateMatrix a = smp::random_unitary(n, rng);
      const avq::StateVector psi = smp::random_state(n, rng);
      avq::StateVector phi = smp::random_state(n, rng);
      while (std::abs(avq::inner(phi, psi)) < 1e-3) {
        phi = smp::random_state(n, rng);
      }
      const double q = qs[i % 3];
      const avq::GateMatrix k = smp::random_scaled_diagonal(phi, q, rng);
      const avq::GeneralizedTerms terms =
          avq::generalized_decompose(a, psi, phi, k, q);
      if (terms.delta > 0.0 && terms.normalization > 0.0) {
        worst_rel = std::max(
            worst_rel, std::abs(terms.normalization -
                                terms.q * terms.mu * terms.delta) /
                           terms.normalization);
      }
      avq::Vector recon =
          terms.weak_value_scaled * avq::apply(k, phi);
      if (terms.phi_perp.has_value()) {
        recon += avq::Complex(terms.normalization / terms.q, 0.0) *
                 terms.phi_perp->amplitudes();
      }
      worst_recon = std::max(
          worst_recon,
          (recon - avq::apply(a, psi)).cwiseAbs().maxCoeff());
    }
    const bool ok = worst_rel <= 1e-8 && worst_recon <= 1e-10;
    all_ok = all_ok && ok;
    std::cout << (ok ? "ok  " : "FAIL")
              << " rebased split: scale identity rel err " << worst_rel
              << ", reconstruction " << worst_recon << " (" << cases
              << " cases)\n";
  }

  {
    std::uniform_int_distribution<int> small_width(1, 3);
    std::uniform_int_distribution<int> depth(1, 6);
    double worst_gap = 0.0;
    const int rounds = std::max(cases / 5, 10);
    for (int i = 0; i < rounds; ++i) {
      const int n = small_width(rng);
      const int m = depth(rng);
      const avq::GateSequence seq = smp::random_sequence(n, m, rng);
      const avq::StateVector initial = smp::random_state(n, rng);
      const avq::Vector direct = avq::simulate(seq, initial);
      for (const auto& part :
           {avq::make_partition(seq, avq::PartitionMode::Whole),
            avq::make_partition(seq, avq::PartitionMode::Singles),
            avq::make_partition(seq, smp::random_tiling(m, rng))}) {
        const auto result = avq::decompose(seq, part, initial, 0.0);
        const avq::Vector recon =
            avq::amplitudes_in_computational_basis(result);
        worst_gap = std::max(worst_gap,
                             (recon - direct).cwiseAbs().maxCoeff());
      }
    }
    const bool ok = worst_gap <= 1e-10;
    all_ok = all_ok && ok;
    std::cout << (ok ? "ok  " : "FAIL")
              << " partition invariance: max gap " << worst_gap << " ("
              << rounds << " circuits x 3 partitions)\n";
  }

  std::cout << (all_ok ? "selftest passed\n" : "selftest FAILED\n");
  return all_ok ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decomposes quantum circuits into expectation/uncertainty "
               "branch trees"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string circuit_path;

  auto* dec = app.add_subcommand(
      "decompose", "expand a .qc circuit into its branch tree report");
  dec->add_option("circuit", circuit_path, ".qc file")->required();
  add_common(dec, opts);

  auto* ver = app.add_subcommand(
      "verify", "check tree reconstruction against direct simulation");
  ver->add_option("circuit", circuit_path, ".qc file")->required();
  add_common(ver, opts, /*with_json=*/false);

  auto* bi = app.add_subcommand("builtin", "run a built-in circuit");
  bi->require_subcommand(1);
  std::string emit_path;

  auto* bd = bi->add_subcommand("deutsch", "two-qubit function interferometer");
  std::string oracle_kind = "const0";
  bd->add_option("--oracle", oracle_kind,
                 "const0, const1, identity_balanced, or not_balanced");
  bd->add_option("--emit", emit_path, "write the equivalent .qc instead");
  add_common(bd, opts);

  auto* bg = bi->add_subcommand("grover", "amplitude amplification");
  int grover_n = 3;
  int grover_iters = 1;
  std::vector<std::uint64_t> grover_marked;
  bg->add_option("--n", grover_n, "register width (default 3)");
  bg->add_option("--marked", grover_marked, "marked basis indices")
      ->required();
  bg->add_option("--iters", grover_iters, "iterations (default 1)");
  bg->add_option("--emit", emit_path, "write the equivalent .qc instead");
  add_common(bg, opts);

  auto* bq = bi->add_subcommand("qpe", "phase estimation on a phase gate");
  int qpe_count = 3;
  int qpe_k = 1;
  bq->add_option("--count", qpe_count, "counting qubits (default 3)");
  bq->add_option("--phase-k", qpe_k,
                 "phase numerator: the gate angle is 2 pi k / 2^count");
  bq->add_option("--emit", emit_path, "write the equivalent .qc instead");
  add_common(bq, opts);

  auto* st = app.add_subcommand("selftest", "run the randomized identities");
  int st_cases = 200;
  st->add_option("--cases", st_cases, "cases per suite (default 200)");
  st->add_option("--seed", opts.seed, "random seed (default 12345)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*dec) return run_decompose(circuit_path, opts);
    if (*ver) return run_verify(circuit_path, opts);
    if (*bd) {
      avq::OracleSpec::Kind kind;
      if (oracle_kind == "const0") {
        kind = avq::OracleSpec::Kind::Const0;
      } else if (oracle_kind == "const1") {
        kind = avq::OracleSpec::Kind::Const1;
      } else if (oracle_kind == "identity_balanced") {
        kind = avq::OracleSpec::Kind::IdentityBalanced;
      } else if (oracle_kind == "not_balanced") {
        kind = avq::OracleSpec::Kind::NotBalanced;
      } else {
        std::cerr << "unknown oracle kind '" << oracle_kind << "'\n";
        return kUsage;
      }
      return run_builtin(avq::deutsch_sequence(kind),
                         avq::basis_state(2, avq::Basis::Zero),
                         deutsch_description(oracle_kind), emit_path, opts);
    }
    if (*bg) {
      if (grover_n < 1 || grover_n > avq::max_qubits() || grover_iters < 0) {
        std::cerr << "grover needs 1 <= --n <= " << avq::max_qubits()
                  << " and --iters >= 0\n";
        return kUsage;
      }
      for (auto m : grover_marked) {
        if (m >= (std::uint64_t(1) << grover_n)) {
          std::cerr << "marked index " << m << " out of range\n";
          return kUsage;
        }
      }
      const avq::OracleSpec oracle = avq::OracleSpec::grover(
          {grover_marked.begin(), grover_marked.end()});
      return run_builtin(
          avq::grover_sequence(grover_n, oracle, grover_iters),
          avq::basis_state(grover_n, avq::Basis::Zero),
          grover_description(grover_n, grover_marked, grover_iters),
          emit_path, opts);
    }
    if (*bq) {
      if (qpe_count < 1 || qpe_count > avq::max_qubits() - 1 || qpe_k < 0 ||
          qpe_k >= (1 << qpe_count)) {
        std::cerr << "qpe needs 1 <= --count and 0 <= --phase-k < 2^count\n";
        return kUsage;
      }
      const double phi = 2.0 * 3.141592653589793 * double(qpe_k) /
                         double(1 << qpe_count);
      avq::Matrix u(2, 2);
      u << 1.0, 0.0, 0.0, std::polar(1.0, phi);
      avq::Vector one(2);
      one << 0.0, 1.0;
      const avq::QpeSpec spec{qpe_count, avq::GateMatrix(1, std::move(u)),
                              avq::StateVector(1, std::move(one)), phi};
      return run_builtin(avq::qpe_sequence(spec), avq::qpe_initial(spec),
                         qpe_description(qpe_count, qpe_k), emit_path, opts);
    }
    if (*st) return run_selftest(opts.seed, st_cases);
  } catch (const avq::InvalidParams& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const avq::dsl::BuildError& e) {
    std::cerr << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
