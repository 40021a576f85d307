#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "avq/av_identity.hpp"
#include "avq/decompose.hpp"

// JSON report for one decomposition run. Key order is fixed, leaves are
// sorted by path, and floats print in shortest round-trip form, so the same
// inputs always render byte-identical text.

namespace avq {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct ReportMeta {
  std::string circuit;    // circuit name or builder tag
  int n_qubits = 0;
  std::string partition;  // "whole", "singles", or "(j:p)..." text
  double prune_tol = 0.0;
  double residual_tol = 0.0;
};

nlohmann::ordered_json tree_report(const ReportMeta& meta,
                                   const DecompositionResult& result,
                                   const std::optional<GeneralizedTerms>&
                                       rebase_terms = std::nullopt);

// dump(2) plus a trailing newline; the canonical byte form.
std::string render_report(const nlohmann::ordered_json& report);

// n-character binary label for a basis index, qubit 0 first.
std::string basis_label(std::uint64_t index, int n_qubits);

}  // namespace avq
