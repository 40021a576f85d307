#include "avq/report.hpp"

#include <cmath>

namespace avq {

namespace {

using nlohmann::ordered_json;

ordered_json complex_json(const Complex& c) {
  return ordered_json{{"re", c.real()}, {"im", c.imag()}};
}

// A leaf state is usually one of a handful of recognizable vectors; label it
// when it is a computational basis state times a phase, else dump amplitudes.
ordered_json state_json(const StateVector& s) {
  ordered_json out;
  Eigen::Index big = 0;
  s.amplitudes().cwiseAbs().maxCoeff(&big);
  if (std::abs(std::abs(s.amplitude(big)) - 1.0) <= 1e-10) {
    out["basis"] = basis_label(std::uint64_t(big), s.n_qubits());
    out["phase"] = complex_json(s.amplitude(big));
    return out;
  }
  ordered_json amps = ordered_json::array();
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    amps.push_back(complex_json(s.amplitude(i)));
  }
  out["amplitudes"] = std::move(amps);
  return out;
}

}  // namespace

std::string basis_label(std::uint64_t index, int n_qubits) {
  std::string label(std::size_t(n_qubits), '0');
  for (int q = 0; q < n_qubits; ++q) {
    if (index & (std::uint64_t(1) << (n_qubits - 1 - q))) label[q] = '1';
  }
  return label;
}

nlohmann::ordered_json tree_report(
    const ReportMeta& meta, const DecompositionResult& result,
    const std::optional<GeneralizedTerms>& rebase_terms) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = kToolVersion;
  j["circuit"] = meta.circuit;
  j["n_qubits"] = meta.n_qubits;
  j["partition"] = meta.partition;
  j["prune_tol"] = meta.prune_tol;
  j["residual_tol"] = meta.residual_tol;
  j["n_groups"] = result.n_groups;
  j["leaf_count"] = result.leaves.size();
  j["pruned_count"] = result.pruned_count;
  j["reconstruction_residual"] = result.reconstruction_residual;

  ordered_json leaves = ordered_json::array();
  for (const auto& leaf : result.leaves) {
    ordered_json l;
    l["path"] = leaf.path;
    l["amplitude"] = complex_json(leaf.amplitude);
    l["state"] = state_json(leaf.state);
    leaves.push_back(std::move(l));
  }
  j["leaves"] = std::move(leaves);

  ordered_json factors = ordered_json::array();
  for (const auto& f : result.factors) {
    ordered_json rec;
    rec["group"] = f.group_label;
    rec["branch"] = std::string(1, f.branch);
    rec["factor"] = complex_json(f.factor);
    rec["path"] = f.path;
    factors.push_back(std::move(rec));
  }
  j["factors"] = std::move(factors);

  if (!result.leaves.empty()) {
    const Vector basis = amplitudes_in_computational_basis(result);
    const int n = result.leaves.front().state.n_qubits();
    ordered_json amps = ordered_json::object();
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
      if (std::abs(basis(i)) >= 1e-15) {
        amps[basis_label(std::uint64_t(i), n)] = complex_json(basis(i));
      }
    }
    j["basis_amplitudes"] = std::move(amps);
  }

  if (rebase_terms.has_value()) {
    const auto& r = *rebase_terms;
    ordered_json rj;
    rj["weak_value_scaled"] = complex_json(r.weak_value_scaled);
    rj["kappa"] = complex_json(r.kappa);
    rj["q"] = r.q;
    rj["mu"] = r.mu;
    rj["delta"] = r.delta;
    rj["normalization"] = r.normalization;
    rj["phi_perp_present"] = r.phi_perp.has_value();
    j["rebase"] = std::move(rj);
  }
  return j;
}

std::string render_report(const nlohmann::ordered_json& report) {
  return report.dump(2) + "\n";
}

}  // namespace avq
