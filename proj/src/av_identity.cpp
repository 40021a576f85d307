#include "avq/av_identity.hpp"

#include <cmath>

namespace avq {

namespace {

void check_same_system(const GateMatrix& g, const StateVector& s,
                       const char* what) {
  if (g.dim() != s.dim()) {
    throw DimensionMismatch(std::string(what) + ": gate dimension " +
                            std::to_string(g.dim()) +
                            " vs state dimension " + std::to_string(s.dim()));
  }
}

}  // namespace

AVTerms av_decompose(const GateMatrix& a, const StateVector& psi,
                     const Tolerances& tol) {
  check_same_system(a, psi, "av_decompose");
  const Vector apsi = apply(a, psi);
  const Complex mean = psi.amplitudes().dot(apsi);
  const Vector residual = apsi - mean * psi.amplitudes();
  const double delta = residual.norm();

  AVTerms out{mean, delta, std::nullopt, psi};
  if (delta > tol.degenerate) {
    out.orthogonal_state = StateVector(psi.n_qubits(), residual / delta);
  }
  return out;
}

GateMatrix residual_projector(const StateVector& phi, const GateMatrix& k,
                              double q, const Tolerances& tol) {
  check_same_system(k, phi, "residual_projector");
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw InvalidParams("residual_projector scale q must be positive");
  }
  const Complex kmean = expectation(k, phi);
  if (std::abs(kmean - Complex(q, 0.0)) > tol.condition) {
    throw ConditionViolated(
        "residual_projector requires <K> = q in the new basis state; got <K> "
        "= (" +
        std::to_string(kmean.real()) + ", " + std::to_string(kmean.imag()) +
        ") with q = " + std::to_string(q));
  }
  const auto dim = phi.dim();
  Matrix m = Matrix::Identity(dim, dim) * q -
             (apply(k, phi)) * phi.amplitudes().adjoint();
  return GateMatrix(phi.n_qubits(), std::move(m), /*unitary=*/false);
}

GeneralizedTerms generalized_decompose(const GateMatrix& a,
                                       const StateVector& psi,
                                       const StateVector& phi,
                                       const GateMatrix& k, double q,
                                       const Tolerances& tol) {
  check_same_system(a, psi, "generalized_decompose");
  check_same_system(k, phi, "generalized_decompose");
  if (psi.dim() != phi.dim()) {
    throw DimensionMismatch("generalized_decompose: source and basis states "
                            "live on different systems");
  }
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw InvalidParams("generalized_decompose scale q must be positive");
  }

  const Complex kmean = expectation(k, phi);
  if (std::abs(kmean - Complex(q, 0.0)) > tol.condition) {
    throw ConditionViolated(
        "generalized_decompose requires <K>^phi = q; the gap is " +
        std::to_string(std::abs(kmean - Complex(q, 0.0))));
  }
  const Complex overlap = inner(phi, psi);
  if (std::abs(overlap) <= tol.overlap) {
    throw OrthogonalPostSelection(
        "generalized_decompose: new basis state is orthogonal to the source "
        "state");
  }

  const Vector apsi = apply(a, psi);
  const Complex phi_a_psi = phi.amplitudes().dot(apsi);
  const Vector kphi = apply(k, phi);

  // Residual of A|psi> after removing its K|phi> component, scaled by q.
  const Vector v = q * apsi - kphi * phi_a_psi;
  const double c = v.norm();

  // Mean and spread of the composite operator (qI - K|phi><phi|) A in |psi>.
  const Complex composite_mean = psi.amplitudes().dot(v);
  const double delta = (v - composite_mean * psi.amplitudes()).norm();

  GeneralizedTerms out{
      phi_a_psi / q,
      overlap / kmean,
      q,
      k,
      0.0,
      delta,
      c,
      phi,
      std::nullopt,
  };
  if (delta > tol.degenerate) {
    out.mu = std::sqrt(1.0 + std::norm(composite_mean) / (delta * delta)) / q;
  }
  if (c > tol.degenerate) {
    out.phi_perp = StateVector(psi.n_qubits(), v / c);
  }
  return out;
}

double normalization_constant_basis_form(const GateMatrix& a,
                                         const StateVector& psi,
                                         const std::vector<StateVector>& basis,
                                         std::size_t which_phi,
                                         const Tolerances& tol) {
  check_same_system(a, psi, "normalization_constant_basis_form");
  if (basis.empty()) throw BasisNotComplete("empty basis");
  if (which_phi >= basis.size()) {
    throw IndexOutOfRange("which_phi = " + std::to_string(which_phi) +
                          " with a basis of size " +
                          std::to_string(basis.size()));
  }
  const auto dim = psi.dim();
  Matrix resolution = Matrix::Zero(dim, dim);
  for (const auto& b : basis) {
    if (b.dim() != dim) {
      throw DimensionMismatch("basis state dimension " + std::to_string(b.dim()) +
                              " does not match " + std::to_string(dim));
    }
    resolution += b.amplitudes() * b.amplitudes().adjoint();
  }
  const double defect =
      (resolution - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > tol.unitarity) {
    throw BasisNotComplete("basis fails to resolve the identity by " +
                           std::to_string(defect));
  }

  // Each term <psi|phi_j><A^dag>_w <A>_w <phi_j|psi> collapses to
  // |<phi_j|A|psi>|^2 once the weak-value denominators cancel, which also
  // keeps states with <phi_j|psi> = 0 in play.
  const Vector apsi = apply(a, psi);
  double sum = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (j == which_phi) continue;
    sum += std::norm(basis[j].amplitudes().dot(apsi));
  }
  return std::sqrt(sum);
}

}  // namespace avq
