#pragma once

#include <optional>
#include <vector>

#include "avq/core.hpp"

// The two exact operator-on-state splits everything else leans on.
//
// The basic split writes A|psi> as a piece along |psi> plus a piece along a
// single normalized orthogonal state:
//
//     A|psi> = <A>|psi> + Delta |psi_perp>,
//
// with <A> the expectation in |psi> and Delta = ||(A - <A>)|psi>||. The
// rebased split does the same against an arbitrary new basis state |phi>
// carrying a gate K, scaled so the residual projector q*I - K|phi><phi|
// annihilates the K|phi> direction:
//
//     A|psi> = (<phi|A|psi>/q) K|phi> + (C/q) |phi_perp>,
//
// valid whenever <K>^phi = q and <phi|psi> != 0.

namespace avq {

// Result of the basic split. `orthogonal_state` is absent when |psi> is an
// eigenstate of A (uncertainty below the degenerate tolerance); the identity
// then collapses to A|psi> = <A>|psi>.
struct AVTerms {
  Complex expectation;
  double uncertainty = 0.0;
  std::optional<StateVector> orthogonal_state;
  StateVector source_state;
};

// Splits A|psi>. Phase convention: |psi_perp> = (A - <A>)|psi> / Delta as-is,
// no extra phase fixing, so results are reproducible bit-for-bit.
AVTerms av_decompose(const GateMatrix& a, const StateVector& psi,
                     const Tolerances& tol = {});

// q*I - K|phi><phi|, the operator that strips the K|phi> component off
// anything of the form A|psi>. Requires <K>^phi = q (throws
// ConditionViolated otherwise) and q > 0.
GateMatrix residual_projector(const StateVector& phi, const GateMatrix& k,
                              double q, const Tolerances& tol = {});

// Everything the rebased split produces. Scalars:
//   weak_value_scaled  <phi|A|psi> / q, the coefficient on K|phi>
//   kappa              <phi|psi> / <K>^phi, the overlap ratio
//   delta              uncertainty of (residual_projector * A) in |psi>
//   mu                 sqrt(1 + |<(qI - K|phi><phi|) A>^psi|^2 / delta^2) / q
//   normalization      C = ||(qI - K|phi><phi|) A |psi>||, equal to q*mu*delta
// `phi_perp` is absent when C vanishes (A|psi> already lies along K|phi>);
// mu is reported as 0 in that degenerate case.
struct GeneralizedTerms {
  Complex weak_value_scaled;
  Complex kappa;
  double q = 1.0;
  GateMatrix basis_gate;
  double mu = 0.0;
  double delta = 0.0;
  double normalization = 0.0;
  StateVector phi;
  std::optional<StateVector> phi_perp;
};

// The rebased split of A|psi> against |phi> with gate K and scale q.
// Preconditions checked: dimensions agree, q > 0, <K>^phi = q within
// tol.condition, <phi|psi> != 0 within tol.overlap.
GeneralizedTerms generalized_decompose(const GateMatrix& a,
                                       const StateVector& psi,
                                       const StateVector& phi,
                                       const GateMatrix& k, double q,
                                       const Tolerances& tol = {});

// C recomputed from a full orthonormal basis {phi_j} instead of the residual
// vector: for q = 1, K = I,
//
//     C^2 = sum_{j != which_phi} |<phi_j|A|psi>|^2,
//
// i.e. the summed weight A|psi> carries outside the chosen basis direction.
// The basis must resolve the identity within tol.unitarity (throws
// BasisNotComplete) and which_phi must index into it.
double normalization_constant_basis_form(const GateMatrix& a,
                                         const StateVector& psi,
                                         const std::vector<StateVector>& basis,
                                         std::size_t which_phi,
                                         const Tolerances& tol = {});

}  // namespace avq
