#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

// Core state/operator types and the handful of scalar quantities everything
// else is built from. Conventions used throughout the library:
//   * qubit 0 is the most significant bit of a basis index (big-endian),
//   * tensor products follow that order: tensor(a, b) puts a's qubits first,
//   * inner products are conjugate-linear in the first argument,
//   * states are unit vectors; operators are stored dense.

namespace avq {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

struct Tolerances {
  double normalization = 1e-10;  // |sum of squared moduli - 1|
  double unitarity = 1e-10;      // max-norm of U U^dag - I
  double orthogonality = 1e-12;  // residual overlaps that should vanish
  double overlap = 1e-12;        // below this, a required overlap counts as zero
  double degenerate = 1e-12;     // below this, an uncertainty counts as zero
  double condition = 1e-10;      // |<K>^phi - q| for the rebased identity
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexOutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class InvalidPartition : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite input, failed normalization/unitarity check, or a radicand that
// came out negative beyond roundoff.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Post-selection state is (numerically) orthogonal to the evolving state, so
// a weak value or rebase has no meaning.
class OrthogonalPostSelection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The rebase precondition <K>^phi = q failed.
class ConditionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BasisNotComplete : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense-representation cap: states/gates refuse to build above this many
// qubits. Default 12 (a 4096-dim vector); adjustable for tooling.
int max_qubits();
void set_max_qubits(int n);

// Unit vector over n qubits. Construction validates finiteness and
// normalization, then rescales exactly so downstream norms stay clean.
class StateVector {
 public:
  StateVector(int n_qubits, Vector amplitudes,
              double norm_tol = Tolerances{}.normalization);

  // Normalizes an arbitrary nonzero vector (throws NumericalError on ~zero).
  static StateVector normalized(int n_qubits, const Vector& v);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }
  Complex amplitude(Eigen::Index i) const;

 private:
  int n_qubits_;
  Vector amps_;
};

// Dense operator on n qubits. `unitary` is a promise checked at construction;
// non-unitary operators (projectors, rebased products) pass false.
class GateMatrix {
 public:
  GateMatrix(int n_qubits, Matrix entries, bool unitary = true,
             double unitary_tol = Tolerances{}.unitarity);

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  bool is_unitary() const { return unitary_; }

 private:
  int n_qubits_;
  Matrix entries_;
  bool unitary_;
};

enum class Basis { Zero, Plus };

// |00...0> or |++...+> on n qubits.
StateVector basis_state(int n_qubits, Basis label);

StateVector tensor(const StateVector& a, const StateVector& b);
GateMatrix tensor(const GateMatrix& a, const GateMatrix& b);

// <a|b>, conjugate-linear in a.
Complex inner(const StateVector& a, const StateVector& b);

// g|s> as a raw vector; generally unnormalized unless g is unitary.
Vector apply(const GateMatrix& g, const StateVector& s);
Vector apply(const GateMatrix& g, const Vector& v);

// <s|g|s>. Complex in general; real up to roundoff for Hermitian g.
Complex expectation(const GateMatrix& g, const StateVector& s);

// || (g - <g>) |s> ||. Agrees with sqrt(<g^2> - <g>^2) for Hermitian g and
// extends to arbitrary operators without a radicand that could go negative.
double uncertainty(const GateMatrix& g, const StateVector& s);

// <post|g|pre> / <post|pre>; throws OrthogonalPostSelection when the
// denominator is below overlap_tol in modulus.
Complex weak_value(const GateMatrix& g, const StateVector& pre,
                   const StateVector& post,
                   double overlap_tol = Tolerances{}.overlap);

}  // namespace avq
