#include "avq/core.hpp"

#include <atomic>
#include <cmath>

namespace avq {

namespace {

std::atomic<int> g_max_qubits{12};

void check_qubit_count(int n) {
  if (n < 1) throw InvalidParams("qubit count must be at least 1");
  if (n > max_qubits()) {
    throw InvalidParams("qubit count " + std::to_string(n) +
                        " exceeds the dense-representation cap of " +
                        std::to_string(max_qubits()));
  }
}

void check_finite(const Vector& v) {
  if (!v.allFinite()) throw NumericalError("non-finite amplitude");
}

void check_finite(const Matrix& m) {
  if (!m.allFinite()) throw NumericalError("non-finite matrix entry");
}

}  // namespace

int max_qubits() { return g_max_qubits.load(); }

void set_max_qubits(int n) {
  if (n < 1) throw InvalidParams("max_qubits must be positive");
  g_max_qubits.store(n);
}

StateVector::StateVector(int n_qubits, Vector amplitudes, double norm_tol)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  check_qubit_count(n_qubits_);
  const auto want = Eigen::Index(1) << n_qubits_;
  if (amps_.size() != want) {
    throw DimensionMismatch("state over " + std::to_string(n_qubits_) +
                            " qubits needs " + std::to_string(want) +
                            " amplitudes, got " + std::to_string(amps_.size()));
  }
  check_finite(amps_);
  const double sumsq = amps_.squaredNorm();
  if (std::abs(sumsq - 1.0) > norm_tol) {
    throw NumericalError("state not normalized: sum of squared moduli is " +
                         std::to_string(sumsq));
  }
  // Passed the gate; now pin the norm exactly so repeated construction
  // (orthogonal chains build states from states) cannot drift.
  amps_ /= std::sqrt(sumsq);
}

StateVector StateVector::normalized(int n_qubits, const Vector& v) {
  check_qubit_count(n_qubits);
  check_finite(v);
  const double n = v.norm();
  if (n < 1e-300) throw NumericalError("cannot normalize a zero vector");
  return StateVector(n_qubits, v / n);
}

Complex StateVector::amplitude(Eigen::Index i) const {
  if (i < 0 || i >= amps_.size()) {
    throw IndexOutOfRange("amplitude index " + std::to_string(i) +
                          " out of range for dimension " +
                          std::to_string(amps_.size()));
  }
  return amps_(i);
}

GateMatrix::GateMatrix(int n_qubits, Matrix entries, bool unitary,
                       double unitary_tol)
    : n_qubits_(n_qubits), entries_(std::move(entries)), unitary_(unitary) {
  check_qubit_count(n_qubits_);
  const auto want = Eigen::Index(1) << n_qubits_;
  if (entries_.rows() != want || entries_.cols() != want) {
    throw DimensionMismatch("gate over " + std::to_string(n_qubits_) +
                            " qubits must be " + std::to_string(want) + "x" +
                            std::to_string(want));
  }
  check_finite(entries_);
  if (unitary_) {
    const double defect = (entries_ * entries_.adjoint() -
                           Matrix::Identity(want, want))
                              .cwiseAbs()
                              .maxCoeff();
    if (defect > unitary_tol) {
      throw NumericalError("matrix marked unitary fails U U^dag = I by " +
                           std::to_string(defect));
    }
  }
}

StateVector basis_state(int n_qubits, Basis label) {
  check_qubit_count(n_qubits);
  const auto dim = Eigen::Index(1) << n_qubits;
  Vector v(dim);
  if (label == Basis::Zero) {
    v.setZero();
    v(0) = 1.0;
  } else {
    v.setConstant(Complex(1.0 / std::sqrt(double(dim)), 0.0));
  }
  return StateVector(n_qubits, std::move(v));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  const int n = a.n_qubits() + b.n_qubits();
  check_qubit_count(n);
  Vector out(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  }
  return StateVector(n, std::move(out));
}

GateMatrix tensor(const GateMatrix& a, const GateMatrix& b) {
  const int n = a.n_qubits() + b.n_qubits();
  check_qubit_count(n);
  const auto da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index j = 0; j < da; ++j) {
      out.block(i * db, j * db, db, db) = a.entries()(i, j) * b.entries();
    }
  }
  return GateMatrix(n, std::move(out), a.is_unitary() && b.is_unitary());
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("inner product of states with dimensions " +
                            std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  }
  // Eigen's dot conjugates its left operand, which is exactly <a|b>.
  return a.amplitudes().dot(b.amplitudes());
}

Vector apply(const GateMatrix& g, const Vector& v) {
  if (g.dim() != v.size()) {
    throw DimensionMismatch("gate dimension " + std::to_string(g.dim()) +
                            " does not match vector dimension " +
                            std::to_string(v.size()));
  }
  return g.entries() * v;
}

Vector apply(const GateMatrix& g, const StateVector& s) {
  return apply(g, s.amplitudes());
}

Complex expectation(const GateMatrix& g, const StateVector& s) {
  return s.amplitudes().dot(apply(g, s));
}

double uncertainty(const GateMatrix& g, const StateVector& s) {
  const Vector gs = apply(g, s);
  const Complex mean = s.amplitudes().dot(gs);
  return (gs - mean * s.amplitudes()).norm();
}

Complex weak_value(const GateMatrix& g, const StateVector& pre,
                   const StateVector& post, double overlap_tol) {
  const Complex ov = inner(post, pre);
  if (std::abs(ov) <= overlap_tol) {
    throw OrthogonalPostSelection(
        "post-selection overlap has modulus " + std::to_string(std::abs(ov)) +
        ", too small for a weak value");
  }
  return post.amplitudes().dot(apply(g, pre)) / ov;
}

}  // namespace avq
