#pragma once

#include <random>
#include <set>

#include "avq/circuits.hpp"
#include "avq/core.hpp"
#include "avq/decompose.hpp"

// Seeded generators for states, operators, and whole circuits. Used by the
// CLI selftest and by tests to produce inputs; every draw is a pure function
// of the engine state, so a fixed seed replays the same stream.

namespace avq::sampling {

using Rng = std::mt19937_64;

inline Vector random_raw_vector(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    v(i) = Complex(gauss(rng), gauss(rng));
  }
  return v;
}

inline StateVector random_state(int n_qubits, Rng& rng) {
  return StateVector::normalized(
      n_qubits, random_raw_vector(Eigen::Index(1) << n_qubits, rng));
}

// Haar-ish unitary: QR of a complex Gaussian matrix with the R diagonal's
// phases pushed into Q.
inline GateMatrix random_unitary(int n_qubits, Rng& rng) {
  const auto dim = Eigen::Index(1) << n_qubits;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      g(r, c) = Complex(gauss(rng), gauss(rng));
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0, 0.0);
  }
  return GateMatrix(n_qubits, std::move(q));
}

inline GateMatrix random_hermitian(int n_qubits, Rng& rng) {
  const auto dim = Eigen::Index(1) << n_qubits;
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      g(r, c) = Complex(gauss(rng), gauss(rng));
    }
  }
  Matrix h = (g + g.adjoint()) / 2.0;
  return GateMatrix(n_qubits, std::move(h), /*unitary=*/false);
}

// Positive diagonal operator rescaled so its expectation in `phi` is exactly
// q (as computed in double arithmetic).
inline GateMatrix random_scaled_diagonal(const StateVector& phi, double q,
                                         Rng& rng) {
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  const auto dim = phi.dim();
  Vector d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = Complex(unif(rng), 0.0);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    mean += d(i).real() * std::norm(phi.amplitude(i));
  }
  Matrix m = Matrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) m(i, i) = d(i) * (q / mean);
  return GateMatrix(phi.n_qubits(), std::move(m), /*unitary=*/false);
}

// Circuit over named gates plus controlled-nots and phases; every gate is
// labeled, so decomposition reports stay readable in failures.
inline GateSequence random_sequence(int n_qubits, int n_gates, Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 7);
  std::uniform_int_distribution<int> qubit(0, n_qubits - 1);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::vector<Gate> gates;
  gates.reserve(std::size_t(n_gates));
  for (int i = 0; i < n_gates; ++i) {
    const int k = kind(rng);
    const int t = qubit(rng);
    switch (k) {
      case 0:
        gates.push_back(Gate{"h " + std::to_string(t),
                             standard_gate(GateName::H, n_qubits, t)});
        break;
      case 1:
        gates.push_back(Gate{"x " + std::to_string(t),
                             standard_gate(GateName::X, n_qubits, t)});
        break;
      case 2:
        gates.push_back(Gate{"z " + std::to_string(t),
                             standard_gate(GateName::Z, n_qubits, t)});
        break;
      case 3:
        gates.push_back(Gate{"s " + std::to_string(t),
                             standard_gate(GateName::S, n_qubits, t)});
        break;
      case 4:
        gates.push_back(Gate{"t " + std::to_string(t),
                             standard_gate(GateName::T, n_qubits, t)});
        break;
      case 5: {
        const double a = angle(rng);
        gates.push_back(Gate{"phase " + std::to_string(t),
                             phase_shift(n_qubits, t, a)});
        break;
      }
      case 6: {
        if (n_qubits < 2) {
          gates.push_back(Gate{"y " + std::to_string(t),
                               standard_gate(GateName::Y, n_qubits, t)});
          break;
        }
        int c = qubit(rng);
        while (c == t) c = qubit(rng);
        gates.push_back(Gate{"cx " + std::to_string(c) + " " +
                                 std::to_string(t),
                             controlled_not(n_qubits, c, t)});
        break;
      }
      default:
        gates.push_back(Gate{"u " + std::to_string(i),
                             random_unitary(n_qubits, rng)});
        break;
    }
  }
  return GateSequence(n_qubits, std::move(gates));
}

// Random tiling of [0, n_gates) into contiguous groups.
inline std::vector<Group> random_tiling(int n_gates, Rng& rng) {
  std::vector<Group> groups;
  std::uniform_int_distribution<int> span(0, 2);
  int start = 0;
  while (start < n_gates) {
    const int s = std::min(span(rng), n_gates - start - 1);
    groups.push_back(Group{start, s});
    start += s + 1;
  }
  return groups;
}

}  // namespace avq::sampling
