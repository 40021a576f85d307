#include "avq/circuits.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace avq {

namespace {

const Complex kI(0.0, 1.0);

Matrix identity2() { return Matrix::Identity(2, 2); }

Matrix matrix_power(Matrix base, std::uint64_t p) {
  Matrix acc = Matrix::Identity(base.rows(), base.cols());
  while (p > 0) {
    if (p & 1u) acc = base * acc;
    base = base * base;
    p >>= 1u;
  }
  return acc;
}

void check_target(int n_qubits, int target, const char* what) {
  if (target < 0 || target >= n_qubits) {
    throw IndexOutOfRange(std::string(what) + ": target qubit " +
                          std::to_string(target) + " in a " +
                          std::to_string(n_qubits) + "-qubit register");
  }
}

// Sign-flip oracle: identity except for -1 on the given basis indices.
Matrix reflection_about(const std::set<std::uint64_t>& indices,
                        Eigen::Index dim) {
  Matrix m = Matrix::Identity(dim, dim);
  for (auto i : indices) m(Eigen::Index(i), Eigen::Index(i)) = -1.0;
  return m;
}

}  // namespace

Matrix gate2(GateName name) {
  Matrix m(2, 2);
  const double s = 1.0 / std::numbers::sqrt2;
  switch (name) {
    case GateName::I: m << 1, 0, 0, 1; break;
    case GateName::X: m << 0, 1, 1, 0; break;
    case GateName::Y: m << 0, -kI, kI, 0; break;
    case GateName::Z: m << 1, 0, 0, -1; break;
    case GateName::H: m << s, s, s, -s; break;
    case GateName::S: m << 1, 0, 0, kI; break;
    case GateName::T: m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4); break;
  }
  return m;
}

GateMatrix embed_single(const Matrix& block, int n_qubits, int target,
                        bool unitary) {
  check_target(n_qubits, target, "embed_single");
  if (block.rows() != 2 || block.cols() != 2) {
    throw DimensionMismatch("embed_single takes a 2x2 block");
  }
  const auto left = Eigen::Index(1) << target;
  const auto right = Eigen::Index(1) << (n_qubits - target - 1);
  const auto dim = Eigen::Index(1) << n_qubits;
  Matrix out = Matrix::Zero(dim, dim);
  // Index layout is (left part)(target bit)(right part), qubit 0 high.
  for (Eigen::Index l = 0; l < left; ++l) {
    for (int bi = 0; bi < 2; ++bi) {
      for (int bj = 0; bj < 2; ++bj) {
        if (block(bi, bj) == Complex(0.0, 0.0)) continue;
        const auto row_base = (l * 2 + bi) * right;
        const auto col_base = (l * 2 + bj) * right;
        for (Eigen::Index r = 0; r < right; ++r) {
          out(row_base + r, col_base + r) = block(bi, bj);
        }
      }
    }
  }
  return GateMatrix(n_qubits, std::move(out), unitary);
}

GateMatrix standard_gate(GateName name, int n_qubits, int target) {
  return embed_single(gate2(name), n_qubits, target);
}

GateMatrix controlled_not(int n_qubits, int control, int target) {
  check_target(n_qubits, control, "controlled_not");
  check_target(n_qubits, target, "controlled_not");
  if (control == target) {
    throw InvalidParams("controlled_not needs distinct control and target");
  }
  const auto dim = Eigen::Index(1) << n_qubits;
  const auto cbit = Eigen::Index(1) << (n_qubits - 1 - control);
  const auto tbit = Eigen::Index(1) << (n_qubits - 1 - target);
  Matrix m = Matrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    m((col & cbit) ? (col ^ tbit) : col, col) = 1.0;
  }
  return GateMatrix(n_qubits, std::move(m));
}

GateMatrix phase_shift(int n_qubits, int target, double radians) {
  if (!std::isfinite(radians)) {
    throw InvalidParams("phase_shift angle must be finite");
  }
  Matrix block(2, 2);
  block << 1.0, 0.0, 0.0, std::polar(1.0, radians);
  return embed_single(block, n_qubits, target);
}

GateMatrix phase_flip(int n_qubits, const std::set<std::uint64_t>& indices) {
  if (n_qubits < 1 || n_qubits > max_qubits()) {
    throw InvalidParams("phase_flip: bad qubit count");
  }
  const auto dim = Eigen::Index(1) << n_qubits;
  for (auto i : indices) {
    if (i >= std::uint64_t(dim)) {
      throw IndexOutOfRange("phase_flip index " + std::to_string(i) +
                            " outside dimension " + std::to_string(dim));
    }
  }
  return GateMatrix(n_qubits, reflection_about(indices, dim));
}

GateMatrix iqft(int n_qubits) {
  if (n_qubits < 1) throw InvalidParams("iqft needs at least 1 qubit");
  if (n_qubits > max_qubits()) {
    throw InvalidParams("iqft size exceeds the dense-representation cap");
  }
  const auto dim = Eigen::Index(1) << n_qubits;
  const double scale = 1.0 / std::sqrt(double(dim));
  Matrix m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      // Reduce j*k mod 2^n first; the angle stays small and accurate.
      const auto jk = (j * k) & (dim - 1);
      m(j, k) = scale * std::polar(1.0, -2.0 * std::numbers::pi *
                                            double(jk) / double(dim));
    }
  }
  return GateMatrix(n_qubits, std::move(m));
}

GateMatrix controlled_block(int n_qubits, int control,
                            const GateMatrix& block) {
  const int nb = block.n_qubits();
  if (nb >= n_qubits) {
    throw DimensionMismatch("controlled_block: block must be smaller than "
                            "the register");
  }
  if (control < 0 || control >= n_qubits - nb) {
    throw IndexOutOfRange(
        "controlled_block: control qubit must sit above the block");
  }
  const auto dim = Eigen::Index(1) << n_qubits;
  const auto bdim = Eigen::Index(1) << nb;
  const auto cbit = Eigen::Index(1) << (n_qubits - 1 - control);
  Matrix m = Matrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    if (col & cbit) {
      const auto upper = col - (col % bdim);
      const auto low = col % bdim;
      for (Eigen::Index r = 0; r < bdim; ++r) {
        const Complex e = block.entries()(r, low);
        if (e != Complex(0.0, 0.0)) m(upper + r, col) = e;
      }
    } else {
      m(col, col) = 1.0;
    }
  }
  return GateMatrix(n_qubits, std::move(m), block.is_unitary());
}

OracleSpec OracleSpec::deutsch(Kind k) {
  if (k == Kind::Marked) {
    throw InvalidParams("deutsch oracle kind cannot be 'marked'");
  }
  return OracleSpec{k, {}};
}

OracleSpec OracleSpec::grover(std::set<std::uint64_t> marked_set) {
  if (marked_set.empty()) {
    throw InvalidParams("grover oracle needs at least one marked state");
  }
  return OracleSpec{Kind::Marked, std::move(marked_set)};
}

GateMatrix deutsch_oracle(OracleSpec::Kind kind) {
  // Basis order |xy>: f acts as |x>|y> -> |x>|y xor f(x)>.
  int f0 = 0, f1 = 0;
  switch (kind) {
    case OracleSpec::Kind::Const0: f0 = 0; f1 = 0; break;
    case OracleSpec::Kind::Const1: f0 = 1; f1 = 1; break;
    case OracleSpec::Kind::IdentityBalanced: f0 = 0; f1 = 1; break;
    case OracleSpec::Kind::NotBalanced: f0 = 1; f1 = 0; break;
    case OracleSpec::Kind::Marked:
      throw InvalidParams("deutsch_oracle takes a two-valued function kind");
  }
  Matrix m = Matrix::Zero(4, 4);
  for (int x = 0; x < 2; ++x) {
    const int f = x ? f1 : f0;
    for (int y = 0; y < 2; ++y) {
      m(2 * x + (y ^ f), 2 * x + y) = 1.0;
    }
  }
  return GateMatrix(2, std::move(m));
}

GateSequence deutsch_sequence(OracleSpec::Kind kind) {
  const char* tag = nullptr;
  switch (kind) {
    case OracleSpec::Kind::Const0: tag = "const0"; break;
    case OracleSpec::Kind::Const1: tag = "const1"; break;
    case OracleSpec::Kind::IdentityBalanced: tag = "identity_balanced"; break;
    case OracleSpec::Kind::NotBalanced: tag = "not_balanced"; break;
    case OracleSpec::Kind::Marked:
      throw InvalidParams("deutsch_sequence takes a two-valued function kind");
  }
  const GateMatrix h1(1, gate2(GateName::H));
  std::vector<Gate> gates;
  gates.push_back(Gate{"X1", standard_gate(GateName::X, 2, 1)});
  gates.push_back(Gate{"H0H1", tensor(h1, h1)});
  gates.push_back(Gate{std::string("Uf[") + tag + "]", deutsch_oracle(kind)});
  gates.push_back(Gate{"H0", standard_gate(GateName::H, 2, 0)});
  return GateSequence(2, std::move(gates));
}

GroverPieces grover_pieces(int n_qubits, const OracleSpec& oracle) {
  if (oracle.kind != OracleSpec::Kind::Marked) {
    throw InvalidParams("grover_pieces needs a marked-state oracle");
  }
  if (n_qubits < 1 || n_qubits > max_qubits()) {
    throw InvalidParams("grover_pieces: bad qubit count");
  }
  const auto dim = Eigen::Index(1) << n_qubits;
  for (auto m : oracle.marked) {
    if (m >= std::uint64_t(dim)) {
      throw InvalidParams("marked state " + std::to_string(m) +
                          " outside a " + std::to_string(dim) +
                          "-dimensional register");
    }
  }

  GateMatrix sf = phase_flip(n_qubits, oracle.marked);
  GateMatrix s0 = phase_flip(n_qubits, {0});
  GateMatrix a = standard_gate(GateName::H, n_qubits, 0);
  {
    Matrix acc = a.entries();
    for (int t = 1; t < n_qubits; ++t) {
      acc = standard_gate(GateName::H, n_qubits, t).entries() * acc;
    }
    a = GateMatrix(n_qubits, std::move(acc));
  }
  GateMatrix g1(n_qubits, a.entries().adjoint() * sf.entries());
  GateMatrix g2(n_qubits, a.entries() * s0.entries());
  GateMatrix q(n_qubits, g2.entries() * g1.entries());
  return GroverPieces{std::move(sf), std::move(s0), std::move(a),
                      std::move(g1), std::move(g2), std::move(q)};
}

GateSequence grover_sequence(int n_qubits, const OracleSpec& oracle,
                             int iterations) {
  if (iterations < 0) throw InvalidParams("iterations must be non-negative");
  GroverPieces pieces = grover_pieces(n_qubits, oracle);
  std::vector<Gate> gates;
  gates.push_back(Gate{"A", pieces.preparation});
  for (int i = 0; i < iterations; ++i) {
    gates.push_back(Gate{"AdgSf", pieces.sub_first});
    gates.push_back(Gate{"AS0", pieces.sub_second});
  }
  return GateSequence(n_qubits, std::move(gates));
}

GateSequence qpe_sequence(const QpeSpec& spec) {
  const int n_count = spec.n_count;
  const int n_eigen = spec.unitary.n_qubits();
  if (n_count < 1) throw InvalidParams("qpe needs at least 1 counting qubit");
  if (spec.eigenstate.n_qubits() != n_eigen) {
    throw DimensionMismatch("qpe eigenstate width does not match the unitary");
  }
  if (!spec.unitary.is_unitary()) {
    throw InvalidParams("qpe needs a unitary operator");
  }
  if (spec.phase.has_value()) {
    const Vector uv = apply(spec.unitary, spec.eigenstate);
    const Vector want =
        std::polar(1.0, *spec.phase) * spec.eigenstate.amplitudes();
    if ((uv - want).cwiseAbs().maxCoeff() > 1e-10) {
      throw InvalidParams(
          "qpe eigenstate is not an eigenvector with the declared phase");
    }
  }
  const int n = n_count + n_eigen;

  std::vector<Gate> gates;
  {
    Matrix acc = standard_gate(GateName::H, n, 0).entries();
    for (int t = 1; t < n_count; ++t) {
      acc = standard_gate(GateName::H, n, t).entries() * acc;
    }
    gates.push_back(
        Gate{"Hx" + std::to_string(n_count), GateMatrix(n, std::move(acc))});
  }
  for (int c = 0; c < n_count; ++c) {
    const std::uint64_t power = std::uint64_t(1) << (n_count - 1 - c);
    GateMatrix upow(n_eigen, matrix_power(spec.unitary.entries(), power));
    gates.push_back(Gate{"C" + std::to_string(c) + "U^" +
                             std::to_string(power),
                         controlled_block(n, c, upow)});
  }
  gates.push_back(
      Gate{"IQFT", tensor(iqft(n_count),
                          GateMatrix(n_eigen, Matrix::Identity(
                                                  Eigen::Index(1) << n_eigen,
                                                  Eigen::Index(1) << n_eigen)))});
  return GateSequence(n, std::move(gates));
}

StateVector qpe_initial(const QpeSpec& spec) {
  return tensor(basis_state(spec.n_count, Basis::Zero), spec.eigenstate);
}

}  // namespace avq
