#include <doctest.h>

#include "avq/core.hpp"
#include "testutil.hpp"

using namespace avq;
using testutil::max_abs_diff;

TEST_SUITE_BEGIN("core");

TEST_CASE("basis states") {
  const StateVector zero = basis_state(2, Basis::Zero);
  CHECK(zero.dim() == 4);
  CHECK(zero.amplitude(0) == Complex(1.0, 0.0));
  CHECK(zero.amplitude(3) == Complex(0.0, 0.0));

  const StateVector plus = basis_state(3, Basis::Plus);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK(plus.amplitude(i).real() == doctest::Approx(1.0 / std::sqrt(8.0)));
    CHECK(plus.amplitude(i).imag() == 0.0);
  }
  CHECK_THROWS_AS(basis_state(0, Basis::Zero), InvalidParams);
}

TEST_CASE("tensor products put the first factor's qubits high") {
  Vector one(2);
  one << 0.0, 1.0;
  const StateVector q0 = basis_state(1, Basis::Zero);
  const StateVector q1 = StateVector(1, one);

  // |1> (x) |0> is index 2 = binary 10 with qubit 0 most significant.
  const StateVector s = tensor(q1, q0);
  CHECK(s.n_qubits() == 2);
  CHECK(s.amplitude(2) == Complex(1.0, 0.0));

  const StateVector t = tensor(q0, q1);
  CHECK(t.amplitude(1) == Complex(1.0, 0.0));
}

TEST_CASE("tensor of gates matches the blockwise definition") {
  Matrix x(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  z << 1, 0, 0, -1;
  const GateMatrix xz = tensor(GateMatrix(1, x), GateMatrix(1, z));
  Matrix want(4, 4);
  want << 0, 0, 1, 0,
          0, 0, 0, -1,
          1, 0, 0, 0,
          0, -1, 0, 0;
  CHECK(max_abs_diff(xz.entries(), want) == 0.0);
}

TEST_CASE("inner product conjugates its first argument") {
  Vector a(2), b(2);
  a << Complex(0.6, 0.0), Complex(0.0, 0.8);
  b << Complex(1.0, 0.0), Complex(0.0, 0.0);
  const StateVector sa(1, a), sb(1, b);
  CHECK(inner(sa, sb) == Complex(0.6, 0.0));
  CHECK(inner(sa, sa).real() == doctest::Approx(1.0));
  CHECK(inner(sa, sb) == std::conj(inner(sb, sa)));
  CHECK_THROWS_AS(inner(sa, basis_state(2, Basis::Zero)), DimensionMismatch);
}

TEST_CASE("apply, expectation, uncertainty on hand-checked values") {
  Matrix h(2, 2), x(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  x << 0, 1, 1, 0;
  const GateMatrix gh(1, h), gx(1, x);
  const StateVector zero = basis_state(1, Basis::Zero);
  const StateVector plus = basis_state(1, Basis::Plus);

  const Vector hz = apply(gh, zero);
  CHECK(hz(0).real() == doctest::Approx(s));
  CHECK(hz(1).real() == doctest::Approx(s));

  CHECK(expectation(gx, plus).real() == doctest::Approx(1.0));
  CHECK(std::abs(expectation(gx, zero)) == doctest::Approx(0.0));
  CHECK(uncertainty(gx, zero) == doctest::Approx(1.0));
  // An eigenstate has no spread.
  CHECK(uncertainty(gx, plus) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("uncertainty agrees with the second-moment formula for hermitian "
          "operators") {
  avq::sampling::Rng rng(77001);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + int(rng() % 3);
    const GateMatrix g = avq::sampling::random_hermitian(n, rng);
    const StateVector psi = avq::sampling::random_state(n, rng);
    const Complex mean = testutil::raw_mean(g.entries(), psi.amplitudes());
    const Complex second = testutil::raw_mean(
        Matrix(g.entries() * g.entries()), psi.amplitudes());
    const double by_moments =
        std::sqrt(std::max(0.0, second.real() - std::norm(mean)));
    CHECK(uncertainty(g, psi) == doctest::Approx(by_moments).epsilon(1e-10));
  }
}

TEST_CASE("uncertainty extends to non-normal operators as a vector norm") {
  avq::sampling::Rng rng(77002);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + int(rng() % 3);
    // An arbitrary (non-hermitian, non-unitary) operator.
    const Matrix b =
        avq::sampling::random_hermitian(n, rng).entries() +
        Complex(0, 1) * avq::sampling::random_hermitian(n, rng).entries();
    const GateMatrix gb(n, b, /*unitary=*/false);
    const StateVector psi = avq::sampling::random_state(n, rng);
    CHECK(uncertainty(gb, psi) ==
          doctest::Approx(testutil::raw_spread(b, psi.amplitudes()))
              .epsilon(1e-12));
  }
}

TEST_CASE("unitaries preserve the norm") {
  avq::sampling::Rng rng(77003);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + int(rng() % 4);
    const GateMatrix u = avq::sampling::random_unitary(n, rng);
    const StateVector psi = avq::sampling::random_state(n, rng);
    CHECK(apply(u, psi).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("weak value reduces to the expectation when pre equals post") {
  avq::sampling::Rng rng(77004);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + int(rng() % 3);
    const GateMatrix g = avq::sampling::random_unitary(n, rng);
    const StateVector psi = avq::sampling::random_state(n, rng);
    const Complex wv = weak_value(g, psi, psi);
    const Complex ev = expectation(g, psi);
    CHECK(std::abs(wv - ev) <= 1e-14);
  }
}

TEST_CASE("weak value on a hand-checked pair and the orthogonal failure") {
  Matrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  const GateMatrix gh(1, h);
  const StateVector zero = basis_state(1, Basis::Zero);
  const StateVector plus = basis_state(1, Basis::Plus);
  // <+|H|0> / <+|0> = 1 / (1/sqrt2) = sqrt2.
  CHECK(weak_value(gh, zero, plus).real() ==
        doctest::Approx(std::sqrt(2.0)));

  Vector one(2);
  one << 0.0, 1.0;
  const StateVector post(1, one);
  CHECK_THROWS_AS(weak_value(gh, zero, post) /* <1|0> = 0 */,
                  OrthogonalPostSelection);
}

TEST_CASE("constructors reject bad input") {
  Vector v(2);
  v << 1.0, 0.0;

  SUBCASE("wrong dimension") {
    CHECK_THROWS_AS(StateVector(2, v), DimensionMismatch);
    CHECK_THROWS_AS(GateMatrix(2, Matrix::Identity(2, 2)),
                    DimensionMismatch);
  }
  SUBCASE("non-finite entries") {
    Vector bad = v;
    bad(0) = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(StateVector(1, bad), NumericalError);
    Matrix mbad = Matrix::Identity(2, 2);
    mbad(0, 0) = Complex(0.0, INFINITY);
    CHECK_THROWS_AS(GateMatrix(1, mbad), NumericalError);
  }
  SUBCASE("normalization enforced") {
    Vector off(2);
    off << 0.7, 0.7;  // sums to 0.98
    CHECK_THROWS_AS(StateVector(1, off), NumericalError);
    CHECK_NOTHROW(StateVector::normalized(1, off));
    CHECK_THROWS_AS(StateVector::normalized(1, Vector::Zero(2)),
                    NumericalError);
  }
  SUBCASE("unitarity checked when promised") {
    Matrix notu(2, 2);
    notu << 1, 1, 0, 1;
    CHECK_THROWS_AS(GateMatrix(1, notu, true), NumericalError);
    CHECK_NOTHROW(GateMatrix(1, notu, false));
  }
  SUBCASE("dense-representation cap") {
    CHECK(max_qubits() == 12);
    CHECK_THROWS_AS(basis_state(13, Basis::Zero), InvalidParams);
    set_max_qubits(13);
    CHECK_NOTHROW(basis_state(13, Basis::Zero));
    set_max_qubits(12);
    CHECK_THROWS_AS(set_max_qubits(0), InvalidParams);
  }
  SUBCASE("amplitude bounds") {
    CHECK_THROWS_AS(basis_state(1, Basis::Zero).amplitude(2),
                    IndexOutOfRange);
  }
}

TEST_SUITE_END();
