#include <doctest.h>

#include <cmath>
#include <random>

#include "fapprox/families.hpp"
#include "fapprox/hilbert.hpp"

using namespace fapprox;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(d.size(), d.size());
  int i = 0;
  for (double x : d) m(i, i) = x, ++i;
  return m;
}

Vector unit(int n, int k) {
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("identity couple has unit scale") {
  auto sp = build_space_pair(diag({1, 1}), diag({1, 1}));
  CHECK(sp->scale_eigs()(0) == doctest::Approx(1.0));
  CHECK(sp->scale_eigs()(1) == doctest::Approx(1.0));
  CHECK(sp->c_h() == doctest::Approx(1.0));
}

TEST_CASE("diagonal couple") {
  auto sp = build_space_pair(diag({1, 1}), diag({1, 4}));
  CHECK(sp->scale_eigs().minCoeff() == doctest::Approx(1.0));
  CHECK(sp->scale_eigs().maxCoeff() == doctest::Approx(4.0));
  CHECK(sp->c_h() == doctest::Approx(1.0));

  auto sp2 = build_space_pair(diag({2, 2}), diag({1, 1}));
  CHECK(sp2->scale_eigs()(0) == doctest::Approx(0.5));
  CHECK(sp2->scale_eigs()(1) == doctest::Approx(0.5));
  CHECK(sp2->c_h() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("rejects bad Gram matrices") {
  Matrix h = diag({1, 1});
  Matrix nonherm = h;
  nonherm(0, 1) = 0.5;
  CHECK_THROWS_AS(build_space_pair(nonherm, h), InvalidInput);
  CHECK_THROWS_AS(build_space_pair(h, diag({1, -1})), InvalidInput);
  CHECK_THROWS_AS(build_space_pair(h, diag({1, 1, 1})), InvalidInput);
}

TEST_CASE("scale norms") {
  auto sp = build_space_pair(diag({1, 1}), diag({1, 4}));
  CHECK(scale_norm(*sp, unit(2, 1), 0.5) == doctest::Approx(std::sqrt(2.0)));
  CHECK(scale_norm(*sp, unit(2, 1), -1.0) == doctest::Approx(0.5));
  CHECK(scale_norm(*sp, Vector::Zero(2), 0.3) == 0.0);
  CHECK(scale_norm(*sp, unit(2, 1), 1.0) == doctest::Approx(sp->v_norm(unit(2, 1))));
  CHECK(scale_norm(*sp, unit(2, 0), 0.0) == doctest::Approx(sp->h_norm(unit(2, 0))));
}

TEST_CASE("scale norms are monotone in sigma") {
  auto sp = spectral_laplacian_1d(6);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    Vector u(6);
    for (int i = 0; i < 6; ++i) u(i) = Complex(n(rng), n(rng));
    double prev = 0.0;
    for (double s = -1.0; s <= 1.0 + 1e-12; s += 0.25) {
      const double v = scale_norm(*sp, u, s);
      CHECK(v >= prev * (1 - 1e-12));
      prev = v;
    }
  }
}

TEST_CASE("form operator norm") {
  auto scalar = build_space_pair(diag({1}), diag({1}));
  Matrix three = Matrix::Constant(1, 1, 3.0);
  for (double s : {-1.0, -0.5, 0.0}) CHECK(form_operator_norm(*scalar, three, s) == doctest::Approx(3.0));
  auto sp = build_space_pair(diag({1, 1}), diag({1, 4}));
  CHECK(form_operator_norm(*sp, Matrix::Zero(2, 2), -1.0) == 0.0);
}

TEST_CASE("form operator norm matches brute-force maximization") {
  auto sp = build_space_pair(diag({1, 1}), diag({1, 4}));
  Matrix a = diag({1, 1});
  a(0, 1) = 0.3;
  a(1, 0) = Complex(0.0, -0.2);
  const double value = form_operator_norm(*sp, a, -1.0);
  // sup |v* A u| over unit-V-norm u, v parametrized by an angle and a phase each.
  double best = 0.0;
  const int n = 90;
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < 24; ++p) {
      const double th = M_PI * i / n, ph = 2 * M_PI * p / 24;
      Vector u(2);
      u << std::cos(th), std::polar(std::sin(th), ph) / 2.0;
      for (int j = 0; j < n; ++j) {
        for (int q = 0; q < 24; ++q) {
          const double th2 = M_PI * j / n, ph2 = 2 * M_PI * q / 24;
          Vector v(2);
          v << std::cos(th2), std::polar(std::sin(th2), ph2) / 2.0;
          best = std::max(best, std::abs(v.dot(a * u)));
        }
      }
    }
  }
  CHECK(value >= best * (1 - 1e-12));
  CHECK(value == doctest::Approx(best).epsilon(5e-3));
}

TEST_CASE("FormNorm agrees with form_operator_norm") {
  auto sp = spectral_laplacian_1d(5);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  Matrix a(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) a(i, j) = Complex(n(rng), n(rng));
  for (double s : {-1.0, -0.5, 0.0}) {
    CHECK(FormNorm(*sp, s)(a) == doctest::Approx(form_operator_norm(*sp, a, s)).epsilon(1e-10));
  }
}

TEST_CASE("operator norm of the identity between scales") {
  auto sp = build_space_pair(diag({1, 1}), diag({1, 4}));
  const Matrix id = Matrix::Identity(2, 2);
  CHECK(sp->operator_norm(id, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(sp->operator_norm(id, 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(sp->operator_norm(id, 0.0, 1.0) == doctest::Approx(2.0));
  CHECK(sp->operator_norm(id, 0.0, -1.0) == doctest::Approx(1.0));
}
