#include <doctest.h>

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "fapprox/affine.hpp"
#include "fapprox/families.hpp"

using namespace fapprox;

namespace {

double scalar(const Matrix& m) { return m(0, 0).real(); }

}  // namespace

TEST_CASE("subdivision") {
  const Subdivision s(1.0, 4);
  CHECK(s.mesh() == 0.25);
  CHECK(s.knot(0) == 0.0);
  CHECK(s.knot(4) == 1.0);
  CHECK(s.locate(0.3) == 1);
  CHECK(s.locate(1.0) == 3);
  CHECK_THROWS_AS(Subdivision(1.0, 0), InvalidInput);
}

TEST_CASE("averages of a linear coefficient") {
  auto sp = identity_space(1);
  const AffineFormPath afp = build_affine(scalar_poly(sp, 1.0, {1.0, 1.0}), 2);
  REQUIRE(afp.averages().size() == 3);
  CHECK(scalar(afp.averages()[0]) == doctest::Approx(1.25));
  CHECK(scalar(afp.averages()[1]) == doctest::Approx(1.75));
  CHECK(scalar(afp.averages()[2]) == doctest::Approx(2.0));
  CHECK(scalar(afp(0.25)) == doctest::Approx(1.5));
  CHECK(scalar(afp(0.0)) == doctest::Approx(1.25));
  CHECK(scalar(afp(0.5)) == doctest::Approx(1.75));
  CHECK(scalar(afp(1.0)) == doctest::Approx(2.0));
}

TEST_CASE("average of t^2 on the first interval") {
  auto sp = identity_space(1);
  for (int order : {2, 4, 8}) {
    const AffineFormPath afp = build_affine(scalar_poly(sp, 1.0, {0.0, 0.0, 1.0}), 4, order);
    CHECK(scalar(afp.averages()[0]) == doctest::Approx(1.0 / 48.0).epsilon(1e-13));
  }
}

TEST_CASE("autonomous input is reproduced exactly") {
  auto sp = spectral_laplacian_1d(4);
  Matrix a = sp->gram_v();
  a(0, 1) = Complex(0.2, 0.1);
  const FormPath fp = autonomous(sp, 2.0, a);
  const AffineFormPath afp = build_affine(fp, 7);
  for (double t : {0.0, 0.13, 1.0, 1.71, 2.0}) CHECK((afp(t) - a).norm() <= 1e-12 * a.norm());
}

TEST_CASE("affine path is continuous at the knots") {
  auto sp = identity_space(1);
  const AffineFormPath afp = build_affine(scalar_power(sp, 1.0, 1.0, 1.0, 0.75), 8);
  for (int k = 1; k < 8; ++k) {
    const double t = k / 8.0;
    CHECK(std::abs(scalar(afp(t - 1e-12)) - scalar(afp(t + 1e-12))) < 1e-9);
  }
}

TEST_CASE("affine modulus") {
  const ModulusProfile lin = ModulusProfile::from_power(1.0, 1.0, 0.0, 1.0);
  CHECK(omega_lambda(lin, 0.1, 0.05) == doctest::Approx(0.2));
  CHECK(omega_lambda(lin, 0.1, 0.5) == doctest::Approx(2.0));
  CHECK(omega_lambda(ModulusProfile::zero(0.0, 1.0), 0.1, 0.3) == 0.0);
  CHECK_THROWS_AS(omega_lambda(lin, 0.1, 1.5), InvalidInput);
}

TEST_CASE("deviation bound") {
  CHECK(d_lambda(ModulusProfile::from_power(1.0, 1.0, 0.0, 1.0), 0.1) == doctest::Approx(0.4));
  CHECK(d_lambda(ModulusProfile::from_power(1.0, 0.75, 0.5, 1.0), 1.0 / 16) == doctest::Approx(0.420448).epsilon(1e-6));
  CHECK(d_lambda(ModulusProfile::zero(0.5, 1.0), 0.25) == 0.0);
}

TEST_CASE("affine bounds hold on sampled pairs") {
  auto sp = identity_space(1);
  SUBCASE("autonomous") {
    const FormPath fp = autonomous(sp, 1.0, Matrix::Constant(1, 1, 3.0));
    for (const auto& r : verify_affine_bounds(fp, build_affine(fp, 8), ModulusProfile::zero(0.5, 1.0), 0.5)) {
      CHECK(r.passed);
      CHECK(r.constant == 0.0);
    }
  }
  SUBCASE("linear coefficient, gamma 0") {
    const FormPath fp = scalar_poly(sp, 1.0, {0.0, 1.0});
    for (const auto& r : verify_affine_bounds(fp, build_affine(fp, 8), ModulusProfile::from_power(1.0, 1.0, 0.0, 1.0), 0.0)) {
      CHECK(r.passed);
      CHECK(r.constant <= 1.0);
    }
  }
  SUBCASE("Hoelder coefficient, gamma 0.5") {
    const FormPath fp = scalar_power(sp, 1.0, 0.0, 1.0, 0.75);
    for (const auto& r : verify_affine_bounds(fp, build_affine(fp, 16), ModulusProfile::from_power(1.0, 0.75, 0.5, 1.0), 0.5)) {
      CHECK(r.passed);
      CHECK(r.constant <= 1.0);
    }
  }
}

TEST_CASE("square root property constants") {
  auto scalar_sp = identity_space(1);
  auto [lo, hi] = sqrt_property_constants(scalar_poly(scalar_sp, 1.0, {1.0}), {0.0, 0.5, 1.0}, 0.0);
  CHECK(lo == doctest::Approx(1.0));
  CHECK(hi == doctest::Approx(1.0));

  auto sp = spectral_laplacian_1d(5);
  auto [lo2, hi2] = sqrt_property_constants(autonomous(sp, 1.0, sp->gram_v()), {0.0, 1.0}, 0.0);
  CHECK(lo2 == doctest::Approx(1.0));
  CHECK(hi2 == doctest::Approx(1.0));

  auto sp2 = diagonal_space({1.0, 1.0}, {1.0, 4.0});
  Matrix a(2, 2);
  a << 1.0, 0.8, -0.3, 4.0;
  auto [lo3, hi3] = sqrt_property_constants(autonomous(sp2, 1.0, a), {0.0}, 0.0);
  CHECK(lo3 < 1.0);
  CHECK(hi3 > 1.0);
  // Random-vector extremization stays inside the computed constants.
  const Matrix b = sp2->gram_h_inverse() * a;
  const Matrix root = b.sqrt();
  for (int k = 0; k < 200; ++k) {
    Vector u(2);
    u << std::cos(0.0314 * k), Complex(0.0, std::sin(0.0314 * k));
    const double ratio = sp2->h_norm(root * u) / sp2->v_norm(u);
    CHECK(ratio >= lo3 * (1 - 1e-9));
    CHECK(ratio <= hi3 * (1 + 1e-9));
  }
}
