#include <doctest.h>

#include <cmath>

#include "fapprox/families.hpp"
#include "fapprox/semigroup.hpp"

using namespace fapprox;

namespace {

Matrix scalar(Complex c) { return Matrix::Constant(1, 1, c); }

const EstimateReport& item(const std::vector<EstimateReport>& reps, const std::string& name) {
  for (const auto& r : reps) {
    if (r.name == name) return r;
  }
  FAIL("missing report " << name);
  return reps.front();
}

}  // namespace

TEST_CASE("scalar resolvents") {
  auto sp = identity_space(1);
  const Matrix r = resolvent(*sp, scalar(1.0), -1.0);
  CHECK(r(0, 0).real() == doctest::Approx(-0.5));
  CHECK(sp->operator_norm(resolvent(*sp, scalar(2.0), -2.0), 0.0, 0.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(resolvent(*sp, scalar(1.0), 1.0), InvalidInput);
}

TEST_CASE("diagonal resolvent norm") {
  auto sp = diagonal_space({1.0, 1.0}, {1.0, 4.0});
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 4.0;
  CHECK(sp->operator_norm(resolvent(*sp, a, Complex(-1.0, 0.0)), 0.0, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("semigroup values") {
  auto sp = identity_space(1);
  CHECK((semigroup_value(*sp, scalar(5.0), 0.0) - Matrix::Identity(1, 1)).norm() == 0.0);
  CHECK(semigroup_value(*sp, scalar(2.0), 0.5)(0, 0).real() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  Matrix b(2, 2);
  b << 1.0, 1.0, 0.0, 1.0;
  Matrix expected(2, 2);
  expected << 1.0, -1.0, 0.0, 1.0;
  expected *= std::exp(-1.0);
  CHECK((semigroup_of(b, 1.0) - expected).norm() < 1e-14);
}

TEST_CASE("semigroup property") {
  auto sp = spectral_laplacian_1d(6);
  const Matrix a = spectral_heat(sp, 1.0, HeatParams{})(0.3);
  const Matrix s1 = semigroup_value(*sp, a, 0.2), s2 = semigroup_value(*sp, a, 0.5);
  CHECK((s1 * s2 - semigroup_value(*sp, a, 0.7)).norm() < 1e-12 * s1.norm());
}

TEST_CASE("sector membership") {
  CHECK(in_sector(Complex(1.0, 0.0), 0.1));
  CHECK_FALSE(in_sector(Complex(-1.0, 0.0), 3.0));
  CHECK_FALSE(in_sector(Complex(1.0, 1.0), M_PI / 4));
  CHECK(in_sector(Complex(1.0, 0.9), M_PI / 4));
}

TEST_CASE("sector spec defaults") {
  const SectorSpec spec = SectorSpec::from_theta(0.4);
  CHECK(spec.phi > spec.theta);
  CHECK(spec.phi < M_PI / 2);
  CHECK(spec.contour_angle > M_PI / 2 - spec.theta);
  CHECK(spec.contour_angle < M_PI / 2);
  CHECK_NOTHROW(spec.validate());
  SectorSpec bad = spec;
  bad.contour_angle = 0.1;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = spec;
  bad.phi = 0.2;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("contour representation of the semigroup") {
  auto sp = identity_space(1);
  const SectorSpec spec = SectorSpec::from_theta(M_PI / 2 - 1e-3);
  for (double s : {0.01, 1.0, 10.0}) {
    CAPTURE(s);
    CHECK(contour_check(*sp, scalar(1.0), s, spec) < 1e-8);
  }
  auto heat_sp = spectral_laplacian_1d(16);
  const FormPath heat = spectral_heat(heat_sp, 1.0, HeatParams{});
  const FormConstants c = estimate_constants(heat, 17, 64.0);
  const SectorSpec hs = SectorSpec::from_theta(c.theta);
  for (double s : {0.01, 1.0, 10.0}) CHECK(contour_report(*heat_sp, heat(1.0), s, hs, c.beta).passed);
}

TEST_CASE("under-resolved contour fails") {
  auto sp = identity_space(1);
  SectorSpec spec = SectorSpec::from_theta(M_PI / 2 - 1e-3);
  spec.contour_points = 8;
  const EstimateReport r = contour_report(*sp, scalar(1.0), 1.0, spec);
  CHECK_FALSE(r.passed);
  CHECK(r.constant > 1e-6);
  CHECK_FALSE(r.note.empty());
}

TEST_CASE("scalar anchors of the sector estimates") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_poly(sp, 1.0, {1.0});
  const FormConstants c = estimate_constants(fp, 9, 8.0);
  const SectorSpec spec = SectorSpec::from_theta(c.theta);
  const auto reps = verify_sector_estimates(fp, c, spec);
  REQUIRE(reps.size() == 10);
  CHECK(item(reps, "item9").constant == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  SectorSweepOptions neg;
  neg.ray_angles = {M_PI};
  CHECK(item(verify_sector_estimates(fp, c, spec, neg), "item2").constant == doctest::Approx(1.0).epsilon(1e-9));
  for (const auto& r : reps) CHECK(r.passed);
}

TEST_CASE("heat-type sector estimates are finite and stable") {
  auto sp = diagonal_space({1.0, 1.0}, {2.0, 5.0});
  Matrix a(2, 2);
  a << 2.0, 0.4, -0.4, 5.0;
  const FormPath fp = autonomous(sp, 1.0, a);
  const FormConstants c = estimate_constants(fp, 5, 8.0);
  const auto reps = verify_sector_estimates(fp, c, SectorSpec::from_theta(c.theta));
  for (const auto& r : reps) {
    CAPTURE(r.name);
    CHECK(r.passed);
    CHECK(std::isfinite(r.constant));
    CHECK(r.refined_constant <= 1.05 * r.constant);
  }
}
