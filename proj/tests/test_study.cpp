#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fapprox/families.hpp"
#include "fapprox/study.hpp"

using namespace fapprox;

namespace {

StudyData unit_data() {
  return {[](double) { return Vector::Ones(1).eval(); }, Vector::Ones(1)};
}

StudyOptions oracle_options() {
  StudyOptions o;
  o.method = "oracle";
  return o;
}

double strong(const StudyRow& r) { return std::max(r.err_mr2_vh, r.err_sup_v); }

}  // namespace

TEST_CASE("envelopes") {
  const ModulusProfile w = ModulusProfile::from_power(1.0, 0.75, 0.5, 1.0);
  const double h = 1.0 / 16;
  const double expected = (1 + std::pow(h, -0.25)) * 2 * std::pow(2 * h, 0.75) + std::pow(2 * h, 0.5) / 0.5;
  CHECK(affine_envelope(w, 0.5, h) == doctest::Approx(expected).epsilon(1e-10));
  CHECK(affine_envelope(ModulusProfile::zero(0.5, 1.0), 0.5, h) == 0.0);
  CHECK(sequence_envelope(w, 0.5, 16, 0.1) == doctest::Approx((1 + 2.0) * 0.1 + std::pow(1.0 / 16, 0.5) / 0.5));
  double prev = INFINITY;
  for (int m = 4; m <= 256; m *= 2) {
    const double e = affine_envelope(w, 0.5, 1.0 / m);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("autonomous study sits at the noise floor") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_poly(sp, 1.0, {2.0});
  const StudyResult res = convergence_study(fp, ModulusProfile::zero(0.5, 1.0), 0.5, {4, 8, 16}, unit_data(), {});
  for (const auto& r : res.rows) {
    CHECK(r.ok);
    CHECK(std::max({r.err_mr2_vvp, r.err_mr2_vh, r.err_sup_h, r.err_sup_v}) < 1e-8);
  }
  CHECK(rate_fit(res.rows).noise_floor);
  for (const auto& r : res.rows) CHECK(r.h1_h == doctest::Approx(res.rows[0].h1_h).epsilon(1e-9));
}

TEST_CASE("Hoelder scalar study") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_power(sp, 1.0, 1.0, 1.0, 0.75);
  const ModulusProfile w = ModulusProfile::from_power(1.0, 0.75, 0.5, 1.0);
  const StudyResult res = convergence_study(fp, w, 0.5, {4, 8, 16, 32, 64, 128, 256}, unit_data(), oracle_options());
  REQUIRE(res.rows.size() == 7);
  CHECK(res.reference_ok);
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    CHECK(strong(res.rows[i]) <= 1.1 * strong(res.rows[i - 1]));
  }
  CHECK(res.dominance_passed);
  const RateFit fit = rate_fit(res.rows);
  CHECK_FALSE(fit.noise_floor);
  CHECK(fit.mr2_vh >= 0.45);
  const WeakStrongReport ws = weak_vs_strong_report(res.rows, 1e-2);
  CHECK(ws.h1_spread < 3.0);
  CHECK(ws.passed);
}

TEST_CASE("Lipschitz scalar study") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_poly(sp, 1.0, {1.0, 1.0});
  const ModulusProfile w = ModulusProfile::from_power(1.0, 1.0, 0.0, 1.0);
  const StudyResult res = convergence_study(fp, w, 0.0, {8, 16, 32, 64}, unit_data(), oracle_options());
  CHECK(rate_fit(res.rows).mr2_vh >= 0.9);
}

TEST_CASE("AT and oracle give the same study rows") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_power(sp, 1.0, 1.0, 1.0, 0.75);
  const ModulusProfile w = ModulusProfile::from_power(1.0, 0.75, 0.5, 1.0);
  const StudyResult a = convergence_study(fp, w, 0.5, {4, 8, 16}, unit_data(), {});
  const StudyResult b = convergence_study(fp, w, 0.5, {4, 8, 16}, unit_data(), oracle_options());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].err_mr2_vh == doctest::Approx(b.rows[i].err_mr2_vh).epsilon(1e-4));
  }
}

TEST_CASE("study refuses a modulus failing the Dini condition") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_power(sp, 1.0, 1.0, 1.0, 0.2);
  CHECK_THROWS_AS(convergence_study(fp, ModulusProfile::from_power(1.0, 0.2, 0.5, 1.0), 0.5, {4, 8}, unit_data(), {}),
                  InvalidInput);
  // omega(t) = 1/|log t| near 0
  ModulusProfile log_profile;
  log_profile.gamma = 0.0;
  log_profile.horizon = 1.0;
  log_profile.deltas = log_delta_grid(1.0, 60, 1e-12);
  for (double d : log_profile.deltas) log_profile.values.push_back(1.0 / std::abs(std::log(std::min(d, 0.5))));
  log_profile.dini = dini_quantities(log_profile, 0.0, 1.0);
  CHECK_THROWS_AS(convergence_study(fp, log_profile, 0.0, {4, 8}, unit_data(), {}), InvalidInput);
}

TEST_CASE("failed rows are marked, not fatal") {
  auto sp = identity_space(1);
  // c(t) = 0.001 + t: the m = 16 approximation has q > 1 without a shift, m = 4 still contracts
  const FormPath fp = scalar_poly(sp, 1.0, {0.001, 1.0});
  StudyOptions o;
  o.at.mu_cap = 0.0;
  const StudyResult res =
      convergence_study(fp, ModulusProfile::from_power(1.0, 1.0, 0.0, 1.0), 0.0, {4, 16}, unit_data(), o);
  CHECK(res.any_failed);
  CHECK(res.rows[0].ok);
  CHECK(res.rows[1].status.find("failed: no contraction") == 0);
  std::ostringstream os;
  write_study_csv(os, res.rows);
  CHECK(os.str().find(",status\n") != std::string::npos);
}

TEST_CASE("rate fit needs three rows") {
  std::vector<StudyRow> rows(2);
  CHECK_THROWS_AS(rate_fit(rows), InvalidInput);
  CHECK(log_log_slope({1, 2, 4}, {1, 4, 16}) == doctest::Approx(2.0));
}

TEST_CASE("uniformity over data") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_power(sp, 1.0, 1.0, 1.0, 0.75);
  const ModulusProfile w = ModulusProfile::from_power(1.0, 0.75, 0.5, 1.0);
  const StudyOptions o = oracle_options();

  SUBCASE("scaled copies give identical ratios") {
    std::vector<StudyData> batch;
    for (double s : {0.5, 1.0, 2.0, 10.0}) {
      batch.push_back({[s](double) { return Vector::Constant(1, s).eval(); }, Vector::Constant(1, s)});
    }
    const UniformityResult u = uniformity_check(fp, w, 0.5, 16, batch, o);
    for (double r : u.ratios) CHECK(r == doctest::Approx(u.ratios[0]).epsilon(1e-9));
  }
  SUBCASE("random batch") {
    const UniformityResult u = uniformity_check(fp, w, 0.5, 16, random_data_batch(*sp, 1.0, 50, 20240611), o);
    CHECK(u.ratios.size() == 50);
    CHECK(u.passed);
  }
}

TEST_CASE("uniformity on the top scale eigenvector") {
  auto sp = spectral_laplacian_1d(8);
  const FormPath fp = spectral_heat(sp, 1.0, HeatParams{});
  const ModulusProfile w = measure_modulus(fp, 0.5, log_delta_grid(1.0, 24));
  std::vector<StudyData> batch = random_data_batch(*sp, 1.0, 10, 5);
  const Vector top = sp->scale_basis().col(7);
  for (double s : {1.0, -1.0}) {
    const Vector u0 = s * top / sp->v_norm(top);
    batch.push_back({[](double) { return Vector::Zero(8).eval(); }, u0});
  }
  const UniformityResult u = uniformity_check(fp, w, 0.5, 8, batch, oracle_options());
  CHECK(std::isfinite(u.max_ratio));
  CHECK(u.max_ratio < 10.0 * u.median_ratio);
}

TEST_CASE("random batches are normalized and reproducible") {
  auto sp = spectral_laplacian_1d(4);
  const auto a = random_data_batch(*sp, 1.0, 5, 42), b = random_data_batch(*sp, 1.0, 5, 42);
  const TimeGrid g = TimeGrid::uniform(1.0, 16, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(l2_norm(*sp, g, a[i].f, 0.0) + scale_norm(*sp, a[i].u0, 1.0) == doctest::Approx(1.0));
    CHECK((a[i].u0 - b[i].u0).norm() == 0.0);
  }
}

TEST_CASE("CSV layout") {
  StudyRow r;
  r.m = 8;
  r.mesh = 0.125;
  r.err_mr2_vh = 1.0 / 3.0;
  r.runtime_ms = 12.5;
  std::ostringstream os;
  write_study_csv(os, {r});
  CHECK(os.str() ==
        "m,mesh,d_lambda,err_mr2_vvp,err_mr2_vh,err_sup_h,err_sup_v,envelope,ratio,runtime_ms\n"
        "8,0.125,0,0,0.333333333333,0,0,0,0,0\n");
  std::ostringstream timed;
  write_study_csv(timed, {r}, true);
  CHECK(timed.str().find(",12.5\n") != std::string::npos);
}
