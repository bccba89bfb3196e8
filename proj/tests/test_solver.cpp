#include <doctest.h>

#include <cmath>

#include "fapprox/families.hpp"
#include "fapprox/solver.hpp"
#include "fapprox/study.hpp"

using namespace fapprox;

namespace {

Vector one(Complex c = 1.0) { return Vector::Constant(1, c); }

TimeFunction constant(const Vector& v) {
  return [v](double) { return v; };
}

double c_h_error(const SpacePair& sp, const Trajectory& a, const Trajectory& b) {
  double err = 0.0, size = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    err = std::max(err, sp.h_norm(a.values[i] - b.values[i]));
    size = std::max(size, sp.h_norm(b.values[i]));
  }
  return err / size;
}

}  // namespace

TEST_CASE("time grid") {
  const TimeGrid g = TimeGrid::uniform(2.0, 4, 3);
  CHECK(g.cells() == 4);
  CHECK(g.width(1) == doctest::Approx(0.5));
  double sum = 0.0;
  for (int c = 0; c < g.cells(); ++c)
    for (int l = 0; l < g.order(); ++l) sum += g.colloc_weight(c, l);
  CHECK(sum == doctest::Approx(2.0));
  CHECK(g.cell_of(2.0) == 3);
  CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5}, 2), InvalidInput);
  CHECK_THROWS_AS(TimeGrid({0.1, 0.5}, 2), InvalidInput);
}

TEST_CASE("oracle on closed-form scalar problems") {
  auto sp = identity_space(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 16, 4);
  const Trajectory decay = oracle_solve(scalar_poly(sp, 1.0, {1.0}), constant(one(0.0)), one(), grid, 16);
  CHECK(std::abs(decay.values.back()(0) - std::exp(-1.0)) < 1e-9);

  const Trajectory lin = oracle_solve(scalar_poly(sp, 1.0, {1.0, 1.0}), constant(one(0.0)), one(), grid, 16);
  CHECK(std::abs(lin.values.back()(0) - std::exp(-1.5)) < 1e-9);

  const Trajectory forced = oracle_solve(scalar_poly(sp, 1.0, {1.0}), constant(one()), one(0.0), grid, 16);
  for (int i = 0; i <= grid.cells(); ++i) {
    CHECK(std::abs(forced.values[i](0) - (1.0 - std::exp(-grid.nodes()[i]))) < 1e-9);
  }
}

TEST_CASE("frozen propagation") {
  auto sp = identity_space(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 4, 2);
  const Fragment auto_frag = at_u1(scalar_poly(sp, 1.0, {2.0}), grid, one());
  CHECK(auto_frag.nodes[0](0) == Complex(1.0));
  CHECK(std::abs(auto_frag.nodes[2](0) - std::exp(-1.0)) < 1e-13);

  const Fragment lin = at_u1(scalar_poly(sp, 1.0, {1.0, 1.0}), grid, one());
  CHECK(std::abs(lin.nodes[4](0) - std::exp(-2.0)) < 1e-13);
}

TEST_CASE("frozen Duhamel integral") {
  auto sp = identity_space(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 8, 4);
  const Fragment zero = at_u2(scalar_poly(sp, 1.0, {1.0}), grid, constant(one(0.0)));
  for (const auto& v : zero.nodes) CHECK(v.norm() == 0.0);
  const Fragment f1 = at_u2(scalar_poly(sp, 1.0, {1.0}), grid, constant(one()));
  for (int i = 0; i <= grid.cells(); ++i) {
    CHECK(std::abs(f1.nodes[i](0) - (1.0 - std::exp(-grid.nodes()[i]))) < 1e-12);
  }

  auto msp = diagonal_space({1.0, 1.0}, {2.0, 5.0});
  Matrix a(2, 2);
  a << 2.0, 0.4, -0.4, 5.0;
  const FormPath fp = autonomous(msp, 1.0, a);
  Vector fv(2);
  fv << 1.0, Complex(0.0, 1.0);
  const Fragment at = at_u2(fp, grid, constant(fv));
  const Trajectory ref = oracle_solve(fp, constant(fv), Vector::Zero(2), grid, 64);
  double err = 0.0, size = 0.0;
  for (int i = 0; i <= grid.cells(); ++i) {
    err = std::max(err, msp->h_norm(at.nodes[i] - ref.values[i]));
    size = std::max(size, msp->h_norm(ref.values[i]));
  }
  CHECK(err / size < 1e-8);
}

TEST_CASE("correction operators vanish on autonomous paths") {
  auto sp = spectral_laplacian_1d(4);
  const FormPath fp = autonomous(sp, 1.0, sp->gram_v());
  const TimeGrid grid = TimeGrid::uniform(1.0, 4, 2);
  std::vector<Vector> h(grid.colloc_count(), Vector::Ones(4));
  for (const auto& v : apply_P(fp, grid, h).nodes) CHECK(v.norm() == 0.0);
  for (const auto& v : apply_Q(fp, 10.0, grid, h).colloc) CHECK(v.norm() == 0.0);
  CHECK(q_norm_estimate(fp, 0.0, grid).value == 0.0);

  const FormPath lin = scalar_poly(identity_space(1), 1.0, {1.0, 1.0});
  std::vector<Vector> zero(grid.colloc_count(), Vector::Zero(1));
  for (const auto& v : apply_P(lin, grid, zero).nodes) CHECK(v.norm() == 0.0);
  for (const auto& v : apply_Q(lin, 0.0, grid, zero).nodes) CHECK(v.norm() == 0.0);
}

TEST_CASE("AT solve on closed-form problems") {
  auto sp = identity_space(1);
  const TimeGrid grid = TimeGrid::uniform(1.0, 16, 4);
  const Trajectory decay = at_solve(scalar_poly(sp, 1.0, {1.0}), constant(one(0.0)), one(), grid);
  CHECK(std::abs(decay.values.back()(0) - std::exp(-1.0)) < 1e-9);
  CHECK(decay.iterations == 1);

  const Trajectory lin = at_solve(scalar_poly(sp, 1.0, {1.0, 1.0}), constant(one(0.0)), one(), grid);
  CHECK(std::abs(lin.values.back()(0) - std::exp(-1.5)) < 1e-6);
  CHECK(lin.values[0](0) == Complex(1.0));
  CHECK(lin.provenance == "at-solver");
}

TEST_CASE("AT solve agrees with the oracle") {
  auto sp = spectral_laplacian_1d(8);
  const FormPath fp = spectral_heat(sp, 1.0, HeatParams{});
  const TimeGrid grid = TimeGrid::uniform(1.0, 32, 4);
  Vector u0(8);
  for (int k = 0; k < 8; ++k) u0(k) = 1.0 / ((k + 1.0) * (k + 1.0));
  const TimeFunction f = [](double t) {
    Vector v = Vector::Zero(8);
    v(0) = 1.0 + t;
    v(2) = std::cos(3.0 * t);
    return v;
  };
  const Trajectory at = at_solve(fp, f, u0, grid);
  const Trajectory ref = oracle_solve(fp, f, u0, grid, 32);
  CHECK(c_h_error(*sp, at, ref) < 1e-6);
}

TEST_CASE("contraction estimate decreases along the shift ladder") {
  auto sp = identity_space(1);
  const FormPath fp = scalar_poly(sp, 1.0, {1.0, 1.0});
  const TimeGrid grid = TimeGrid::uniform(1.0, 32, 2);
  double prev = INFINITY;
  for (double mu : {0.0, 10.0, 100.0, 1000.0}) {
    const double q = q_norm_estimate(fp, mu, grid).value;
    CHECK(q <= prev + 1e-9);
    prev = q;
  }
  CHECK(prev < 0.5);
}

TEST_CASE("shift ladder") {
  const auto ladder = mu_ladder(80.0);
  REQUIRE(ladder.size() == 5);
  CHECK(ladder[0] == 0.0);
  CHECK(ladder[1] == 10.0);
  CHECK(ladder[4] == 80.0);
  CHECK(mu_ladder(0.0).size() == 1);
}

TEST_CASE("missing contraction is reported") {
  auto sp = identity_space(1);
  const FormPath rough = scalar_poly(sp, 1.0, {1.0, 200.0});
  const TimeGrid grid = TimeGrid::uniform(1.0, 32, 2);
  ATOptions opt;
  opt.mu_cap = 0.0;
  try {
    at_solve(rough, constant(one(0.0)), one(), grid, opt);
    FAIL("expected a contraction failure");
  } catch (const NumericalFailure& e) {
    CHECK(std::string(e.what()).find("no contraction; refine grid or raise mu cap") != std::string::npos);
  }
}

TEST_CASE("solution norms") {
  auto sp = spectral_laplacian_1d(3);
  const TimeGrid grid = TimeGrid::uniform(1.0, 4, 2);
  Trajectory zero(grid);
  zero.values.assign(5, Vector::Zero(3));
  zero.derivatives = zero.values;
  zero.colloc_values.assign(8, Vector::Zero(3));
  zero.colloc_derivatives = zero.colloc_values;
  const SolutionNorms n = solution_norms(*sp, zero);
  CHECK(n.mr2_vvp == 0.0);
  CHECK(n.mr2_vh == 0.0);
  CHECK(n.sup_v == 0.0);
}

TEST_CASE("solutions scale linearly with the data") {
  auto sp = spectral_laplacian_1d(4);
  const FormPath fp = spectral_heat(sp, 1.0, HeatParams{});
  const TimeGrid grid = TimeGrid::uniform(1.0, 8, 2);
  const Vector u0 = Vector::Ones(4);
  const Vector fv = Vector::LinSpaced(4, 1.0, 2.0);
  const Trajectory a = oracle_solve(fp, constant(fv), u0, grid, 4);
  const Trajectory b = oracle_solve(fp, constant(Vector(3.5 * fv)), Vector(3.5 * u0), grid, 4);
  const SolutionNorms na = solution_norms(*sp, a), nb = solution_norms(*sp, b);
  CHECK(nb.mr2_vh == doctest::Approx(3.5 * na.mr2_vh).epsilon(1e-12));
  CHECK(nb.sup_v == doctest::Approx(3.5 * na.sup_v).epsilon(1e-12));
  CHECK(solution_norms(*sp, b.minus(a.scaled(3.5))).mr2_vh <= 1e-12 * nb.mr2_vh);
}

TEST_CASE("a-priori estimate holds with a refinement-stable constant") {
  auto sp = spectral_laplacian_1d(6);
  const FormPath fp = spectral_heat(sp, 1.0, HeatParams{});
  const auto batch = random_data_batch(*sp, 1.0, 100, 20240611);
  double coarse_max = 0.0, fine_max = 0.0;
  for (int cells : {8, 16}) {
    const TimeGrid grid = TimeGrid::uniform(1.0, cells, 4);
    double& target = cells == 8 ? coarse_max : fine_max;
    for (const auto& d : batch) {
      const Trajectory u = oracle_solve(fp, d.f, d.u0, grid, 2);
      const double data = l2_norm(*sp, grid, d.f, -1.0) + sp->h_norm(d.u0);
      target = std::max(target, solution_norms(*sp, u).mr2_vvp / data);
    }
  }
  CHECK(std::isfinite(coarse_max));
  CHECK(fine_max == doctest::Approx(coarse_max).epsilon(0.05));
}
