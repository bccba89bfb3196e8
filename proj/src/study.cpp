#include "fapprox/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "fapprox/parallel.hpp"

namespace fapprox {

double affine_envelope(const ModulusProfile& omega, double gamma, double mesh) {
  if (!(mesh > 0.0)) throw InvalidInput("mesh must be positive");
  return (1.0 + std::pow(mesh, -0.5 * gamma)) * d_lambda(omega, mesh) + dini_tail(omega, gamma, 2.0 * mesh);
}

double sequence_envelope(const ModulusProfile& omega_n, double gamma, int n, double d_n) {
  if (n < 1) throw InvalidInput("sequence index must be positive");
  return (1.0 + std::pow(static_cast<double>(n), 0.5 * gamma)) * d_n +
         dini_tail(omega_n, gamma, omega_n.horizon / n);
}

namespace {

double strong_error(const StudyRow& r) { return std::max(r.err_mr2_vh, r.err_sup_v); }

double max_error(const StudyRow& r) { return std::max({r.err_mr2_vvp, r.err_mr2_vh, r.err_sup_h, r.err_sup_v}); }

Trajectory solve_with(const FormPath& fp, const StudyData& data, const TimeGrid& grid, const StudyOptions& options) {
  if (options.method == "oracle") return oracle_solve(fp, data.f, data.u0, grid, options.substeps);
  if (options.method == "at") return at_solve(fp, data.f, data.u0, grid, options.at);
  throw InvalidInput("unknown method '" + options.method + "'");
}

void check_dini(const ModulusProfile& omega, double gamma) {
  const DiniQuantities q = dini_quantities(omega, gamma, omega.horizon);
  if (!q.finite || !std::isfinite(q.integral)) {
    throw InvalidInput("modulus fails the Dini condition; study refused");
  }
}

double data_norm(const SpacePair& sp, const TimeGrid& grid, const StudyData& d) {
  return l2_norm(sp, grid, d.f, 0.0) + scale_norm(sp, d.u0, 1.0);
}

StudyRow solve_row(const FormPath& fp, const ModulusProfile& omega, double gamma, int m, const StudyData& data,
                   const TimeGrid& grid, const Trajectory& reference, const StudyOptions& options) {
  StudyRow row;
  row.m = m;
  row.mesh = fp.horizon() / m;
  row.d_lambda = d_lambda(omega, row.mesh);
  row.envelope = affine_envelope(omega, gamma, row.mesh);
  const auto start = std::chrono::steady_clock::now();
  try {
    const AffineFormPath afp = build_affine(fp, m, options.quad_order);
    const Trajectory approx = solve_with(afp.as_path(), data, grid, options);
    const SolutionNorms e = solution_norms(fp.space(), approx.minus(reference));
    row.err_mr2_vvp = e.mr2_vvp;
    row.err_mr2_vh = e.mr2_vh;
    row.err_sup_h = e.sup_h;
    row.err_sup_v = e.sup_v;
    row.h1_h = solution_norms(fp.space(), approx).h1_h;
    row.ratio = row.envelope > 0.0 ? max_error(row) / row.envelope : 0.0;
  } catch (const std::exception& ex) {
    row.ok = false;
    row.status = std::string("failed: ") + ex.what();
  }
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

StudyResult convergence_study(const FormPath& fp, const ModulusProfile& omega, double gamma,
                              const std::vector<int>& ladder, const StudyData& data, const StudyOptions& options) {
  if (ladder.empty()) throw InvalidInput("empty refinement ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (ladder[i] < 1) throw InvalidInput("ladder entries must be positive");
    if (i > 0 && ladder[i] <= ladder[i - 1]) throw InvalidInput("ladder must be strictly ascending");
  }
  check_dini(omega, gamma);
  const int finest = *std::max_element(ladder.begin(), ladder.end());
  const int cells = options.cells > 0 ? options.cells : finest;
  const TimeGrid grid = TimeGrid::uniform(fp.horizon(), cells, options.gauss_order);
  const SpacePair& sp = fp.space();

  StudyResult res;
  res.data_norm = data_norm(sp, grid, data);
  res.data_norm_dual = l2_norm(sp, grid, data.f, -1.0) + sp.h_norm(data.u0);

  const Trajectory reference = oracle_solve(fp, data.f, data.u0, grid, 8 * options.substeps);
  const Trajectory check = oracle_solve(fp, data.f, data.u0, grid, 16 * options.substeps);
  res.reference_error = solution_norms(sp, reference.minus(check)).mr2_vh;

  res.rows.resize(ladder.size());
  parallel_for(ladder.size(), [&](std::size_t i) {
    res.rows[i] = solve_row(fp, omega, gamma, ladder[i], data, grid, reference, options);
  });

  std::vector<const StudyRow*> good;
  double smallest = INFINITY;
  for (const StudyRow& r : res.rows) {
    if (!r.ok) {
      res.any_failed = true;
      continue;
    }
    good.push_back(&r);
    smallest = std::min(smallest, strong_error(r));
  }
  if (!good.empty()) res.reference_ok = res.reference_error <= 0.1 * smallest;

  const std::size_t half = (good.size() + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) res.fitted_constant = std::max(res.fitted_constant, good[i]->ratio);
  for (std::size_t i = half; i < good.size(); ++i) {
    if (good[i]->ratio > 1.1 * res.fitted_constant) res.dominance_passed = false;
  }
  return res;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidInput("slope fit needs at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidInput("slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) throw InvalidInput("slope fit needs distinct abscissae");
  return (n * sxy - sx * sy) / den;
}

RateFit rate_fit(const std::vector<StudyRow>& rows) {
  std::vector<const StudyRow*> good;
  for (const StudyRow& r : rows) {
    if (r.ok) good.push_back(&r);
  }
  if (good.size() < 3) throw InvalidInput("rate fit needs at least three successful rows");
  RateFit fit;
  fit.noise_floor = std::all_of(good.begin(), good.end(), [](const StudyRow* r) {
    return std::max({r->err_mr2_vvp, r->err_mr2_vh, r->err_sup_h, r->err_sup_v}) < 1e-8;
  });
  if (fit.noise_floor) return fit;
  std::vector<double> mesh;
  for (const StudyRow* r : good) mesh.push_back(r->mesh);
  auto slope = [&](double StudyRow::*field) {
    std::vector<double> y;
    for (const StudyRow* r : good) y.push_back(std::max(r->*field, 1e-300));
    return log_log_slope(mesh, y);
  };
  fit.mr2_vvp = slope(&StudyRow::err_mr2_vvp);
  fit.mr2_vh = slope(&StudyRow::err_mr2_vh);
  fit.sup_h = slope(&StudyRow::err_sup_h);
  fit.sup_v = slope(&StudyRow::err_sup_v);
  return fit;
}

UniformityResult uniformity_check(const FormPath& fp, const ModulusProfile& omega, double gamma, int m,
                                  const std::vector<StudyData>& batch, const StudyOptions& options) {
  if (batch.empty()) throw InvalidInput("empty data batch");
  check_dini(omega, gamma);
  const int cells = options.cells > 0 ? options.cells : m;
  const TimeGrid grid = TimeGrid::uniform(fp.horizon(), cells, options.gauss_order);
  UniformityResult res;
  for (const StudyData& d : batch) {
    const Trajectory reference = oracle_solve(fp, d.f, d.u0, grid, 8 * options.substeps);
    const StudyRow row = solve_row(fp, omega, gamma, m, d, grid, reference, options);
    if (!row.ok) throw NumericalFailure("uniformity batch solve " + row.status);
    const double norm = data_norm(fp.space(), grid, d);
    res.ratios.push_back(norm > 0.0 ? row.ratio / norm : 0.0);
  }
  std::vector<double> sorted = res.ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  res.median_ratio = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  res.max_ratio = sorted.back();
  res.passed = res.max_ratio < 3.0 * res.median_ratio;
  return res;
}

std::vector<StudyData> random_data_batch(const SpacePair& sp, double horizon, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int n = sp.dim();
  auto draw = [&] {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(normal(rng), normal(rng));
    return v;
  };
  const TimeGrid grid = TimeGrid::uniform(horizon, 16, 4);
  std::vector<StudyData> out;
  for (int k = 0; k < count; ++k) {
    const Vector a = draw(), b = draw(), u0 = draw();
    StudyData d{[a, b](double t) -> Vector { return a + t * b; }, u0};
    const double norm = data_norm(sp, grid, d);
    d.f = [a, b, norm](double t) -> Vector { return (a + t * b) / norm; };
    d.u0 = u0 / norm;
    out.push_back(std::move(d));
  }
  return out;
}

WeakStrongReport weak_vs_strong_report(const std::vector<StudyRow>& rows, double strong_tol) {
  WeakStrongReport rep;
  double lo = INFINITY, hi = 0.0;
  const StudyRow* finest = nullptr;
  for (const StudyRow& r : rows) {
    if (!r.ok) continue;
    lo = std::min(lo, r.h1_h);
    hi = std::max(hi, r.h1_h);
    if (!finest || r.mesh < finest->mesh) finest = &r;
  }
  if (!finest) {
    rep.note = "no successful rows";
    return rep;
  }
  rep.h1_spread = lo > 0.0 ? hi / lo : INFINITY;
  rep.finest_error = strong_error(*finest);
  rep.errors_vanish = rep.finest_error < strong_tol;
  rep.passed = rep.h1_spread < 3.0 && rep.errors_vanish;
  std::ostringstream os;
  os << "H1(H) spread " << rep.h1_spread << ", strong error " << rep.finest_error << " at m=" << finest->m;
  rep.note = os.str();
  return rep;
}

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows, bool timing) {
  const bool status = std::any_of(rows.begin(), rows.end(), [](const StudyRow& r) { return !r.ok; });
  os << "m,mesh,d_lambda,err_mr2_vvp,err_mr2_vh,err_sup_h,err_sup_v,envelope,ratio,runtime_ms";
  if (status) os << ",status";
  os << "\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(12);
  for (const StudyRow& r : rows) {
    os << r.m << ',' << r.mesh << ',' << r.d_lambda << ',' << r.err_mr2_vvp << ',' << r.err_mr2_vh << ','
       << r.err_sup_h << ',' << r.err_sup_v << ',' << r.envelope << ',' << r.ratio << ','
       << (timing ? r.runtime_ms : 0.0);
    if (status) {
      std::string s = r.status;
      std::replace(s.begin(), s.end(), ',', ';');
      std::replace(s.begin(), s.end(), '\n', ' ');
      os << ',' << s;
    }
    os << "\n";
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace fapprox
