#include "fapprox/semigroup.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "fapprox/parallel.hpp"

namespace fapprox {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kContourTolerance = 1e-6;
constexpr double kRefinementSlack = 1.05;

// Scale indices into Weights.
enum Scale { kDualGamma = 0, kH = 1, kV = 2, kDual = 3 };

struct Weights {
  std::array<Matrix, 4> fwd;
  std::array<Matrix, 4> inv;

  Weights(const SpacePair& sp, double gamma) {
    const std::array<double, 4> sig = {-gamma, 0.0, 1.0, -1.0};
    for (int i = 0; i < 4; ++i) {
      fwd[i] = sp.weight(sig[i]);
      inv[i] = sp.weight_inverse(sig[i]);
    }
  }
  double norm(const Matrix& op, Scale in, Scale out) const { return spectral_norm(fwd[out] * op * inv[in]); }
};

struct ItemSpec {
  Scale in;
  Scale out;
};

// Maximizes f on [a, b] by golden-section search.
double golden_max(const std::function<double(double)>& f, double a, double b, double& arg) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && b - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  if (f1 >= f2) {
    arg = x1;
    return f1;
  }
  arg = x2;
  return f2;
}

std::vector<double> log_grid(double lo_exp, double hi_exp, int count) {
  std::vector<double> xs(count);
  for (int i = 0; i < count; ++i) {
    xs[i] = (lo_exp + (hi_exp - lo_exp) * i / (count - 1)) * std::log(10.0);
  }
  return xs;
}

struct Sup {
  double value = 0.0;
  double arg = 0.0;  // natural log of the radius or time
};

// Grid sweep of several functions sharing one expensive evaluation, then a
// golden polish of each around its grid argmax.
template <class Eval>
std::vector<Sup> sweep(const std::vector<double>& xs, int items, Eval&& eval) {
  std::vector<std::vector<double>> vals(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) vals[i] = eval(xs[i]);
  std::vector<Sup> out(items);
  for (int k = 0; k < items; ++k) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i) {
      if (vals[i][k] > vals[best][k]) best = i;
    }
    out[k] = {vals[best][k], xs[best]};
    if (!std::isfinite(out[k].value)) continue;
    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[std::min(best + 1, xs.size() - 1)];
    if (b > a) {
      double arg = xs[best];
      const double polished = golden_max([&](double x) { return eval(x)[k]; }, a, b, arg);
      if (polished > out[k].value) out[k] = {polished, arg};
    }
  }
  return out;
}

const std::array<ItemSpec, 5> kResolventItems = {{
    {kDualGamma, kH},
    {kV, kV},
    {kH, kV},
    {kDual, kH},
    {kDualGamma, kV},
}};

std::array<double, 5> resolvent_powers(double gamma) {
  return {1.0 - 0.5 * gamma, 1.0, 0.5, 0.5, 0.5 * (1.0 - gamma)};
}

std::array<double, 5> semigroup_powers(double gamma) { return {0.5 * gamma, 0.5 * (1.0 + gamma), 0.5, 1.0, 0.0}; }

struct SweepResult {
  std::array<Sup, 10> sup;
  std::array<double, 10> t_at{};
  std::array<double, 10> angle_at{};
};

SweepResult run_sweeps(const FormPath& fp, const FormConstants& constants, const std::vector<double>& ts,
                       const std::vector<double>& angles, int lambda_count, int s_count, double half_angle) {
  const SpacePair& sp = fp.space();
  const Weights w(sp, constants.gamma);
  const double g = constants.gamma;
  const auto rp = resolvent_powers(g);
  const auto spow = semigroup_powers(g);
  const int n = sp.dim();
  const Matrix eye = Matrix::Identity(n, n);
  const std::vector<double> rx = log_grid(-2.0, 4.0, lambda_count);
  const std::vector<double> sx = log_grid(-6.0, 3.0, s_count);

  // Jobs: (t, ray) for the resolvent and (t) for the semigroup.
  const std::size_t res_jobs = ts.size() * angles.size();
  std::vector<std::vector<Sup>> partial(res_jobs + ts.size());
  std::vector<Matrix> ops(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ops[i] = fp.h_operator(ts[i]) + constants.beta * eye;

  parallel_for(partial.size(), [&](std::size_t job) {
    if (job < res_jobs) {
      const Matrix& b = ops[job / angles.size()];
      const double ang = angles[job % angles.size()];
      if (in_sector(std::polar(1.0, ang), half_angle)) {
        partial[job] = std::vector<Sup>(5);
        for (auto& s : partial[job]) s.value = std::numeric_limits<double>::quiet_NaN();
        return;
      }
      partial[job] = sweep(rx, 5, [&](double x) {
        const Complex lam = std::polar(std::exp(x), ang);
        const Matrix r = (lam * eye - b).partialPivLu().inverse();
        std::vector<double> v(5);
        for (int k = 0; k < 5; ++k) {
          v[k] = w.norm(r, kResolventItems[k].in, kResolventItems[k].out) * std::pow(1.0 + std::abs(lam), rp[k]);
          if (!std::isfinite(v[k])) v[k] = std::numeric_limits<double>::infinity();
        }
        return v;
      });
    } else {
      const Matrix& b = ops[job - res_jobs];
      partial[job] = sweep(sx, 5, [&](double x) {
        const double s = std::exp(x);
        const Matrix e = semigroup_of(b, s);
        std::vector<double> v(5);
        v[0] = w.norm(e, kDualGamma, kH) * std::pow(s, spow[0]);
        v[1] = w.norm(e, kDualGamma, kV) * std::pow(s, spow[1]);
        v[2] = w.norm(e, kDual, kV) * std::pow(s, spow[2]);
        v[3] = w.norm(b * e, kH, kH) * s;
        v[4] = w.norm(e, kV, kV);
        return v;
      });
    }
  });

  SweepResult out;
  for (int k = 0; k < 10; ++k) out.sup[k] = {-1.0, 0.0};
  for (std::size_t job = 0; job < partial.size(); ++job) {
    const bool res = job < res_jobs;
    for (int k = 0; k < 5; ++k) {
      const Sup& s = partial[job][k];
      if (std::isnan(s.value)) continue;
      const int item = res ? k : k + 5;
      if (s.value > out.sup[item].value) {
        out.sup[item] = s;
        out.t_at[item] = res ? ts[job / angles.size()] : ts[job - res_jobs];
        out.angle_at[item] = res ? angles[job % angles.size()] : 0.0;
      }
    }
  }
  return out;
}

}  // namespace

SectorSpec SectorSpec::from_theta(double theta) {
  SectorSpec spec;
  spec.theta = theta;
  spec.phi = 0.5 * (theta + 0.5 * kPi);
  spec.contour_angle = 0.5 * kPi - 0.5 * theta;
  spec.contour_points = std::max(400, static_cast<int>(std::ceil(100.0 * std::tan(spec.contour_angle))));
  return spec;
}

void SectorSpec::validate() const {
  if (!(theta > 0.0 && theta < 0.5 * kPi)) throw InvalidInput("sector angle theta must lie in (0, pi/2)");
  if (!(phi > theta && phi < 0.5 * kPi)) throw InvalidInput("ray angle phi must lie in (theta, pi/2)");
  if (!(contour_angle > 0.5 * kPi - theta && contour_angle < 0.5 * kPi)) {
    throw InvalidInput("contour angle must lie in (pi/2 - theta, pi/2)");
  }
  if (!(radius_cap > 0.0)) throw InvalidInput("contour radius cap must be positive");
  if (contour_points < 2) throw InvalidInput("contour needs at least two points");
}

bool in_sector(Complex lambda, double half_angle) {
  if (lambda == Complex(0.0, 0.0)) return false;
  return std::abs(std::arg(lambda)) < half_angle;
}

Matrix resolvent(const SpacePair& sp, const Matrix& form, Complex lambda) {
  if (form.rows() != sp.dim() || form.cols() != sp.dim()) throw InvalidInput("form dimension mismatch");
  const Matrix shifted = lambda * Matrix::Identity(sp.dim(), sp.dim()) - sp.h_solve(form);
  Eigen::JacobiSVD<Matrix> svd(shifted);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(sp.dim() - 1);
  if (!(smin > 1e-14 * std::max(smax, 1e-300))) {
    std::ostringstream os;
    os << "lambda I - B is singular (condition estimate " << (smin > 0.0 ? smax / smin : INFINITY) << ")";
    throw InvalidInput(os.str());
  }
  return shifted.partialPivLu().inverse();
}

Matrix semigroup_of(const Matrix& h_operator, double s) {
  if (s < 0.0) throw InvalidInput("semigroup time must be nonnegative");
  if (s == 0.0) return Matrix::Identity(h_operator.rows(), h_operator.cols());
  return Matrix(-s * h_operator).exp();
}

Matrix semigroup_value(const SpacePair& sp, const Matrix& form, double s) {
  if (form.rows() != sp.dim() || form.cols() != sp.dim()) throw InvalidInput("form dimension mismatch");
  return semigroup_of(sp.h_solve(form), s);
}

double contour_check(const SpacePair& sp, const Matrix& form, double s, const SectorSpec& spec, double beta) {
  if (!(s > 0.0)) throw InvalidInput("contour check needs s > 0");
  if (!(spec.contour_angle > 0.0 && spec.contour_angle < 0.5 * kPi)) {
    throw InvalidInput("contour angle must lie in (0, pi/2)");
  }
  if (spec.contour_points < 2) throw InvalidInput("contour needs at least two points");
  const int n = sp.dim();
  const Matrix b = sp.h_solve(form);
  const Matrix eye = Matrix::Identity(n, n);
  const double psi = spec.contour_angle;
  const Complex up = std::polar(1.0, psi), down = std::polar(1.0, -psi);

  // Vertex just left of the spectrum when the rays still enclose it, which
  // avoids cancellation when e^{-sB} is small; otherwise left of -beta.
  Complex z0(-beta - 1.0 / s, 0.0);
  {
    Eigen::ComplexEigenSolver<Matrix> eig(b, false);
    const auto& ev = eig.eigenvalues();
    const Complex tight(ev.real().minCoeff() - 1.0 / s, 0.0);
    bool encloses = tight.real() > z0.real();
    for (int i = 0; i < n && encloses; ++i) encloses = std::abs(std::arg(ev(i) - tight)) < psi;
    if (encloses) z0 = tight;
  }

  // Trapezoid in x with r = c log(1 + e^x), c = 1/s: logarithmic near the
  // vertex, uniform in arclength along the oscillating tail.
  const double c = 1.0 / s;
  const double x0 = std::log(1e-12);
  const double x1 = spec.radius_cap / std::cos(psi);
  const int pts = spec.contour_points;
  const double h = (x1 - x0) / (pts - 1);

  Matrix sum = Matrix::Zero(n, n);
  for (int i = 0; i < pts; ++i) {
    const double x = x0 + h * i;
    const double r = c * std::log1p(std::exp(x));
    const double wt = (i == 0 || i == pts - 1 ? 0.5 : 1.0) * h * c / (1.0 + std::exp(-x));
    const Complex zl = z0 + r * down;
    const Complex zu = z0 + r * up;
    sum += (wt * std::exp(-s * zl) * down) * (zl * eye - b).partialPivLu().inverse();
    sum -= (wt * std::exp(-s * zu) * up) * (zu * eye - b).partialPivLu().inverse();
  }
  const Matrix quad = sum / Complex(0.0, 2.0 * kPi);
  const Matrix exact = semigroup_of(b, s);
  return (quad - exact).norm() / std::max(exact.norm(), 1e-300);
}

EstimateReport contour_report(const SpacePair& sp, const Matrix& form, double s, const SectorSpec& spec,
                              double beta) {
  EstimateReport rep;
  rep.name = "contour";
  rep.constant = contour_check(sp, form, s, spec, beta);
  rep.passed = rep.constant <= kContourTolerance;
  std::ostringstream os;
  os << "s=" << s << ", points=" << spec.contour_points << ", R=" << spec.radius_cap << "/(s cos)";
  rep.witness = os.str();
  if (!rep.passed) rep.note = "contour quadrature under-resolved; increase the radius cap or the point count";
  return rep;
}

std::vector<EstimateReport> verify_sector_estimates(const FormPath& fp, const FormConstants& constants,
                                                    const SectorSpec& spec, const SectorSweepOptions& options) {
  spec.validate();
  if (constants.gamma < 0.0 || constants.gamma >= 1.0) throw InvalidInput("gamma must lie in [0, 1)");
  std::vector<double> ts = options.t_samples;
  if (ts.empty()) ts = {0.0, 0.5 * fp.horizon(), fp.horizon()};
  std::vector<double> angles = options.ray_angles;
  if (angles.empty()) {
    const double a = kPi - 0.5 * (spec.theta + spec.phi);
    angles = {kPi, a, -a};
  }
  const double half_angle = 0.5 * kPi - spec.theta;
  std::vector<std::string> skipped;
  for (double a : angles) {
    if (in_sector(std::polar(1.0, a), half_angle)) {
      std::ostringstream os;
      os << "ray " << a << " inside the spectral sector skipped";
      skipped.push_back(os.str());
    }
  }
  const SweepResult coarse =
      run_sweeps(fp, constants, ts, angles, options.lambda_count, options.s_count, half_angle);
  const SweepResult fine =
      run_sweeps(fp, constants, ts, angles, options.lambda_refined, options.s_refined, half_angle);

  std::vector<EstimateReport> reports(10);
  for (int k = 0; k < 10; ++k) {
    EstimateReport& r = reports[k];
    r.name = "item" + std::to_string(k + 1);
    r.constant = coarse.sup[k].value;
    r.refined_constant = fine.sup[k].value;
    const bool finite = std::isfinite(r.constant) && std::isfinite(r.refined_constant) && r.constant >= 0.0;
    const bool stable = r.constant > 0.0 ? r.refined_constant <= kRefinementSlack * r.constant
                                         : r.refined_constant <= 1e-300;
    r.passed = finite && stable;
    std::ostringstream os;
    if (k < 5) {
      os << "t=" << coarse.t_at[k] << ", |lambda|=" << std::exp(coarse.sup[k].arg)
         << ", arg=" << coarse.angle_at[k];
    } else {
      os << "t=" << coarse.t_at[k] << ", s=" << std::exp(coarse.sup[k].arg);
    }
    r.witness = os.str();
    if (!finite) r.note = "supremum not finite";
    else if (!stable) r.note = "supremum grows under refinement";
    if (k < 5 && !skipped.empty()) r.note += (r.note.empty() ? "" : "; ") + skipped.front();
  }
  return reports;
}

}  // namespace fapprox
