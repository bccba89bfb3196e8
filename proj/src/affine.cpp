#include "fapprox/affine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "fapprox/parallel.hpp"
#include "fapprox/quadrature.hpp"

namespace fapprox {

namespace {

constexpr double kBoundSlack = 1e-6;

double bounded_ratio(double measured, double bound) {
  if (bound > 0.0) return measured / bound;
  return measured <= 1e-13 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

Subdivision::Subdivision(double horizon, int intervals) : horizon_(horizon), intervals_(intervals) {
  if (!(horizon > 0.0)) throw InvalidInput("subdivision horizon must be positive");
  if (intervals < 1) throw InvalidInput("subdivision needs at least one interval");
}

int Subdivision::locate(double t) const {
  const int k = static_cast<int>(std::floor(t / mesh()));
  return std::clamp(k, 0, intervals_ - 1);
}

AffineFormPath::AffineFormPath(FormPath base, Subdivision subdivision, std::vector<Matrix> averages, int quad_order)
    : base_(std::move(base)),
      subdivision_(subdivision),
      averages_(std::make_shared<const std::vector<Matrix>>(std::move(averages))),
      quad_order_(quad_order) {
  if (static_cast<int>(averages_->size()) != subdivision_.intervals() + 1) {
    throw InvalidInput("affine path needs m + 1 averages");
  }
}

Matrix AffineFormPath::operator()(double t) const {
  const double tt = std::clamp(t, 0.0, subdivision_.horizon());
  const int k = subdivision_.locate(tt);
  const double left = subdivision_.knot(k);
  const double right = subdivision_.knot(k + 1);
  const double mesh = right - left;
  const auto& avg = *averages_;
  return ((right - tt) * avg[k] + (tt - left) * avg[k + 1]) / mesh;
}

FormPath AffineFormPath::as_path() const {
  std::ostringstream desc;
  desc << "affine[" << base_.descriptor() << ", m=" << subdivision_.intervals() << "]";
  auto averages = averages_;
  const Subdivision sub = subdivision_;
  return FormPath(base_.space_ptr(), sub.horizon(),
                  [averages, sub](double t) {
                    const int k = sub.locate(t);
                    const double left = sub.knot(k);
                    const double right = sub.knot(k + 1);
                    return Matrix(((right - t) * (*averages)[k] + (t - left) * (*averages)[k + 1]) / (right - left));
                  },
                  desc.str());
}

AffineFormPath build_affine(const FormPath& fp, int intervals, int quad_order) {
  if (quad_order < 1) throw InvalidInput("quadrature order must be positive");
  Subdivision sub(fp.horizon(), intervals);
  std::vector<Matrix> averages(intervals + 1);
  parallel_for(static_cast<std::size_t>(intervals), [&](std::size_t k) {
    const double a = sub.knot(static_cast<int>(k));
    const double b = sub.knot(static_cast<int>(k) + 1);
    const QuadratureRule rule = gauss_legendre(quad_order, a, b);
    Matrix sum = Matrix::Zero(fp.space().dim(), fp.space().dim());
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) sum += rule.weights[q] * fp(rule.nodes[q]);
    averages[k] = sum / (b - a);
  });
  averages[intervals] = fp(fp.horizon());
  return AffineFormPath(fp, sub, std::move(averages), quad_order);
}

double omega_lambda(const ModulusProfile& profile, double mesh, double t) {
  if (!(mesh > 0.0)) throw InvalidInput("mesh must be positive");
  if (t < 0.0 || t > profile.horizon * (1.0 + 1e-12)) throw InvalidInput("omega_Lambda argument outside [0, T]");
  if (t <= 2.0 * mesh) return t / mesh * profile.eval(4.0 * mesh);
  return 2.0 * profile.eval(2.0 * t);
}

double d_lambda(const ModulusProfile& profile, double mesh) {
  if (!(mesh > 0.0)) throw InvalidInput("mesh must be positive");
  return 2.0 * profile.eval(2.0 * mesh);
}

std::vector<EstimateReport> verify_affine_bounds(const FormPath& fp, const AffineFormPath& afp,
                                                 const ModulusProfile& profile, double gamma, int pair_samples) {
  if (pair_samples < 2) throw InvalidInput("need at least two samples per axis");
  const double T = fp.horizon();
  const double mesh = afp.subdivision().mesh();
  const FormNorm norm(fp.space(), -gamma);
  std::vector<double> ts(pair_samples);
  for (int i = 0; i < pair_samples; ++i) ts[i] = T * i / (pair_samples - 1);
  std::vector<Matrix> approx(ts.size()), exact(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    approx[i] = afp(ts[i]);
    exact[i] = fp(ts[i]);
  });

  const double dl = d_lambda(profile, mesh);
  std::vector<double> row_ratio(ts.size(), 0.0);
  std::vector<std::size_t> row_arg(ts.size(), 0);
  std::vector<double> dev_ratio(ts.size(), 0.0);
  parallel_for(ts.size(), [&](std::size_t i) {
    dev_ratio[i] = bounded_ratio(norm(approx[i] - exact[i]), dl);
    for (std::size_t j = 0; j < i; ++j) {
      const double r = bounded_ratio(norm(approx[i] - approx[j]), omega_lambda(profile, mesh, ts[i] - ts[j]));
      if (r > row_ratio[i]) {
        row_ratio[i] = r;
        row_arg[i] = j;
      }
    }
  });

  EstimateReport modulus;
  modulus.name = "affine-modulus";
  EstimateReport deviation;
  deviation.name = "affine-deviation";
  std::size_t worst_row = 0, worst_dev = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (row_ratio[i] > row_ratio[worst_row]) worst_row = i;
    if (dev_ratio[i] > dev_ratio[worst_dev]) worst_dev = i;
  }
  modulus.constant = row_ratio[worst_row];
  modulus.passed = modulus.constant <= 1.0 + kBoundSlack;
  {
    std::ostringstream os;
    os << "t=" << ts[worst_row] << ", s=" << ts[row_arg[worst_row]];
    modulus.witness = os.str();
  }
  deviation.constant = dev_ratio[worst_dev];
  deviation.passed = deviation.constant <= 1.0 + kBoundSlack;
  {
    std::ostringstream os;
    os << "t=" << ts[worst_dev] << ", d_Lambda=" << dl;
    deviation.witness = os.str();
  }
  return {modulus, deviation};
}

std::pair<double, double> sqrt_property_constants(const FormPath& fp, const std::vector<double>& t_grid,
                                                  double beta) {
  if (t_grid.empty()) throw InvalidInput("square-root check needs sample times");
  const SpacePair& sp = fp.space();
  const Matrix h_weight = sp.weight(0.0);
  const Matrix v_inverse = sp.weight_inverse(1.0);
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  for (double t : t_grid) {
    const Matrix b = sp.h_solve(fp(t)) + beta * Matrix::Identity(sp.dim(), sp.dim());
    Eigen::ComplexEigenSolver<Matrix> eig(b, false);
    for (int i = 0; i < sp.dim(); ++i) {
      const Complex lam = eig.eigenvalues()(i);
      if (lam.real() <= 0.0 && std::abs(lam.imag()) <= 1e-12 * std::max(1.0, std::abs(lam))) {
        throw InvalidInput("operator has an eigenvalue on the closed negative axis; square root undefined");
      }
    }
    const Matrix root = b.sqrt();
    Eigen::JacobiSVD<Matrix> svd(h_weight * root * v_inverse);
    lower = std::min(lower, svd.singularValues().minCoeff());
    upper = std::max(upper, svd.singularValues().maxCoeff());
  }
  return {lower, upper};
}

}  // namespace fapprox
