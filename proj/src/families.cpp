#include "fapprox/families.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace fapprox {

SpacePairPtr identity_space(int dim) {
  if (dim < 1) throw InvalidInput("dimension must be positive");
  const Matrix id = Matrix::Identity(dim, dim);
  return build_space_pair(id, id);
}

SpacePairPtr diagonal_space(const std::vector<double>& h_diag, const std::vector<double>& v_diag) {
  if (h_diag.size() != v_diag.size() || h_diag.empty()) throw InvalidInput("diagonal gram sizes differ");
  const int n = static_cast<int>(h_diag.size());
  Matrix gh = Matrix::Zero(n, n), gv = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    gh(i, i) = h_diag[i];
    gv(i, i) = v_diag[i];
  }
  return build_space_pair(gh, gv);
}

SpacePairPtr spectral_laplacian_1d(int modes) {
  if (modes < 1) throw InvalidInput("mode count must be positive");
  std::vector<double> h(modes, 1.0), v(modes);
  for (int k = 1; k <= modes; ++k) v[k - 1] = 1.0 + static_cast<double>(k) * k;
  return diagonal_space(h, v);
}

FormPath scalar_poly(SpacePairPtr space, double horizon, std::vector<Complex> coeffs) {
  if (coeffs.empty()) throw InvalidInput("scalar-poly needs at least one coefficient");
  const Matrix gv = space->gram_v();
  std::ostringstream desc;
  desc << "scalar-poly(degree=" << coeffs.size() - 1 << ")";
  return FormPath(std::move(space), horizon,
                  [gv, coeffs = std::move(coeffs)](double t) {
                    Complex c = 0.0;
                    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) c = c * t + *it;
                    return Matrix(c * gv);
                  },
                  desc.str());
}

FormPath scalar_power(SpacePairPtr space, double horizon, Complex a, Complex b, double eta) {
  if (!(eta > 0.0)) throw InvalidInput("scalar-power exponent must be positive");
  const Matrix gv = space->gram_v();
  std::ostringstream desc;
  desc << "scalar-power(a=" << a.real() << ",b=" << b.real() << ",eta=" << eta << ")";
  return FormPath(std::move(space), horizon,
                  [gv, a, b, eta](double t) { return Matrix((a + b * std::pow(t, eta)) * gv); }, desc.str());
}

FormPath spectral_heat(SpacePairPtr space, double horizon, const HeatParams& p) {
  if (!(p.kappa_eta > 0.0)) throw InvalidInput("spectral-heat exponent must be positive");
  const Matrix stiffness = space->gram_v() - space->gram_h();
  const Matrix mass = space->gram_h();
  std::ostringstream desc;
  desc << "spectral-heat-1d(N=" << space->dim() << ",eta=" << p.kappa_eta << ")";
  return FormPath(std::move(space), horizon,
                  [stiffness, mass, p](double t) {
                    const double kappa = p.kappa_a + p.kappa_b * std::pow(t, p.kappa_eta);
                    const double potential = p.potential0 + p.potential1 * t;
                    return Matrix(kappa * stiffness + potential * mass);
                  },
                  desc.str());
}

FormPath rotating_mix(SpacePairPtr space, double horizon, const RotatingParams& p) {
  const int n = space->dim();
  if (static_cast<int>(p.diag.size()) != n) throw InvalidInput("rotating-mix diagonal must have length N");
  for (const Complex& d : p.diag) {
    if (!(d.real() > 0.0)) throw InvalidInput("rotating-mix diagonal needs positive real parts");
  }
  Matrix gen = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    gen(i, i + 1) = 1.0;
    gen(i + 1, i) = -1.0;
  }
  Matrix diag = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) diag(i, i) = p.diag[i];
  const Matrix w = space->weight(1.0);
  std::ostringstream desc;
  desc << "rotating-mix(N=" << n << ",rate=" << p.rate << ",eta=" << p.eta << ")";
  return FormPath(std::move(space), horizon,
                  [gen, diag, w, p](double t) {
                    const Matrix u = (p.rate * std::pow(t, p.eta) * gen).exp();
                    return Matrix(w.adjoint() * u * diag * u.adjoint() * w);
                  },
                  desc.str());
}

FormPath table_path(SpacePairPtr space, double horizon, std::vector<double> times, std::vector<Matrix> matrices) {
  if (times.size() != matrices.size() || times.size() < 2) {
    throw InvalidInput("form table needs at least two samples and matching sizes");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw InvalidInput("form table times must be strictly increasing");
  }
  if (std::abs(times.front()) > 1e-12 || std::abs(times.back() - horizon) > 1e-12 * horizon) {
    throw InvalidInput("form table must span [0, T]");
  }
  for (const auto& m : matrices) {
    if (m.rows() != space->dim() || m.cols() != space->dim()) throw InvalidInput("form table matrix size mismatch");
  }
  return FormPath(std::move(space), horizon,
                  [times = std::move(times), matrices = std::move(matrices)](double t) {
                    auto it = std::upper_bound(times.begin(), times.end(), t);
                    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
                    if (k + 1 >= times.size()) return matrices.back();
                    const double lam = (t - times[k]) / (times[k + 1] - times[k]);
                    return Matrix((1.0 - lam) * matrices[k] + lam * matrices[k + 1]);
                  },
                  "table");
}

FormPath autonomous(SpacePairPtr space, double horizon, Matrix form) {
  if (form.rows() != space->dim() || form.cols() != space->dim()) throw InvalidInput("form size mismatch");
  return FormPath(std::move(space), horizon, [form = std::move(form)](double) { return form; }, "autonomous");
}

}  // namespace fapprox
