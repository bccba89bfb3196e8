#pragma once

#include <utility>
#include <vector>

#include "fapprox/forms.hpp"
#include "fapprox/report.hpp"

namespace fapprox {

/// Uniform subdivision 0 = l_0 < ... < l_m = T.
class Subdivision {
 public:
  Subdivision(double horizon, int intervals);
  double horizon() const { return horizon_; }
  int intervals() const { return intervals_; }
  double mesh() const { return horizon_ / intervals_; }
  double knot(int k) const { return k == intervals_ ? horizon_ : horizon_ * k / intervals_; }
  /// Interval index k with t in [l_k, l_{k+1}], clamped to [0, m-1].
  int locate(double t) const;

 private:
  double horizon_;
  int intervals_;
};

/// Piecewise-affine interpolation of interval averages.
///
/// averages[k] is the mean of A over [l_k, l_{k+1}] for k < m; the last entry
/// averages[m] is the mean over [T, T + |Lambda|] under the constant extension,
/// i.e. A(T).
class AffineFormPath {
 public:
  AffineFormPath(FormPath base, Subdivision subdivision, std::vector<Matrix> averages, int quad_order);

  Matrix operator()(double t) const;
  const FormPath& base() const { return base_; }
  const Subdivision& subdivision() const { return subdivision_; }
  const std::vector<Matrix>& averages() const { return *averages_; }
  int quad_order() const { return quad_order_; }

  /// The approximation as an ordinary form path on the same space and horizon.
  FormPath as_path() const;

 private:
  FormPath base_;
  Subdivision subdivision_;
  std::shared_ptr<const std::vector<Matrix>> averages_;
  int quad_order_;
};

AffineFormPath build_affine(const FormPath& fp, int intervals, int quad_order = 8);

/// (t/|L|) omega(4|L|) on [0, 2|L|], 2 omega(2t) beyond; omega extended by omega(T).
double omega_lambda(const ModulusProfile& profile, double mesh, double t);

/// 2 omega(2 |L|).
double d_lambda(const ModulusProfile& profile, double mesh);

/// Samples pair_samples^2 (t, s) pairs and checks
///   ||A_L(t) - A_L(s)||_{L(V,V'_gamma)} <= omega_L(|t-s|) (1 + 1e-6),
///   ||A_L(t) - A(t)||_{L(V,V'_gamma)} <= d_L (1 + 1e-6).
/// Returns the "modulus" and "deviation" reports with the maximal ratios.
std::vector<EstimateReport> verify_affine_bounds(const FormPath& fp, const AffineFormPath& afp,
                                                 const ModulusProfile& profile, double gamma, int pair_samples = 200);

/// Extreme constants of lower ||u||_V <= ||B(t)^{1/2} u||_H <= upper ||u||_V over the
/// sampled times, where B(t) = G_H^{-1}(A(t) + beta G_H).
std::pair<double, double> sqrt_property_constants(const FormPath& fp, const std::vector<double>& t_grid,
                                                  double beta);

}  // namespace fapprox
