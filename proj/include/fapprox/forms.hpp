#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fapprox/hilbert.hpp"

namespace fapprox {

/// A time-dependent sesquilinear form t -> A(t) on [0, T], a(t; u, v) = v* A(t) u.
/// Evaluation past T uses the constant extension A(T).
class FormPath {
 public:
  using Evaluator = std::function<Matrix(double)>;

  FormPath(SpacePairPtr space, double horizon, Evaluator eval, std::string descriptor);

  Matrix operator()(double t) const;
  const SpacePair& space() const { return *space_; }
  const SpacePairPtr& space_ptr() const { return space_; }
  double horizon() const { return horizon_; }
  const std::string& descriptor() const { return descriptor_; }

  /// H-realized operator B(t) = G_H^{-1} A(t).
  Matrix h_operator(double t) const { return space_->h_solve((*this)(t)); }

 private:
  SpacePairPtr space_;
  double horizon_;
  Evaluator eval_;
  std::string descriptor_;
};

struct FormConstants {
  double M = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double theta = 0.0;  ///< pi/2 - arctan(M / alpha)
};

/// Holomorphy angle pi/2 - arctan(M/alpha).
double sector_angle(double M, double alpha);

/// M from the L(V,V') norm; (alpha, beta) from the doubling ladder 0, 1, 2, 4, ...
/// Throws NumericalFailure("not uniformly quasi-coercive on sample") when the
/// ladder is exhausted.
FormConstants estimate_constants(const FormPath& fp, int t_samples, double trial_beta_cap);

struct PowerModel {
  double C = 0.0;
  double eta = 1.0;
};

struct DiniQuantities {
  double integral = 0.0;   ///< int_0^T omega(t) / t^{1+gamma/2} dt
  double sup_ratio = 0.0;  ///< sup_{t <= T} omega(t) / t^{gamma/2}
  bool finite = true;      ///< false signals a failed Dini condition
};

/// Modulus of continuity omega with its Dini quantities.
///
/// A profile holds a power model C t^eta, a non-decreasing table, or both.
/// `eval` returns the pointwise maximum of the power model and the table
/// read at the next tabulated argument, extended constantly beyond T.
struct ModulusProfile {
  double gamma = 0.0;
  double horizon = 1.0;
  std::optional<PowerModel> power;
  std::vector<double> deltas;
  std::vector<double> values;
  DiniQuantities dini;

  double eval(double t) const;
  bool is_zero() const;

  static ModulusProfile from_power(double C, double eta, double gamma, double horizon);
  static ModulusProfile zero(double gamma, double horizon);
};

/// Closed forms for power models; log-substituted quadrature for tables.
DiniQuantities dini_quantities(const ModulusProfile& model, double gamma, double horizon);

/// int_0^upper omega(r) / r^{1+gamma/2} dr (+inf when the integrand is not integrable at 0).
double dini_tail(const ModulusProfile& model, double gamma, double upper);

/// Log-spaced grid of `count` points in [lo_fraction * T, T].
std::vector<double> log_delta_grid(double horizon, int count, double lo_fraction = 1e-4);

/// Running-max modulus in L(V, V'_gamma) over sampled pairs, with a log-log
/// least-squares power fit when at least three positive samples exist.
ModulusProfile measure_modulus(const FormPath& fp, double gamma, const std::vector<double>& delta_grid,
                               int t_samples = 65);

struct HypothesisResult {
  std::string name;
  bool passed = false;
  bool assumed = false;
  std::string detail;
};

struct HypothesisReport {
  double gamma = 0.0;
  std::vector<int> indices;
  std::vector<double> d_gamma;  ///< (H1) deviations in L(V, V'_gamma)
  std::vector<double> d_dual;   ///< (H0) deviations in L(V, V')
  std::vector<ModulusProfile> omega;
  std::vector<double> dini;
  std::vector<double> sup_ratio;
  std::vector<double> decayed;  ///< d_n n^{gamma/2}
  std::vector<double> tails;    ///< int_0^{T/n} omega_n(r)/r^{1+gamma/2} dr
  ModulusProfile base;
  std::vector<HypothesisResult> results;

  bool all_passed() const;
  const HypothesisResult& result(const std::string& name) const;
};

struct HypothesisOptions {
  std::vector<int> indices;  ///< n for each sequence member; defaults to 1..len
  int t_samples = 257;
  int modulus_samples = 65;
  int delta_count = 33;
};

/// Checks (H0)-(H6) for the sequence `seq` approximating `fp`.
HypothesisReport check_hypotheses(const FormPath& fp, const std::vector<FormPath>& seq, double gamma,
                                  const HypothesisOptions& options = {});

}  // namespace fapprox
