#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fapprox/affine.hpp"
#include "fapprox/solver.hpp"

namespace fapprox {

/// (1 + |L|^{-gamma/2}) d_L + int_0^{2|L|} omega(t)/t^{1+gamma/2} dt.
double affine_envelope(const ModulusProfile& omega, double gamma, double mesh);

/// (1 + n^{gamma/2}) d_n + int_0^{T/n} omega_n(r)/r^{1+gamma/2} dr.
double sequence_envelope(const ModulusProfile& omega_n, double gamma, int n, double d_n);

struct StudyRow {
  int m = 0;
  double mesh = 0.0;
  double d_lambda = 0.0;
  double err_mr2_vvp = 0.0;
  double err_mr2_vh = 0.0;
  double err_sup_h = 0.0;
  double err_sup_v = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;       ///< largest error column / envelope
  double runtime_ms = 0.0;
  double h1_h = 0.0;        ///< ||u_L||_{H1(0,T;H)}
  bool ok = true;
  std::string status = "ok";
};

struct StudyData {
  TimeFunction f;
  Vector u0;
};

struct StudyOptions {
  int cells = 0;        ///< study grid; 0 uses the finest ladder entry so knots fall on nodes
  int gauss_order = 4;
  int substeps = 4;     ///< oracle substeps for the approximate problems
  std::string method = "at";  ///< "at" or "oracle" for the approximate problems
  ATOptions at;
  int quad_order = 8;   ///< averaging rule of the affine construction
};

struct StudyResult {
  std::vector<StudyRow> rows;
  double data_norm = 0.0;         ///< ||f||_{L2(0,T;H)} + ||u0||_V
  double data_norm_dual = 0.0;    ///< ||f||_{L2(0,T;V')} + ||u0||_H
  double reference_error = 0.0;   ///< reference vs doubled reference, MR2(V,H)
  bool reference_ok = true;       ///< reference error below 10% of the smallest study error
  double fitted_constant = 0.0;   ///< from the coarse half of the ladder
  bool dominance_passed = true;   ///< fine-half ratios within 1.1 of the fitted constant
  bool any_failed = false;
};

/// Builds the affine approximation for each m, solves it, and compares with
/// an oracle reference at 8x the substeps (checked against 16x). Rows whose
/// solve fails are marked and the study continues. Refuses a modulus that
/// fails the Dini condition.
StudyResult convergence_study(const FormPath& fp, const ModulusProfile& omega, double gamma,
                              const std::vector<int>& ladder, const StudyData& data, const StudyOptions& options);

struct RateFit {
  double mr2_vvp = 0.0;
  double mr2_vh = 0.0;
  double sup_h = 0.0;
  double sup_v = 0.0;
  bool noise_floor = false;  ///< every error below 1e-8, slopes meaningless
};

/// Least-squares slopes of log(error) against log(mesh) over successful rows.
RateFit rate_fit(const std::vector<StudyRow>& rows);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct UniformityResult {
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  bool passed = false;  ///< max < 3 median
};

/// Error-to-envelope ratios over a batch of data at a single m, each divided
/// by ||f||_{L2(0,T;H)} + ||u0||_V.
UniformityResult uniformity_check(const FormPath& fp, const ModulusProfile& omega, double gamma, int m,
                                  const std::vector<StudyData>& batch, const StudyOptions& options);

/// Random data f(t) = a + b t, u0 with complex Gaussian coordinates,
/// normalized so ||f||_{L2(0,T;H)} + ||u0||_V = 1.
std::vector<StudyData> random_data_batch(const SpacePair& sp, double horizon, int count, std::uint64_t seed);

struct WeakStrongReport {
  bool passed = false;
  double h1_spread = 0.0;      ///< max / min of ||u_L||_{H1(0,T;H)} along the ladder
  double finest_error = 0.0;   ///< max(err_mr2_vh, err_sup_v) at the finest mesh
  bool errors_vanish = false;
  std::string note;
};

/// Bounded H1(0,T;H) norms (spread < 3) next to vanishing strong errors
/// (finest error below `strong_tol`).
WeakStrongReport weak_vs_strong_report(const std::vector<StudyRow>& rows, double strong_tol = 1e-4);

/// CSV with 12 significant digits; runtime_ms is written as 0 unless
/// `timing`, which keeps output byte-identical between runs.
void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows, bool timing = false);

}  // namespace fapprox
