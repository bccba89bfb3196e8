#pragma once

#include <vector>

#include "fapprox/forms.hpp"
#include "fapprox/report.hpp"

namespace fapprox {

/// Angles and truncation for the sector sweeps and the contour integral.
///
/// theta is the holomorphy angle pi/2 - arctan(M/alpha). The spectrum of the
/// shifted operator lies in the numerical-range sector |arg z| <= pi/2 - theta,
/// so the resolvent is sampled on the rays arg(lambda) = pi and
/// +-(pi - (theta + phi)/2) with phi in (theta, pi/2). The contour for
/// e^{-sB} runs along arg(z - z0) = +-contour_angle with
/// contour_angle in (pi/2 - theta, pi/2).
struct SectorSpec {
  double theta = 0.0;
  double phi = 0.0;
  double contour_angle = 0.0;
  double radius_cap = 50.0;  ///< the tail is cut where s Re(z - z0) = radius_cap
  int contour_points = 400;  ///< from_theta raises this to 100 tan(contour_angle) for flat sectors

  /// Defaults phi = (theta + pi/2)/2 and contour_angle = pi/2 - theta/2.
  static SectorSpec from_theta(double theta);
  void validate() const;
};

/// (lambda I - B)^{-1} with B = G_H^{-1} A. Throws InvalidInput when lambda I - B
/// is numerically singular; the message carries the condition estimate.
Matrix resolvent(const SpacePair& sp, const Matrix& form, Complex lambda);

/// True when lambda lies in the open sector |arg lambda| < half_angle.
bool in_sector(Complex lambda, double half_angle);

/// exp(-s B) with B = G_H^{-1} A by scaling and squaring with a Pade kernel.
Matrix semigroup_value(const SpacePair& sp, const Matrix& form, double s);

/// Same for a precomputed H operator.
Matrix semigroup_of(const Matrix& h_operator, double s);

/// Relative deviation between the truncated contour quadrature of
/// (1/2 pi i) int e^{-sz} (z - B)^{-1} dz and semigroup_value. `beta` locates
/// the contour vertex at z0 = -beta - 1/s, to the left of the spectrum.
double contour_check(const SpacePair& sp, const Matrix& form, double s, const SectorSpec& spec, double beta = 0.0);

/// contour_check wrapped as a report that fails above 1e-6.
EstimateReport contour_report(const SpacePair& sp, const Matrix& form, double s, const SectorSpec& spec,
                              double beta = 0.0);

struct SectorSweepOptions {
  std::vector<double> t_samples;     ///< frozen times; defaults to 0, T/2, T
  std::vector<double> ray_angles;    ///< overrides the three default rays
  int lambda_count = 40;             ///< log radii in [1e-2, 1e4]
  int lambda_refined = 79;
  int s_count = 61;                  ///< log grid in [1e-6, 1e3], contains s = 1
  int s_refined = 121;
};

/// Empirical constants of the ten frozen-time estimates, computed on the
/// shifted operator B(t) + beta:
///   1-5  resolvent norms V'_g->H, V->V, H->V, V'->H, V'_g->V times
///        (1+|l|)^{1-g/2}, (1+|l|), (1+|l|)^{1/2}, (1+|l|)^{1/2}, (1+|l|)^{(1-g)/2};
///   6-10 e^{-sB} norms V'_g->H, V'_g->V, V'->V times s^{g/2}, s^{(1+g)/2}, s^{1/2};
///        s ||B e^{-sB}||_H and ||e^{-sB}||_V.
/// A report passes when its supremum is finite and the refined sweep stays
/// within 1.05 of the coarse one.
std::vector<EstimateReport> verify_sector_estimates(const FormPath& fp, const FormConstants& constants,
                                                    const SectorSpec& spec, const SectorSweepOptions& options = {});

}  // namespace fapprox
