#pragma once

#include <vector>

#include "fapprox/forms.hpp"

namespace fapprox {

// Space generators.
SpacePairPtr identity_space(int dim);
SpacePairPtr diagonal_space(const std::vector<double>& h_diag, const std::vector<double>& v_diag);
/// Galerkin pair of the Dirichlet Laplacian on (0, pi) in its sine basis:
/// G_H = I, G_V = I + diag(k^2), k = 1..modes.
SpacePairPtr spectral_laplacian_1d(int modes);

// Builtin form families. "Scalar" families multiply the V inner product,
// A(t) = c(t) G_V, which is the scalar coefficient c(t) when N = 1.

/// c(t) = sum_i coeffs[i] t^i.
FormPath scalar_poly(SpacePairPtr space, double horizon, std::vector<Complex> coeffs);

/// c(t) = a + b t^eta.
FormPath scalar_power(SpacePairPtr space, double horizon, Complex a, Complex b, double eta);

struct HeatParams {
  double kappa_a = 1.0;
  double kappa_b = 1.0;
  double kappa_eta = 0.75;
  double potential0 = 0.0;
  double potential1 = 0.0;
};

/// A(t) = kappa(t) (G_V - G_H) + p(t) G_H with kappa(t) = a + b t^eta and p(t) = p0 + p1 t.
FormPath spectral_heat(SpacePairPtr space, double horizon, const HeatParams& params);

struct RotatingParams {
  std::vector<Complex> diag;  ///< eigenvalues of the conjugated diagonal, Re > 0
  double rate = 1.0;
  double eta = 1.0;
};

/// A(t) = W_V* U(t) D U(t)* W_V with U(t) = exp(rate t^eta J), J the real skew
/// tridiagonal generator. The form is V-coercive with alpha = min Re d and M = max |d|.
FormPath rotating_mix(SpacePairPtr space, double horizon, const RotatingParams& params);

/// Piecewise-linear interpolation of sampled form matrices.
FormPath table_path(SpacePairPtr space, double horizon, std::vector<double> times, std::vector<Matrix> matrices);

FormPath autonomous(SpacePairPtr space, double horizon, Matrix form);

}  // namespace fapprox
