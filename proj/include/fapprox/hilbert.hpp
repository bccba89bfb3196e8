#pragma once

#include <memory>

#include "fapprox/types.hpp"

namespace fapprox {

/// Coordinate realization of a Hilbert couple V -> H.
///
/// The H and V inner products are (u, v)_H = v* G_H u and (u, v)_V = v* G_V u.
/// The scale operator S with (u, v)_V = (S u, v)_H is diagonalized by the
/// H-orthonormal basis `scale_basis`, S = Phi diag(s) Phi^{-1}. The scale
/// V_sigma for sigma in [-1, 1] carries the norm (sum_j s_j^sigma |c_j|^2)^{1/2}
/// where c = Phi^{-1} u; negative sigma gives the dual scales with H as pivot.
class SpacePair {
 public:
  int dim() const { return static_cast<int>(gram_h_.rows()); }
  const Matrix& gram_h() const { return gram_h_; }
  const Matrix& gram_v() const { return gram_v_; }
  const RealVector& scale_eigs() const { return scale_eigs_; }
  const Matrix& scale_basis() const { return scale_basis_; }
  double c_h() const { return c_h_; }

  /// Coefficients of u in the H-orthonormal eigenbasis of S.
  Vector scale_coefficients(const Vector& u) const;

  /// W_sigma with ||u||_sigma = |W_sigma u|_2.
  Matrix weight(double sigma) const;
  /// Inverse of weight(sigma).
  Matrix weight_inverse(double sigma) const;

  /// G_H^{-1} x (maps a form/functional into H coordinates).
  Vector h_solve(const Vector& x) const;
  Matrix h_solve(const Matrix& x) const;
  const Matrix& gram_h_inverse() const { return gram_h_inv_; }

  /// Norm of an H-coordinate operator from V_{sigma_in} to V_{sigma_out}.
  double operator_norm(const Matrix& op, double sigma_in, double sigma_out) const;

  double h_norm(const Vector& u) const;
  double v_norm(const Vector& u) const;

 private:
  friend std::shared_ptr<const SpacePair> build_space_pair(const Matrix&, const Matrix&);
  SpacePair() = default;

  Matrix gram_h_;
  Matrix gram_v_;
  Matrix gram_h_inv_;
  RealVector scale_eigs_;
  Matrix scale_basis_;
  Matrix scale_basis_inv_;
  double c_h_ = 1.0;
};

using SpacePairPtr = std::shared_ptr<const SpacePair>;

/// Solves the generalized Hermitian eigenproblem G_V x = s G_H x.
/// Throws InvalidInput for non-Hermitian (relative defect > 1e-10),
/// non-positive-definite, or mismatched inputs.
SpacePairPtr build_space_pair(const Matrix& gram_h, const Matrix& gram_v);

/// (sum_j s_j^sigma |c_j|^2)^{1/2}; sigma = -1 is the V' norm.
double scale_norm(const SpacePair& sp, const Vector& u, double sigma);

/// sup |v* A u| / (||u||_V ||v||_{V_{|sigma|}}) for the form matrix A.
/// sigma = -1 gives the L(V, V') norm, sigma = -gamma the L(V, V'_gamma) norm.
double form_operator_norm(const SpacePair& sp, const Matrix& form, double out_scale);

/// form_operator_norm with the scale weights factored once, for repeated use.
class FormNorm {
 public:
  FormNorm(const SpacePair& sp, double out_scale);
  double operator()(const Matrix& form) const;

 private:
  Matrix left_;
  Matrix right_;
};

/// Largest singular value of a small dense matrix.
double spectral_norm(const Matrix& m);

}  // namespace fapprox
