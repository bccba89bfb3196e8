#include "fapprox/hilbert.hpp"

#include <cmath>

namespace fapprox {

namespace {

constexpr double kHermitianTolerance = 1e-10;

void require_hermitian_pd(const Matrix& g, const char* name) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw InvalidInput(std::string(name) + " must be a non-empty square matrix");
  }
  const double scale = g.norm();
  if (!std::isfinite(scale)) throw InvalidInput(std::string(name) + " has non-finite entries");
  if ((g - g.adjoint()).norm() > kHermitianTolerance * scale) {
    throw InvalidInput(std::string(name) + " is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (g + g.adjoint()), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidInput(std::string(name) + " is not positive definite");
  }
}

}  // namespace

SpacePairPtr build_space_pair(const Matrix& gram_h, const Matrix& gram_v) {
  require_hermitian_pd(gram_h, "gram_H");
  require_hermitian_pd(gram_v, "gram_V");
  if (gram_h.rows() != gram_v.rows()) throw InvalidInput("gram_H and gram_V differ in size");

  auto sp = std::shared_ptr<SpacePair>(new SpacePair());
  sp->gram_h_ = 0.5 * (gram_h + gram_h.adjoint());
  sp->gram_v_ = 0.5 * (gram_v + gram_v.adjoint());

  // Cholesky reduction: G_H = L L*, C = L^{-1} G_V L^{-*}, Phi = L^{-*} Y.
  Eigen::LLT<Matrix> llt(sp->gram_h_);
  if (llt.info() != Eigen::Success) throw InvalidInput("gram_H Cholesky factorization failed");
  const Matrix lower = llt.matrixL();
  const Matrix lower_inv = lower.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(gram_h.rows(), gram_h.cols()));
  const Matrix reduced = lower_inv * sp->gram_v_ * lower_inv.adjoint();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (reduced + reduced.adjoint()));
  if (eig.info() != Eigen::Success) throw NumericalFailure("scale eigenproblem did not converge");
  if (eig.eigenvalues().minCoeff() <= 0.0) throw InvalidInput("scale operator is not positive");

  sp->scale_eigs_ = eig.eigenvalues();
  sp->scale_basis_ = lower_inv.adjoint() * eig.eigenvectors();
  sp->scale_basis_inv_ = sp->scale_basis_.adjoint() * sp->gram_h_;
  sp->gram_h_inv_ = llt.solve(Matrix::Identity(gram_h.rows(), gram_h.cols()));
  sp->c_h_ = std::sqrt(1.0 / sp->scale_eigs_.minCoeff());
  return sp;
}

Vector SpacePair::scale_coefficients(const Vector& u) const { return scale_basis_inv_ * u; }

Matrix SpacePair::weight(double sigma) const {
  const RealVector w = scale_eigs_.array().pow(0.5 * sigma);
  return w.cast<Complex>().asDiagonal() * scale_basis_inv_;
}

Matrix SpacePair::weight_inverse(double sigma) const {
  const RealVector w = scale_eigs_.array().pow(-0.5 * sigma);
  return scale_basis_ * w.cast<Complex>().asDiagonal();
}

Vector SpacePair::h_solve(const Vector& x) const { return gram_h_inv_ * x; }
Matrix SpacePair::h_solve(const Matrix& x) const { return gram_h_inv_ * x; }

double SpacePair::operator_norm(const Matrix& op, double sigma_in, double sigma_out) const {
  if (op.rows() != dim() || op.cols() != dim()) throw InvalidInput("operator dimension mismatch");
  return spectral_norm(weight(sigma_out) * op * weight_inverse(sigma_in));
}

double SpacePair::h_norm(const Vector& u) const {
  return std::sqrt(std::max(0.0, u.dot(gram_h_ * u).real()));
}

double SpacePair::v_norm(const Vector& u) const {
  return std::sqrt(std::max(0.0, u.dot(gram_v_ * u).real()));
}

double scale_norm(const SpacePair& sp, const Vector& u, double sigma) {
  if (std::abs(sigma) > 1.0) throw InvalidInput("scale exponent must lie in [-1, 1]");
  if (u.size() != sp.dim()) throw InvalidInput("vector dimension mismatch");
  const Vector c = sp.scale_coefficients(u);
  double sum = 0.0;
  for (int j = 0; j < c.size(); ++j) sum += std::pow(sp.scale_eigs()(j), sigma) * std::norm(c(j));
  return std::sqrt(sum);
}

double form_operator_norm(const SpacePair& sp, const Matrix& form, double out_scale) {
  if (out_scale < -1.0 || out_scale > 0.0) throw InvalidInput("output scale must lie in [-1, 0]");
  if (form.rows() != sp.dim() || form.cols() != sp.dim()) {
    throw InvalidInput("form dimension mismatch");
  }
  return sp.operator_norm(sp.h_solve(form), 1.0, out_scale);
}

FormNorm::FormNorm(const SpacePair& sp, double out_scale) {
  if (out_scale < -1.0 || out_scale > 0.0) throw InvalidInput("output scale must lie in [-1, 0]");
  left_ = sp.weight(out_scale) * sp.gram_h_inverse();
  right_ = sp.weight_inverse(1.0);
}

double FormNorm::operator()(const Matrix& form) const {
  if (form.rows() != left_.cols() || form.cols() != right_.rows()) throw InvalidInput("form dimension mismatch");
  return spectral_norm(left_ * form * right_);
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace fapprox
