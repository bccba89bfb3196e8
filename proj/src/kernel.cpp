#include <cmath>
#include <random>

#include "fapprox/parallel.hpp"
#include "fapprox/quadrature.hpp"
#include "fapprox/solver.hpp"

namespace fapprox {

namespace {

constexpr int kPieceOrder = 8;
constexpr double kMinWidthFraction = 1e-4;
constexpr double kMaxEigenCondition = 1e10;
constexpr std::size_t kNearCacheBytes = std::size_t(256) << 20;

struct QuadPoint {
  double s;
  double w;
  int cell;
  std::vector<double> basis;
};

struct Target {
  double t;
  int cell;
  int far_end;  // cells [0, far_end) use the shared points
  Matrix X;
  Matrix Xinv;
  Vector lam;
  std::vector<QuadPoint> near;
  std::vector<Matrix> near_ops;  // B(s) at the near points, when cached
};

}  // namespace

struct ATKernel::Impl {
  FormPath fp;
  TimeGrid grid;
  int n;
  int p;
  std::vector<std::vector<double>> colloc_pts;
  std::vector<QuadPoint> shared;
  std::vector<int> shared_begin;
  std::vector<Matrix> shared_ops;
  std::vector<Target> targets;  // Gauss points c * p + l, then nodes 1..K

  Impl(const FormPath& f, const TimeGrid& g) : fp(f), grid(g), n(f.space().dim()), p(g.order()) {
    const double min_width = kMinWidthFraction * grid.horizon();
    for (int c = 0; c < grid.cells(); ++c) colloc_pts.push_back(grid.colloc_points(c));

    auto add_pieces = [&](std::vector<QuadPoint>& out, int cell, double a, double b, bool left, bool right) {
      for (const auto& [pa, pb] : graded_cells(a, b, left, right, min_width)) {
        const QuadratureRule rule = gauss_legendre(kPieceOrder, pa, pb);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          out.push_back({rule.nodes[q], rule.weights[q], cell, lagrange_basis(colloc_pts[cell], rule.nodes[q])});
        }
      }
    };

    for (int c = 0; c < grid.cells(); ++c) {
      shared_begin.push_back(static_cast<int>(shared.size()));
      add_pieces(shared, c, grid.left(c), grid.right(c), c == 0, false);
    }
    shared_begin.push_back(static_cast<int>(shared.size()));
    shared_ops.resize(shared.size());
    parallel_for(shared.size(), [&](std::size_t q) { shared_ops[q] = fp.h_operator(shared[q].s); });

    for (int c = 0; c < grid.cells(); ++c) {
      for (int l = 0; l < p; ++l) targets.push_back({grid.colloc(c, l), c, 0, {}, {}, {}, {}, {}});
    }
    for (int i = 1; i <= grid.cells(); ++i) targets.push_back({grid.nodes()[i], i - 1, 0, {}, {}, {}, {}, {}});

    std::size_t near_total = 0;
    for (Target& tg : targets) {
      const int c = tg.cell;
      tg.far_end = std::max(0, c - 1);
      if (c >= 1) add_pieces(tg.near, c - 1, grid.left(c - 1), grid.right(c - 1), c - 1 == 0, true);
      if (tg.t > grid.left(c)) add_pieces(tg.near, c, grid.left(c), tg.t, c == 0, true);
      near_total += tg.near.size();
    }
    const bool cache = near_total * std::size_t(n) * std::size_t(n) * sizeof(Complex) <= kNearCacheBytes;

    parallel_for(targets.size(), [&](std::size_t i) {
      Target& tg = targets[i];
      const Matrix b = fp.h_operator(tg.t);
      Eigen::ComplexEigenSolver<Matrix> eig(b);
      if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition of the frozen operator failed");
      tg.X = eig.eigenvectors();
      tg.lam = eig.eigenvalues();
      Eigen::JacobiSVD<Matrix> svd(tg.X);
      const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
      if (!(cond <= kMaxEigenCondition)) {
        throw NumericalFailure("frozen operator at t=" + std::to_string(tg.t) +
                               " is not diagonalizable to working accuracy");
      }
      tg.Xinv = tg.X.partialPivLu().inverse();
      if (cache) {
        tg.near_ops.resize(tg.near.size());
        for (std::size_t j = 0; j < tg.near.size(); ++j) tg.near_ops[j] = fp.h_operator(tg.near[j].s);
      }
    });
  }

  Matrix near_op(const Target& tg, std::size_t j) const {
    return tg.near_ops.empty() ? fp.h_operator(tg.near[j].s) : tg.near_ops[j];
  }

  int shared_count(const Target& tg) const { return shared_begin[tg.far_end]; }

  Vector interp(const std::vector<Vector>& colloc, const QuadPoint& qp) const {
    Vector v = Vector::Zero(n);
    for (int l = 0; l < p; ++l) v += qp.basis[l] * colloc[qp.cell * p + l];
    return v;
  }

  // Sum over the target's abscissae of weight(k, q) * Y(k, q), mapped back by X.
  template <class Weight>
  Vector contract(const Target& tg, const Matrix& Y, Weight&& weight) const {
    const int ns = shared_count(tg);
    Vector acc = Vector::Zero(n);
    for (int q = 0; q < Y.cols(); ++q) {
      const QuadPoint& qp = q < ns ? shared[q] : tg.near[q - ns];
      for (int k = 0; k < n; ++k) acc(k) += weight(tg.lam(k), tg.t - qp.s) * qp.w * Y(k, q);
    }
    return tg.X * acc;
  }

  Fragment scatter(const std::vector<Vector>& out, const Vector& first) const {
    Fragment frag;
    const int nc = grid.colloc_count();
    frag.colloc.assign(out.begin(), out.begin() + nc);
    frag.nodes.push_back(first);
    frag.nodes.insert(frag.nodes.end(), out.begin() + nc, out.end());
    return frag;
  }
};

ATKernel::ATKernel(const FormPath& fp, const TimeGrid& grid) : impl_(std::make_unique<Impl>(fp, grid)) {}
ATKernel::~ATKernel() = default;
ATKernel::ATKernel(ATKernel&&) noexcept = default;

const TimeGrid& ATKernel::grid() const { return impl_->grid; }

PointValues ATKernel::sample(const TimeFunction& g) const {
  const Impl& im = *impl_;
  PointValues pv;
  pv.shared.resize(im.shared.size());
  parallel_for(im.shared.size(), [&](std::size_t q) { pv.shared[q] = g(im.shared[q].s); });
  pv.near.resize(im.targets.size());
  parallel_for(im.targets.size(), [&](std::size_t i) {
    for (const QuadPoint& qp : im.targets[i].near) pv.near[i].push_back(g(qp.s));
  });
  for (int c = 0; c < im.grid.cells(); ++c) {
    for (int l = 0; l < im.p; ++l) pv.colloc.push_back(g(im.grid.colloc(c, l)));
  }
  return pv;
}

Fragment ATKernel::propagate(const Vector& u0) const {
  const Impl& im = *impl_;
  if (u0.size() != im.n) throw InvalidInput("initial value dimension mismatch");
  std::vector<Vector> out(im.targets.size());
  parallel_for(im.targets.size(), [&](std::size_t i) {
    const Target& tg = im.targets[i];
    Vector c = tg.Xinv * u0;
    for (int k = 0; k < im.n; ++k) c(k) *= std::exp(-tg.t * tg.lam(k));
    out[i] = tg.X * c;
  });
  return im.scatter(out, u0);
}

Fragment ATKernel::integrate(const PointValues& g) const {
  const Impl& im = *impl_;
  std::vector<Vector> out(im.targets.size());
  parallel_for(im.targets.size(), [&](std::size_t i) {
    const Target& tg = im.targets[i];
    const int ns = im.shared_count(tg);
    Matrix G(im.n, ns + static_cast<int>(tg.near.size()));
    for (int q = 0; q < ns; ++q) G.col(q) = g.shared[q];
    for (std::size_t j = 0; j < tg.near.size(); ++j) G.col(ns + j) = g.near[i][j];
    out[i] = im.contract(tg, tg.Xinv * G, [](Complex l, double tau) { return std::exp(-tau * l); });
  });
  return im.scatter(out, Vector::Zero(im.n));
}

Fragment ATKernel::apply_P(const std::vector<Vector>& colloc, const PointValues* exact) const {
  const Impl& im = *impl_;
  if (static_cast<int>(colloc.size()) != im.grid.colloc_count()) throw InvalidInput("source sample count mismatch");
  std::vector<Vector> rem = colloc;
  if (exact) {
    for (std::size_t i = 0; i < rem.size(); ++i) rem[i] -= exact->colloc[i];
  }
  std::vector<Vector> su(im.shared.size()), sr(im.shared.size());
  parallel_for(im.shared.size(), [&](std::size_t q) {
    su[q] = im.interp(rem, im.shared[q]);
    if (exact) su[q] += exact->shared[q];
    sr[q] = im.shared_ops[q] * su[q];
  });
  std::vector<Vector> out(im.targets.size());
  parallel_for(im.targets.size(), [&](std::size_t i) {
    const Target& tg = im.targets[i];
    const int ns = im.shared_count(tg);
    const int nq = ns + static_cast<int>(tg.near.size());
    Matrix U(im.n, nq), R(im.n, nq);
    for (int q = 0; q < ns; ++q) {
      U.col(q) = su[q];
      R.col(q) = sr[q];
    }
    for (std::size_t j = 0; j < tg.near.size(); ++j) {
      Vector u = im.interp(rem, tg.near[j]);
      if (exact) u += exact->near[i][j];
      U.col(ns + j) = u;
      R.col(ns + j) = im.near_op(tg, j) * u;
    }
    const Matrix Y = tg.lam.asDiagonal() * (tg.Xinv * U) - tg.Xinv * R;
    out[i] = im.contract(tg, Y, [](Complex l, double tau) { return std::exp(-tau * l); });
  });
  return im.scatter(out, Vector::Zero(im.n));
}

Fragment ATKernel::apply_Q(double mu, const std::vector<Vector>& colloc) const {
  const Impl& im = *impl_;
  if (mu < 0.0) throw InvalidInput("shift must be nonnegative");
  if (static_cast<int>(colloc.size()) != im.grid.colloc_count()) throw InvalidInput("source sample count mismatch");
  const Matrix eye = Matrix::Identity(im.n, im.n);
  auto shifted_solve = [&](const Matrix& b, const Vector& g) {
    Eigen::FullPivLU<Matrix> lu(b + mu * eye);
    if (!lu.isInvertible()) throw InvalidInput("B(s) + mu is singular");
    return Vector(lu.solve(g));
  };
  std::vector<Vector> sx(im.shared.size()), sr(im.shared.size());
  parallel_for(im.shared.size(), [&](std::size_t q) {
    sx[q] = shifted_solve(im.shared_ops[q], im.interp(colloc, im.shared[q]));
    sr[q] = im.shared_ops[q] * sx[q];
  });
  std::vector<Vector> out(im.targets.size());
  parallel_for(im.targets.size(), [&](std::size_t i) {
    const Target& tg = im.targets[i];
    const int ns = im.shared_count(tg);
    const int nq = ns + static_cast<int>(tg.near.size());
    Matrix U(im.n, nq), R(im.n, nq);
    for (int q = 0; q < ns; ++q) {
      U.col(q) = sx[q];
      R.col(q) = sr[q];
    }
    for (std::size_t j = 0; j < tg.near.size(); ++j) {
      const Matrix b = im.near_op(tg, j);
      const Vector x = shifted_solve(b, im.interp(colloc, tg.near[j]));
      U.col(ns + j) = x;
      R.col(ns + j) = b * x;
    }
    const Matrix Y = tg.lam.asDiagonal() * (tg.Xinv * U) - tg.Xinv * R;
    out[i] = im.contract(tg, Y, [mu](Complex l, double tau) { return (l + mu) * std::exp(-tau * (l + mu)); });
  });
  return im.scatter(out, Vector::Zero(im.n));
}

Matrix ATKernel::assemble_Q(double mu) const {
  const Impl& im = *impl_;
  if (mu < 0.0) throw InvalidInput("shift must be nonnegative");
  const int n = im.n;
  const int nc = im.grid.colloc_count();
  const Matrix eye = Matrix::Identity(n, n);
  auto shifted_inverse = [&](const Matrix& b) {
    Eigen::FullPivLU<Matrix> lu(b + mu * eye);
    if (!lu.isInvertible()) throw InvalidInput("B(s) + mu is singular");
    return Matrix(lu.inverse());
  };
  // (B(s) + mu)^{-1} and B(s) (B(s) + mu)^{-1} at the shared points.
  std::vector<Matrix> s_inv(im.shared.size()), s_prod(im.shared.size());
  parallel_for(im.shared.size(), [&](std::size_t q) {
    s_inv[q] = shifted_inverse(im.shared_ops[q]);
    s_prod[q] = im.shared_ops[q] * s_inv[q];
  });
  Matrix K = Matrix::Zero(static_cast<Eigen::Index>(nc) * n, static_cast<Eigen::Index>(nc) * n);
  parallel_for(static_cast<std::size_t>(nc), [&](std::size_t i) {
    const Target& tg = im.targets[i];
    const Matrix lx = tg.lam.asDiagonal() * tg.Xinv;
    std::vector<Matrix> blocks(nc, Matrix::Zero(n, n));
    auto add = [&](const QuadPoint& qp, const Matrix& inv, const Matrix& prod) {
      Matrix G = lx * inv - tg.Xinv * prod;
      const double tau = tg.t - qp.s;
      for (int k = 0; k < n; ++k) {
        const Complex lm = tg.lam(k) + mu;
        G.row(k) *= qp.w * lm * std::exp(-tau * lm);
      }
      for (int l = 0; l < im.p; ++l) blocks[qp.cell * im.p + l] += qp.basis[l] * G;
    };
    const int ns = im.shared_count(tg);
    for (int q = 0; q < ns; ++q) add(im.shared[q], s_inv[q], s_prod[q]);
    for (std::size_t j = 0; j < tg.near.size(); ++j) {
      const Matrix b = im.near_op(tg, j);
      const Matrix inv = shifted_inverse(b);
      add(tg.near[j], inv, b * inv);
    }
    for (int c = 0; c < nc; ++c) {
      K.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(c) * n, n, n) = tg.X * blocks[c];
    }
  });
  return K;
}

QNormEstimate q_norm_estimate(const FormPath& fp, double mu, const TimeGrid& grid) {
  const ATKernel kernel(fp, grid);
  const Matrix K = kernel.assemble_Q(mu);
  const SpacePair& sp = fp.space();
  const int n = sp.dim();
  const int nc = grid.colloc_count();
  const Matrix rh = sp.weight(0.0);
  const Matrix rh_inv = sp.weight_inverse(0.0);
  Matrix A(K.rows(), K.cols());
  for (int i = 0; i < nc; ++i) {
    const double wi = std::sqrt(grid.colloc_weight(i / grid.order(), i % grid.order()));
    for (int j = 0; j < nc; ++j) {
      const double wj = std::sqrt(grid.colloc_weight(j / grid.order(), j % grid.order()));
      A.block(i * n, j * n, n, n) = (wi / wj) * rh * K.block(i * n, j * n, n, n) * rh_inv;
    }
  }

  QNormEstimate est;
  if (A.norm() == 0.0) return est;
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  Vector x(A.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = Complex(normal(rng), normal(rng));
  x.normalize();
  double sigma = 0.0;
  for (int it = 1; it <= 30; ++it) {
    const Vector y = A * x;
    const double next = y.norm();
    est.iterations = it;
    if (it > 1 && std::abs(next - sigma) <= 1e-6 * next) {
      est.value = next;
      return est;
    }
    sigma = next;
    x = A.adjoint() * y;
    const double xn = x.norm();
    if (xn == 0.0) {
      est.value = sigma;
      return est;
    }
    x /= xn;
  }
  est.value = A.norm();
  est.coarse = true;
  return est;
}

}  // namespace fapprox
