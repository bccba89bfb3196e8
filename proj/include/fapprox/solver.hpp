#pragma once

#include <memory>
#include <vector>

#include "fapprox/discretization.hpp"
#include "fapprox/forms.hpp"

namespace fapprox {

/// Implicit reference solver: Crank-Nicolson on G_H u' + A(t) u = G_H f over
/// every node-to-Gauss-point interval, `substeps` steps each, followed by one
/// Richardson extrapolation against the doubled step count.
Trajectory oracle_solve(const FormPath& fp, const TimeFunction& f, const Vector& u0, const TimeGrid& grid,
                        int substeps);

/// Samples of a function on the grid: at the nodes and at the Gauss points.
struct Fragment {
  std::vector<Vector> nodes;
  std::vector<Vector> colloc;
};

/// Values of a time function at every abscissa used by an ATKernel.
struct PointValues {
  std::vector<Vector> shared;
  std::vector<std::vector<Vector>> near;
  std::vector<Vector> colloc;
};

/// Frozen-time integral operators on a grid.
///
/// Targets are the Gauss points and the nodes. For a target t every cell left
/// of t is integrated with 8-point Gauss pieces; the two cells next to t are
/// refined geometrically toward t and the first cell toward 0, down to width
/// 1e-4 T. Sources are represented by the Lagrange interpolant of their
/// Gauss-point samples in each cell. Frozen exponentials use the
/// eigendecomposition B(t) = X diag(l) X^{-1}; an eigenvector basis with
/// condition number above 1e10 is rejected.
class ATKernel {
 public:
  ATKernel(const FormPath& fp, const TimeGrid& grid);
  ~ATKernel();
  ATKernel(ATKernel&&) noexcept;

  const TimeGrid& grid() const;
  PointValues sample(const TimeFunction& g) const;

  /// e^{-t B(t)} u0.
  Fragment propagate(const Vector& u0) const;
  /// int_0^t e^{-(t-s) B(t)} g(s) ds with g sampled exactly.
  Fragment integrate(const PointValues& g) const;
  /// int_0^t e^{-(t-s) B(t)} (B(t) - B(s)) h(s) ds. When `exact` is given, h is
  /// represented as exact + interpolant of (h - exact) at the Gauss points.
  Fragment apply_P(const std::vector<Vector>& colloc, const PointValues* exact = nullptr) const;
  /// (B(t)+mu) int_0^t e^{-(t-s)(B(t)+mu)} (B(t) - B(s)) (B(s)+mu)^{-1} g(s) ds.
  Fragment apply_Q(double mu, const std::vector<Vector>& colloc) const;

  /// Dense matrix of apply_Q restricted to the Gauss-point targets, in
  /// N x N blocks indexed (target, source).
  Matrix assemble_Q(double mu) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Fragment at_u1(const FormPath& fp, const TimeGrid& grid, const Vector& u0);
Fragment at_u2(const FormPath& fp, const TimeGrid& grid, const TimeFunction& f);
Fragment apply_P(const FormPath& fp, const TimeGrid& grid, const std::vector<Vector>& h_colloc);
Fragment apply_Q(const FormPath& fp, double mu, const TimeGrid& grid, const std::vector<Vector>& g_colloc);

struct QNormEstimate {
  double value = 0.0;
  bool coarse = false;  ///< power iteration did not settle; value is the Frobenius bound
  int iterations = 0;
};

/// L2(0,T;H) operator norm of the discrete Q^mu on `grid` by power iteration
/// (30 iterations, relative tolerance 1e-6).
QNormEstimate q_norm_estimate(const FormPath& fp, double mu, const TimeGrid& grid);

struct ATOptions {
  double mu_cap = 1280.0;
  double tol = 1e-11;   ///< relative increment in the discrete C([0,T];H) norm
  int max_iter = 200;
  int q_cells = 32;     ///< grid of the contraction estimate
  int q_order = 2;
  double mu = -1.0;     ///< fixed shift; negative runs the ladder 0, 10, 20, 40, ...
};

/// Fixed-point solve of the representation formula
///   u = e^{-tB(t)} u0 + int e^{-(t-s)B(t)} f + int e^{-(t-s)B(t)} (B(t)-B(s)) u.
/// The shift mu only weights the contraction estimate: the shifted fixed-point
/// map coincides with the unshifted one after the change of unknown e^{-mu t} u.
/// Throws NumericalFailure "no contraction; refine grid or raise mu cap" when
/// q >= 0.95 at every ladder shift, and on exceeding max_iter.
Trajectory at_solve(const FormPath& fp, const TimeFunction& f, const Vector& u0, const TimeGrid& grid,
                    const ATOptions& options = {});

/// Shift ladder used by at_solve: 0, then 10 * 2^k up to the cap.
std::vector<double> mu_ladder(double mu_cap);

/// Fills the derivatives of a trajectory from u' = f - B(t) u.
void fill_derivatives(const FormPath& fp, const TimeFunction& f, Trajectory& traj);

}  // namespace fapprox
