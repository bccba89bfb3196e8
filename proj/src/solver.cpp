#include "fapprox/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fapprox/parallel.hpp"
#include "fapprox/semigroup.hpp"

namespace fapprox {

namespace {

// Sample times in grid order: node, Gauss points of the cell, ..., last node.
std::vector<double> sample_times(const TimeGrid& grid) {
  std::vector<double> ts;
  for (int c = 0; c < grid.cells(); ++c) {
    ts.push_back(grid.left(c));
    for (int l = 0; l < grid.order(); ++l) ts.push_back(grid.colloc(c, l));
  }
  ts.push_back(grid.horizon());
  return ts;
}

std::vector<Vector> crank_nicolson(const FormPath& fp, const TimeFunction& f, const Vector& u0,
                                   const std::vector<double>& ts, int substeps) {
  const SpacePair& sp = fp.space();
  const Matrix& gh = sp.gram_h();
  std::vector<Vector> out(ts.size());
  out[0] = u0;
  Vector u = u0;
  double t0 = ts[0];
  Matrix a0 = fp(t0);
  Vector gf0 = gh * f(t0);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double h = (ts[i] - ts[i - 1]) / substeps;
    for (int k = 1; k <= substeps; ++k) {
      const double t1 = k == substeps ? ts[i] : ts[i - 1] + h * k;
      const Matrix a1 = fp(t1);
      const Vector gf1 = gh * f(t1);
      const Matrix lhs = gh + 0.5 * h * a1;
      const Vector rhs = (gh - 0.5 * h * a0) * u + 0.5 * h * (gf0 + gf1);
      Eigen::PartialPivLU<Matrix> lu(lhs);
      u = lu.solve(rhs);
      if (!u.allFinite()) {
        std::ostringstream os;
        os << "implicit step matrix singular at t=" << t1;
        throw InvalidInput(os.str());
      }
      a0 = a1;
      gf0 = gf1;
      t0 = t1;
    }
    out[i] = u;
  }
  return out;
}

Trajectory from_samples(const TimeGrid& grid, const std::vector<Vector>& samples) {
  Trajectory traj(grid);
  std::size_t k = 0;
  for (int c = 0; c < grid.cells(); ++c) {
    traj.values.push_back(samples[k++]);
    for (int l = 0; l < grid.order(); ++l) traj.colloc_values.push_back(samples[k++]);
  }
  traj.values.push_back(samples[k]);
  return traj;
}

// e^{-s B} u0 through the eigendecomposition, with the Pade path as fallback.
Vector frozen_propagate(const Matrix& b, double s, const Vector& u0) {
  Eigen::ComplexEigenSolver<Matrix> eig(b);
  if (eig.info() == Eigen::Success) {
    const Matrix& x = eig.eigenvectors();
    Eigen::JacobiSVD<Matrix> svd(x);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 1e8 * sv(sv.size() - 1)) {
      Vector c = x.partialPivLu().solve(u0);
      for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(-s * eig.eigenvalues()(k));
      return x * c;
    }
  }
  return semigroup_of(b, s) * u0;
}

std::vector<Vector> combine(const Fragment& a, const Fragment& b, bool nodes) {
  const auto& x = nodes ? a.nodes : a.colloc;
  const auto& y = nodes ? b.nodes : b.colloc;
  std::vector<Vector> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return out;
}

}  // namespace

void fill_derivatives(const FormPath& fp, const TimeFunction& f, Trajectory& traj) {
  const TimeGrid& g = traj.grid;
  traj.derivatives.assign(traj.values.size(), Vector());
  traj.colloc_derivatives.assign(traj.colloc_values.size(), Vector());
  parallel_for(traj.values.size(), [&](std::size_t i) {
    const double t = g.nodes()[i];
    traj.derivatives[i] = f(t) - fp.h_operator(t) * traj.values[i];
  });
  parallel_for(traj.colloc_values.size(), [&](std::size_t i) {
    const double t = g.colloc(static_cast<int>(i) / g.order(), static_cast<int>(i) % g.order());
    traj.colloc_derivatives[i] = f(t) - fp.h_operator(t) * traj.colloc_values[i];
  });
}

Trajectory oracle_solve(const FormPath& fp, const TimeFunction& f, const Vector& u0, const TimeGrid& grid,
                        int substeps) {
  if (substeps < 1) throw InvalidInput("substeps must be at least 1");
  if (u0.size() != fp.space().dim()) throw InvalidInput("initial value dimension mismatch");
  const std::vector<double> ts = sample_times(grid);
  const std::vector<Vector> coarse = crank_nicolson(fp, f, u0, ts, substeps);
  const std::vector<Vector> fine = crank_nicolson(fp, f, u0, ts, 2 * substeps);
  std::vector<Vector> extrapolated(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) extrapolated[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  extrapolated[0] = u0;
  Trajectory traj = from_samples(grid, extrapolated);
  traj.provenance = "oracle";
  fill_derivatives(fp, f, traj);
  return traj;
}

Fragment at_u1(const FormPath& fp, const TimeGrid& grid, const Vector& u0) {
  return ATKernel(fp, grid).propagate(u0);
}

Fragment at_u2(const FormPath& fp, const TimeGrid& grid, const TimeFunction& f) {
  const ATKernel kernel(fp, grid);
  return kernel.integrate(kernel.sample(f));
}

Fragment apply_P(const FormPath& fp, const TimeGrid& grid, const std::vector<Vector>& h_colloc) {
  return ATKernel(fp, grid).apply_P(h_colloc);
}

Fragment apply_Q(const FormPath& fp, double mu, const TimeGrid& grid, const std::vector<Vector>& g_colloc) {
  return ATKernel(fp, grid).apply_Q(mu, g_colloc);
}

std::vector<double> mu_ladder(double mu_cap) {
  std::vector<double> ladder = {0.0};
  for (double mu = 10.0; mu <= mu_cap * (1.0 + 1e-12); mu *= 2.0) ladder.push_back(mu);
  return ladder;
}

Trajectory at_solve(const FormPath& fp, const TimeFunction& f, const Vector& u0, const TimeGrid& grid,
                    const ATOptions& options) {
  if (u0.size() != fp.space().dim()) throw InvalidInput("initial value dimension mismatch");
  if (options.max_iter < 1) throw InvalidInput("max_iter must be positive");
  const SpacePair& sp = fp.space();

  // Contraction estimate on a coarse grid.
  const TimeGrid qgrid = TimeGrid::uniform(fp.horizon(), options.q_cells, options.q_order);
  std::vector<double> ladder = options.mu >= 0.0 ? std::vector<double>{options.mu} : mu_ladder(options.mu_cap);
  double best_mu = -1.0, best_q = INFINITY;
  std::string last_error;
  for (double mu : ladder) {
    double q;
    try {
      q = q_norm_estimate(fp, mu, qgrid).value;
    } catch (const InvalidInput& e) {
      last_error = e.what();
      continue;
    }
    if (q < best_q) {
      best_q = q;
      best_mu = mu;
    }
    if (q < 0.5) break;
  }
  if (!(best_q < 0.95)) {
    std::ostringstream os;
    os << "no contraction; refine grid or raise mu cap (best q=" << best_q << " at mu=" << best_mu;
    if (!last_error.empty()) os << "; " << last_error;
    os << ")";
    throw NumericalFailure(os.str());
  }

  const ATKernel kernel(fp, grid);
  const PointValues u1_exact = kernel.sample([&](double s) { return frozen_propagate(fp.h_operator(s), s, u0); });
  const Fragment u1 = kernel.propagate(u0);
  const Fragment u2 = kernel.integrate(kernel.sample(f));
  const std::vector<Vector> base_colloc = combine(u1, u2, false);
  const std::vector<Vector> base_nodes = combine(u1, u2, true);

  std::vector<Vector> u = base_colloc;
  Fragment pu;
  int iterations = 0;
  for (int it = 1; it <= options.max_iter; ++it) {
    pu = kernel.apply_P(u, &u1_exact);
    double diff = 0.0, size = 0.0;
    std::vector<Vector> next(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      next[i] = base_colloc[i] + pu.colloc[i];
      diff = std::max(diff, sp.h_norm(next[i] - u[i]));
      size = std::max(size, sp.h_norm(next[i]));
    }
    u = std::move(next);
    iterations = it;
    if (diff <= options.tol * std::max(size, 1e-300)) break;
    if (it == options.max_iter) {
      std::ostringstream os;
      os << "fixed-point iteration did not converge in " << options.max_iter << " sweeps (last increment " << diff
         << ")";
      throw NumericalFailure(os.str());
    }
  }
  // Node values from the converged Gauss-point values.
  pu = kernel.apply_P(u, &u1_exact);

  Trajectory traj(grid);
  traj.colloc_values = u;
  traj.values.resize(grid.cells() + 1);
  for (int i = 0; i <= grid.cells(); ++i) traj.values[i] = base_nodes[i] + pu.nodes[i];
  traj.values[0] = u0;
  traj.provenance = "at-solver";
  traj.iterations = iterations;
  traj.mu = best_mu;
  traj.q = best_q;
  fill_derivatives(fp, f, traj);
  return traj;
}

}  // namespace fapprox
