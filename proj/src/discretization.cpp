#include "fapprox/discretization.hpp"

#include <algorithm>
#include <cmath>

#include "fapprox/quadrature.hpp"

namespace fapprox {

TimeGrid::TimeGrid(std::vector<double> nodes, int gauss_order) : nodes_(std::move(nodes)), order_(gauss_order) {
  if (nodes_.size() < 2) throw InvalidInput("time grid needs at least one cell");
  if (nodes_.front() != 0.0) throw InvalidInput("time grid must start at 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) throw InvalidInput("time grid nodes must be strictly increasing");
  }
  if (gauss_order < 1) throw InvalidInput("Gauss order must be positive");
  const QuadratureRule& rule = gauss_legendre(gauss_order);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    ref_nodes_.push_back(0.5 * (rule.nodes[i] + 1.0));
    ref_weights_.push_back(0.5 * rule.weights[i]);
  }
}

TimeGrid TimeGrid::uniform(double horizon, int cells, int gauss_order) {
  if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");
  if (cells < 1) throw InvalidInput("time grid needs at least one cell");
  std::vector<double> nodes(cells + 1);
  for (int i = 0; i <= cells; ++i) nodes[i] = i == cells ? horizon : horizon * i / cells;
  return TimeGrid(std::move(nodes), gauss_order);
}

double TimeGrid::colloc(int c, int l) const { return left(c) + width(c) * ref_nodes_[l]; }
double TimeGrid::colloc_weight(int c, int l) const { return width(c) * ref_weights_[l]; }

std::vector<double> TimeGrid::colloc_points(int c) const {
  std::vector<double> pts(order_);
  for (int l = 0; l < order_; ++l) pts[l] = colloc(c, l);
  return pts;
}

int TimeGrid::cell_of(double t) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const int c = static_cast<int>(it - nodes_.begin()) - 1;
  return std::clamp(c, 0, cells() - 1);
}

Trajectory Trajectory::minus(const Trajectory& other) const {
  if (grid.nodes() != other.grid.nodes() || grid.order() != other.grid.order()) {
    throw InvalidInput("trajectories live on different grids");
  }
  Trajectory out(grid);
  auto sub = [](const std::vector<Vector>& a, const std::vector<Vector>& b) {
    std::vector<Vector> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
  };
  out.values = sub(values, other.values);
  out.derivatives = sub(derivatives, other.derivatives);
  out.colloc_values = sub(colloc_values, other.colloc_values);
  out.colloc_derivatives = sub(colloc_derivatives, other.colloc_derivatives);
  out.provenance = "difference";
  return out;
}

Trajectory Trajectory::scaled(double factor) const {
  Trajectory out = *this;
  for (auto* vs : {&out.values, &out.derivatives, &out.colloc_values, &out.colloc_derivatives}) {
    for (auto& v : *vs) v *= factor;
  }
  return out;
}

SolutionNorms solution_norms(const SpacePair& sp, const Trajectory& traj) {
  const TimeGrid& g = traj.grid;
  if (static_cast<int>(traj.colloc_values.size()) != g.colloc_count() ||
      traj.colloc_derivatives.size() != traj.colloc_values.size()) {
    throw InvalidInput("trajectory is incomplete");
  }
  double uv = 0.0, uh = 0.0, udual = 0.0, dh = 0.0, ddual = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    for (int l = 0; l < g.order(); ++l) {
      const double w = g.colloc_weight(c, l);
      const Vector& u = traj.colloc_values[c * g.order() + l];
      const Vector& d = traj.colloc_derivatives[c * g.order() + l];
      uv += w * std::pow(sp.v_norm(u), 2);
      uh += w * std::pow(sp.h_norm(u), 2);
      udual += w * std::pow(scale_norm(sp, u, -1.0), 2);
      dh += w * std::pow(sp.h_norm(d), 2);
      ddual += w * std::pow(scale_norm(sp, d, -1.0), 2);
    }
  }
  SolutionNorms n;
  n.l2_v = std::sqrt(uv);
  n.l2_h = std::sqrt(uh);
  n.h1_h = std::sqrt(uh + dh);
  n.mr2_vvp = n.l2_v + std::sqrt(udual + ddual);
  n.mr2_vh = n.l2_v + n.h1_h;
  for (const Vector& u : traj.values) {
    n.sup_h = std::max(n.sup_h, sp.h_norm(u));
    n.sup_v = std::max(n.sup_v, sp.v_norm(u));
  }
  return n;
}

double l2_norm(const SpacePair& sp, const TimeGrid& grid, const TimeFunction& g, double sigma) {
  double sum = 0.0;
  for (int c = 0; c < grid.cells(); ++c) {
    for (int l = 0; l < grid.order(); ++l) {
      sum += grid.colloc_weight(c, l) * std::pow(scale_norm(sp, g(grid.colloc(c, l)), sigma), 2);
    }
  }
  return std::sqrt(sum);
}

}  // namespace fapprox
