#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fapprox/hilbert.hpp"

namespace fapprox {

/// Time function into H coordinates (forcing f or a trajectory sample).
using TimeFunction = std::function<Vector(double)>;

/// Cells [t_c, t_{c+1}] of [0, T], each carrying `order` Gauss points.
class TimeGrid {
 public:
  TimeGrid(std::vector<double> nodes, int gauss_order);
  static TimeGrid uniform(double horizon, int cells, int gauss_order);

  double horizon() const { return nodes_.back(); }
  const std::vector<double>& nodes() const { return nodes_; }
  int cells() const { return static_cast<int>(nodes_.size()) - 1; }
  int order() const { return order_; }
  double left(int c) const { return nodes_[c]; }
  double right(int c) const { return nodes_[c + 1]; }
  double width(int c) const { return nodes_[c + 1] - nodes_[c]; }

  /// Gauss point l of cell c and its quadrature weight.
  double colloc(int c, int l) const;
  double colloc_weight(int c, int l) const;
  int colloc_count() const { return cells() * order_; }
  /// The Gauss points of cell c.
  std::vector<double> colloc_points(int c) const;

  /// Cell containing t (right-closed on the last cell).
  int cell_of(double t) const;

 private:
  std::vector<double> nodes_;
  int order_;
  std::vector<double> ref_nodes_;    // on [0, 1]
  std::vector<double> ref_weights_;  // sum to 1
};

/// Solution samples at the grid nodes and at the Gauss points of every cell.
/// Derivatives come from the equation, u' = f - B(t) u.
struct Trajectory {
  TimeGrid grid;
  std::vector<Vector> values;             ///< u(t_i), i = 0..K
  std::vector<Vector> derivatives;        ///< u'(t_i)
  std::vector<Vector> colloc_values;      ///< u at Gauss point (c, l), index c * order + l
  std::vector<Vector> colloc_derivatives;
  std::string provenance;
  int iterations = 0;
  double mu = 0.0;
  double q = 0.0;

  explicit Trajectory(TimeGrid g) : grid(std::move(g)) {}
  /// Pointwise difference; the grids must coincide.
  Trajectory minus(const Trajectory& other) const;
  /// Multiplies values and derivatives by a scalar.
  Trajectory scaled(double factor) const;
};

struct SolutionNorms {
  double mr2_vvp = 0.0;  ///< ||u||_{L2 V} + (||u||^2_{L2 V'} + ||u'||^2_{L2 V'})^{1/2}
  double mr2_vh = 0.0;   ///< ||u||_{L2 V} + (||u||^2_{L2 H} + ||u'||^2_{L2 H})^{1/2}
  double sup_h = 0.0;
  double sup_v = 0.0;
  double l2_h = 0.0;
  double l2_v = 0.0;
  double h1_h = 0.0;     ///< (||u||^2_{L2 H} + ||u'||^2_{L2 H})^{1/2}
};

/// L2 norms by Gauss quadrature over the cells; sup norms as node maxima.
SolutionNorms solution_norms(const SpacePair& sp, const Trajectory& traj);

/// ||g||_{L2(0,T; V_sigma)} by the grid's Gauss rule.
double l2_norm(const SpacePair& sp, const TimeGrid& grid, const TimeFunction& g, double sigma);

}  // namespace fapprox
