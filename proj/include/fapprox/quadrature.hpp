#pragma once

#include <vector>

namespace fapprox {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with `order` points on [-1, 1]. Rules are cached.
const QuadratureRule& gauss_legendre(int order);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int order, double a, double b);

/// Subintervals of [a, b] refined geometrically (ratio 1/2) toward the
/// flagged endpoints until the innermost width is at most `min_width`.
std::vector<std::pair<double, double>> graded_cells(double a, double b, bool toward_left,
                                                    bool toward_right, double min_width);

/// Lagrange basis values L_0..L_{p-1}(x) for the given interpolation nodes.
std::vector<double> lagrange_basis(const std::vector<double>& nodes, double x);

}  // namespace fapprox
