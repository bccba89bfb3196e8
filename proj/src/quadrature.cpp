#include "fapprox/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "fapprox/types.hpp"

namespace fapprox {

namespace {

QuadratureRule compute_gauss_legendre(int order) {
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1) throw InvalidInput("Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    QuadratureRule rule = order == 1 ? QuadratureRule{{0.0}, {2.0}} : compute_gauss_legendre(order);
    it = cache.emplace(order, std::move(rule)).first;
  }
  return it->second;
}

QuadratureRule gauss_legendre(int order, double a, double b) {
  const QuadratureRule& ref = gauss_legendre(order);
  QuadratureRule out;
  out.nodes.resize(ref.nodes.size());
  out.weights.resize(ref.nodes.size());
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
    out.nodes[i] = mid + half * ref.nodes[i];
    out.weights[i] = half * ref.weights[i];
  }
  return out;
}

std::vector<std::pair<double, double>> graded_cells(double a, double b, bool toward_left,
                                                    bool toward_right, double min_width) {
  std::vector<std::pair<double, double>> cells;
  if (!(b > a)) return cells;
  if (toward_left && toward_right) {
    const double mid = 0.5 * (a + b);
    cells = graded_cells(a, mid, true, false, min_width);
    auto right = graded_cells(mid, b, false, true, min_width);
    cells.insert(cells.end(), right.begin(), right.end());
    return cells;
  }
  if (!toward_left && !toward_right) {
    cells.emplace_back(a, b);
    return cells;
  }
  // Split points accumulate toward the singular end.
  std::vector<double> cuts;
  double width = b - a;
  while (width > min_width) {
    width *= 0.5;
    cuts.push_back(width);
  }
  if (toward_right) {
    double left = a;
    for (double w : cuts) {
      const double right = b - w;
      cells.emplace_back(left, right);
      left = right;
    }
    cells.emplace_back(left, b);
  } else {
    double right = b;
    std::vector<std::pair<double, double>> reversed;
    for (double w : cuts) {
      const double left = a + w;
      reversed.emplace_back(left, right);
      right = left;
    }
    reversed.emplace_back(a, right);
    cells.assign(reversed.rbegin(), reversed.rend());
  }
  return cells;
}

std::vector<double> lagrange_basis(const std::vector<double>& nodes, double x) {
  std::vector<double> basis(nodes.size(), 1.0);
  for (std::size_t l = 0; l < nodes.size(); ++l) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k != l) basis[l] *= (x - nodes[k]) / (nodes[l] - nodes[k]);
    }
  }
  return basis;
}

}  // namespace fapprox
