#pragma once

#include <functional>
#include <vector>

#include "oar/common.hpp"

namespace oar {

// Composite Gauss-Legendre: `points` nodes per 2pi of the integration variable,
// `order` nodes per panel. The doubling test compares against 2*points.
struct QuadratureSpec {
  int points = 128;
  int order = 16;
  double rtol = 1e-9;
  double atol = 1e-13;

  double panel_width() const { return 2 * pi * order / points; }
  QuadratureSpec doubled() const {
    QuadratureSpec q = *this;
    q.points *= 2;
    return q;
  }
};

// Nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct Grid {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

// Panels of width <= max_width on [a, b]; every break point inside (a, b) is a panel edge.
Grid make_grid(double a, double b, std::vector<double> breaks, double max_width, int order);

// Integrate on the grid of `q` and of `q.doubled()`; throws QuadratureError when
// |fine - coarse| > rtol * int|f| + atol.
cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               const std::vector<double>& breaks, const QuadratureSpec& q,
               double width_scale = 1.0);

// Deterministic pairwise sum.
template <typename T>
T pairwise_sum(const T* v, std::size_t n) {
  if (n <= 16) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace oar
