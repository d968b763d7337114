#include "oar/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace oar {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
}

Grid make_grid(double a, double b, std::vector<double> breaks, double max_width, int order) {
  if (!(b > a) || !(max_width > 0) || order < 1)
    throw Error(Error::Kind::invalid_argument, "make_grid: bad interval or panel width");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);

  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  Grid g;
  double lo = a;
  for (double br : breaks) {
    if (br <= lo || br > b) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((br - lo) / max_width - 1e-9)));
    const double h = (br - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = lo + (p + 0.5) * h;
      for (int i = 0; i < order; ++i) {
        g.x.push_back(c + 0.5 * h * gx[i]);
        g.w.push_back(0.5 * h * gw[i]);
      }
    }
    lo = br;
  }
  return g;
}

namespace {

std::pair<cplx, double> sum_on(const std::function<cplx(double)>& f, const Grid& g) {
  std::vector<cplx> terms(g.size());
  std::vector<double> mags(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    terms[i] = g.w[i] * f(g.x[i]);
    mags[i] = std::abs(terms[i]);
  }
  return {pairwise_sum(terms.data(), terms.size()), pairwise_sum(mags.data(), mags.size())};
}

}  // namespace

cplx integrate(const std::function<cplx(double)>& f, double a, double b,
               const std::vector<double>& breaks, const QuadratureSpec& q, double width_scale) {
  const auto qc = q;
  const auto qf = q.doubled();
  const auto [coarse, mc] = sum_on(f, make_grid(a, b, breaks, qc.panel_width() * width_scale, q.order));
  const auto [fine, mf] = sum_on(f, make_grid(a, b, breaks, qf.panel_width() * width_scale, q.order));
  if (std::abs(fine - coarse) > q.rtol * std::max(mc, mf) + q.atol)
    throw QuadratureError(coarse, fine, "refine panels");
  return fine;
}

}  // namespace oar
