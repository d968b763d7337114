#include "oar/wavelet.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <unsupported/Eigen/Polynomials>

#include "oar/quadrature.hpp"

namespace oar {

namespace {

using ld = long double;
using cld = std::complex<long double>;

double binom(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Newton polish of a root of sum c_k y^k in extended precision.
cld polish(const std::vector<ld>& c, cld y) {
  for (int it = 0; it < 50; ++it) {
    cld p = 0, dp = 0;
    for (int k = static_cast<int>(c.size()) - 1; k >= 0; --k) {
      dp = dp * y + p;
      p = p * y + c[k];
    }
    if (std::abs(dp) == 0) break;
    const cld step = p / dp;
    y -= step;
    if (std::abs(step) < 1e-19L * std::max<ld>(1, std::abs(y))) break;
  }
  return y;
}

}  // namespace

Filter make_daubechies_filter(int p) {
  if (p < 1 || p > 10)
    throw Error(Error::Kind::invalid_argument,
                "unsupported Daubechies order p=" + std::to_string(p) + " (need 1..10)");

  // P(y) = sum_{k<p} C(p-1+k, k) y^k; each root y gives z + 1/z = 2 - 4y, keep |z| < 1.
  std::vector<ld> c(p);
  for (int k = 0; k < p; ++k) c[k] = binom(p - 1 + k, k);

  std::vector<cld> poly{1};  // ascending powers of z
  auto times = [&](cld root) {  // poly *= (z - root)
    std::vector<cld> out(poly.size() + 1, 0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      out[i + 1] += poly[i];
      out[i] -= root * poly[i];
    }
    poly = std::move(out);
  };

  if (p > 1) {
    Eigen::VectorXd cd(p);
    for (int k = 0; k < p; ++k) cd(k) = static_cast<double>(c[k]);
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(cd);
    for (int i = 0; i < solver.roots().size(); ++i) {
      const auto r = solver.roots()(i);
      const cld y = polish(c, cld(r.real(), r.imag()));
      const cld b = 2.0L - 4.0L * y;
      const cld d = std::sqrt(b * b - 4.0L);
      cld z = (b - d) / 2.0L;
      if (std::abs(z) > 1) z = (b + d) / 2.0L;
      times(z);
    }
  }
  for (int i = 0; i < p; ++i) times(-1.0L);

  // Coefficients in decreasing powers of z give the minimum-phase ordering.
  Filter f;
  f.order = p;
  f.support_offset = 0;
  f.coeffs.resize(2 * p);
  ld sum = 0;
  for (int n = 0; n < 2 * p; ++n) sum += poly[2 * p - 1 - n].real();
  const ld scale = std::sqrt(2.0L) / sum;
  for (int n = 0; n < 2 * p; ++n) f.coeffs(n) = static_cast<double>(poly[2 * p - 1 - n].real() * scale);
  return f;
}

HighPassFilter high_pass(const Filter& f) {
  // g_n = (-1)^n h_{1+2N-n}; for h on 0..2N-1 the support is 2..2N+1.
  const int N = f.size() / 2;
  HighPassFilter g;
  g.parent = f;
  g.support_offset = 2 - f.support_offset;
  g.coeffs.resize(f.size());
  for (int i = 0; i < f.size(); ++i) {
    const int n = g.support_offset + i;
    g.coeffs(i) = ((n % 2 == 0) ? 1.0 : -1.0) * f[1 + 2 * N - n];
  }
  return g;
}

cplx m0(const Filter& f, double theta) {
  // Horner in e^{-i theta}.
  const cplx e = std::polar(1.0, -theta);
  cplx acc = 0;
  for (int i = f.size() - 1; i >= 0; --i) acc = acc * e + f.coeffs(i);
  return acc * std::polar(1.0, -theta * f.support_offset) / std::sqrt(2.0);
}

FilterCheck check_filter(const Filter& f) {
  FilterCheck r;
  r.sum_error = std::abs(f.coeffs.sum() - std::sqrt(2.0));
  const int n = f.size();
  for (int k = 0; 2 * k < n; ++k) {
    double s = 0;
    for (int i = 0; i + 2 * k < n; ++i) s += f.coeffs(i) * f.coeffs(i + 2 * k);
    r.orthonormality_error = std::max(r.orthonormality_error, std::abs(s - (k == 0 ? 1.0 : 0.0)));
  }
  return r;
}

ScalingFunctionFT::ScalingFunctionFT(Filter f, double cutoff) : filter_(std::move(f)), cutoff_(cutoff) {
  double s = 0;
  for (int i = 0; i < filter_.size(); ++i) s += (filter_.support_offset + i) * filter_.coeffs(i);
  mu_ = s / std::sqrt(2.0);
}

int ScalingFunctionFT::depth(double k) const {
  int P = 1;
  double x = std::abs(k) / 2;
  while (x >= cutoff_) {
    x /= 2;
    ++P;
  }
  return P;
}

cplx ScalingFunctionFT::operator()(double k) const {
  const int P = depth(k);
  cplx prod = truncated_product(filter_, k, P);
  // Remaining factors multiply to exp(-i mu 2^{-P} k) to first order.
  return prod * cplx(1.0, -mu_ * std::ldexp(k, -P));
}

cplx truncated_product(const Filter& f, double k, int m) {
  cplx prod = 1;
  for (int n = 1; n <= m; ++n) prod *= m0(f, std::ldexp(k, -n));
  return prod;
}

double tail_mass(const ScalingFunctionFT& sf, double K) {
  QuadratureSpec q;
  q.rtol = 1e-12;
  const double inner = integrate([&](double k) { return cplx(sf.abs2(k)); }, 0.0, K, {}, q).real();
  return std::max(0.0, 2 * pi - 2 * inner);
}

void write_filter_csv(std::ostream& os, const Filter& f) {
  const auto g = high_pass(f);
  os << "n,h_n,g_n\n" << std::setprecision(17);
  const int lo = std::min(f.support_offset, g.support_offset);
  const int hi = std::max(f.support_offset + f.size(), g.support_offset + g.size());
  for (int n = lo; n < hi; ++n) os << n << ',' << f[n] << ',' << g[n] << '\n';
}

}  // namespace oar
