#include "oar/errorbounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace oar {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// 2 sin(k/2) - k for k >= 0, without cancellation near 0.
double chord_defect(double k) {
  if (k < 1e-2) {
    const double k3 = k * k * k;
    return -k3 / 24 + k3 * k * k / 1920 - k3 * k3 * k / 322560;
  }
  return 2 * std::abs(std::sin(k / 2)) - k;
}

// The four sup targets at k > 0, written with sum-to-product identities.
double sup_target(int which, double a, double k) {
  switch (which) {
    case 0: return 2 * std::abs(std::sin(k / 4)) / k;  // |e^{ik/2} - 1| / k
    case 1: {
      const double s = std::sin(k / 2);
      return 2 * s * s / (k * k);
    }
    case 2:
    case 3: {
      const double half_sum = a * (2 * std::abs(std::sin(k / 2)) + k) / 2;
      const double half_diff = a * chord_defect(k) / 2;
      if (which == 2) return 2 * std::abs(std::cos(half_sum) * std::sin(half_diff)) / (k * k * k);
      return 2 * std::abs(std::sin(half_sum) * std::sin(half_diff)) / (k * k * k * k);
    }
  }
  return 0;
}

// Golden-section search for a maximum on [lo, hi].
double refine_max(const std::function<double(double)>& f, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    }
  }
  return (lo + hi) / 2;
}

Mat2c sigma1() {
  Mat2c s;
  s << 0, 1, 1, 0;
  return s;
}

// e^{i tau h} for traceless Hermitian h, where h^2 = r^2 I.
Mat2c expi(const Mat2c& h, double tau) {
  const double r = std::sqrt(std::abs((h * h)(0, 0)));
  if (r == 0) return Mat2c::Identity();
  return std::cos(tau * r) * Mat2c::Identity() + cplx(0, std::sin(tau * r) / r) * h;
}

cplx bilinear(const SelfDualVector& v1, const SelfDualVector& w2, double k, const Mat2c& A) {
  const Eigen::Vector2cd a(v1.xi.fourier(k), v1.eta.fourier(k));
  const Eigen::Vector2cd b(w2.xi.fourier(k), w2.eta.fourier(k));
  return a.dot(A * b);  // conj(a)^T A b
}

SelfDualVector conj(const SelfDualVector& v) { return {v.xi.conj(), v.eta.conj()}; }

struct ShellNorms {
  std::array<double, 4> value{};
  std::array<bool, 4> divergent{};
  std::array<double, 4> ratio{};
};

// Dyadic shells up to 2^10 pi; the last three shells give the decay ratio.
ShellNorms shell_norms(const SelfDualVector& v, const Filter& f, double w) {
  if (!(w > 0)) throw Error(Error::Kind::invalid_argument, "sobolev weight must be positive");
  const ScalingFunctionFT sf(f);
  const QuadratureSpec q;
  auto dens = [&](double k) {
    const double n2 = std::norm(v.xi.fourier(k)) + std::norm(v.eta.fourier(k));
    return n2 == 0 ? 0.0 : n2 * std::pow(sf.abs2(k), w);
  };
  // All four orders on one grid, with the doubling check.
  auto shell = [&](double a, double b) {
    std::array<double, 4> out{};
    for (double sgn : {1.0, -1.0}) {
      std::array<double, 4> coarse{}, fine{};
      for (int pass = 0; pass < 2; ++pass) {
        const auto& qq = pass == 0 ? q : q.doubled();
        const Grid g = make_grid(a, b, {}, qq.panel_width(), q.order);
        auto& acc = pass == 0 ? coarse : fine;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double k = sgn * g.x[i];
          const double d = g.w[i] * dens(k);
          double p = 1 + k * k;
          for (int o = 0; o < 4; ++o, p *= 1 + k * k) acc[o] += d * p;
        }
      }
      for (int o = 0; o < 4; ++o) {
        if (std::abs(fine[o] - coarse[o]) > 1e-6 * std::abs(fine[o]) + 1e-14)
          throw QuadratureError(coarse[o], fine[o], "sobolev shell [" + std::to_string(a) + ", " +
                                                        std::to_string(b) + "]");
        out[o] += fine[o];
      }
    }
    return out;
  };

  ShellNorms r;
  std::array<double, 4> total{};
  const auto core = shell(0, pi);
  for (int o = 0; o < 4; ++o) total[o] = core[o];
  const int J = 10;
  std::vector<std::array<double, 4>> shells;
  for (int j = 0; j < J; ++j) {
    shells.push_back(shell(std::ldexp(pi, j), std::ldexp(pi, j + 1)));
    for (int o = 0; o < 4; ++o) total[o] += shells.back()[o];
  }
  for (int o = 0; o < 4; ++o) {
    const double last = shells[J - 1][o], earlier = shells[J - 4][o];
    if (last == 0) {
      r.value[o] = std::sqrt(total[o]);
      continue;
    }
    const double ratio = std::cbrt(last / earlier);
    r.ratio[o] = ratio;
    // Near ratio 1 the geometric tail is too sensitive to the ratio to trust.
    if (!(ratio < 0.95)) {
      r.divergent[o] = true;
      r.value[o] = inf;
      continue;
    }
    r.value[o] = std::sqrt(total[o] + last * ratio / (1 - ratio));
  }
  return r;
}

[[noreturn]] void throw_inadmissible(const Filter& f, double w, int order, double ratio) {
  throw Error(Error::Kind::inadmissible_filter,
              "filter D" + std::to_string(f.size()) + " is inadmissible at Sobolev order " + std::to_string(order) +
                  " with weight " + std::to_string(w) + ": dyadic shells scale by " + std::to_string(ratio) +
                  " per octave");
}

}  // namespace

std::array<SupConstant, 4> sup_constants(double t0t, int m) {
  const double a = 2 * t0t * std::ldexp(1.0, m);
  const char* names[4] = {"kernel_phase", "one_minus_cos", "sin_difference", "cos_difference"};
  const double closed[4] = {0.5, 0.5, std::ldexp(1.0, m) * 4.0 / 3 * t0t,
                            std::ldexp(1.0, 2 * m) * 8.0 / 3 * t0t * t0t};
  std::vector<double> grid;
  for (int i = 0; i <= 600; ++i) grid.push_back(std::pow(10.0, -6 + 6.0 * i / 600));
  for (double k = 1.002; k <= 60; k += 2e-3) grid.push_back(k);

  std::array<SupConstant, 4> out;
  for (int w = 0; w < 4; ++w) {
    auto f = [&](double k) { return sup_target(w, a, k); };
    std::size_t best = 0;
    double fbest = -1;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (const double v = f(grid[i]); v > fbest) fbest = v, best = i;
    double arg = 0, val = f(1e-9);  // the k -> 0 limit
    if (best > 0) {
      const double lo = grid[best - 1], hi = grid[std::min(best + 1, grid.size() - 1)];
      const double x = refine_max(f, lo, hi);
      if (f(x) > val) arg = x, val = f(x);
    }
    out[w] = {names[w], val, arg, closed[w]};
  }
  return out;
}

double sobolev_norm(const SelfDualVector& v, const Filter& f, double w, int order) {
  if (order < 1 || order > 4) throw Error(Error::Kind::invalid_argument, "sobolev order must be 1..4");
  const auto r = shell_norms(v, f, w);
  if (r.divergent[order - 1]) throw_inadmissible(f, w, order, r.ratio[order - 1]);
  return r.value[order - 1];
}

std::array<double, 4> sobolev_norms(const SelfDualVector& v, const Filter& f, double w) {
  const auto r = shell_norms(v, f, w);
  for (int o = 0; o < 4; ++o)
    if (r.divergent[o]) throw_inadmissible(f, w, o + 1, r.ratio[o]);
  return r.value;
}

BoundTerms assemble_bound(int m, double t0, double t, const std::array<double, 4>& n1,
                          const std::array<double, 4>& n2) {
  const double s = std::ldexp(1.0, -m), tt = std::abs(t0 * t);
  BoundTerms b;
  b.components[0] = (std::sqrt(2.0) + 1) / (2 * std::sqrt(2.0)) * n1[0] * n2[0];
  b.components[1] = s * 0.5 * n1[1] * n2[1];
  // Dynamics terms vanish at t0 = 0 whatever the norms are.
  b.components[2] = tt == 0 ? 0.0 : s * 4.0 / 3 * tt * n1[2] * n2[2];
  b.components[3] = tt == 0 ? 0.0 : s * 8.0 / 3 * tt * tt * n1[3] * n2[3];
  const double sum = b.components[0] + b.components[1] + b.components[2] + b.components[3];
  b.bound = s * std::sqrt(2.0) / (2 * pi) * sum;
  return b;
}

namespace {

BoundTerms bound_from(const ShellNorms& r1, const ShellNorms& r2, int m, double t0, double t, const Filter& f,
                      double gamma) {
  const int needed = t0 * t == 0 ? 2 : 4;
  for (int o = 0; o < needed; ++o) {
    if (r1.divergent[o]) throw_inadmissible(f, 1 - gamma, o + 1, r1.ratio[o]);
    if (r2.divergent[o]) throw_inadmissible(f, gamma, o + 1, r2.ratio[o]);
  }
  return assemble_bound(m, t0, t, r1.value, r2.value);
}

void check_gamma(double gamma) {
  if (!(gamma > 0 && gamma < 1)) throw Error(Error::Kind::invalid_argument, "gamma must lie in (0, 1)");
}

}  // namespace

BoundTerms certified_bound(int m, double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                           const Filter& f, double gamma) {
  check_gamma(gamma);
  return bound_from(shell_norms(v1, f, 1 - gamma), shell_norms(v2, f, gamma), m, t0, t, f, gamma);
}

cplx lattice_dynamical_two_point(int m, double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                                 const Filter& f, const QuadratureSpec& q) {
  if (m < 0) throw Error(Error::Kind::invalid_argument, "m must be >= 0");
  const Couplings c{t, t, infinite_beta};
  const auto K = covariance_lattice(c);
  const auto w2 = conj(v2);
  const double scale = std::ldexp(1.0, m);
  auto integrand = [&](double k) {
    const double theta = k / scale;
    double dens = 1;
    for (int n = 1; n <= m; ++n) dens *= std::norm(m0(f, std::ldexp(k, -n)));
    if (dens == 0) return cplx(0);
    const Mat2c A = K(theta) * expi(one_particle_h(c, theta), scale * t0);
    return dens * bilinear(v1, w2, k, A);
  };
  // The phase turns at rate about 2 t |t0| in k; keep panels below a quarter turn.
  const double width = std::min(1.0, 1.0 / std::max(1e-12, 2 * std::abs(t * t0)));
  return integrate(integrand, -scale * pi, scale * pi, {0.0}, q, width) / (2 * pi);
}

cplx continuum_dynamical_two_point(double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                                   const Filter& f, const QuadratureSpec& q) {
  const ScalingFunctionFT sf(f);
  const double K = choose_kmax(sf);
  if (K < 0) throw Error(Error::Kind::tail_mass, "tail mass criterion unsatisfiable for this filter");
  const auto C = covariance_critical_limit();
  const auto w2 = conj(v2);
  auto integrand = [&](double k) {
    const Mat2c A = C(k) * expi(2 * t * k * sigma1(), t0);
    return sf.abs2(k) * bilinear(v1, w2, k, A);
  };
  const double width = std::min(1.0, 1.0 / std::max(1e-12, 2 * std::abs(t * t0)));
  return integrate(integrand, -K, K, {0.0}, q, width) / (2 * pi);
}

double empirical_error(int m, double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                       const Filter& f, const QuadratureSpec& q) {
  return std::abs(lattice_dynamical_two_point(m, t0, t, v1, v2, f, q) -
                  continuum_dynamical_two_point(t0, t, v1, v2, f, q));
}

bool BoundReport::certified() const {
  return std::isfinite(certified_bound) && empirical_error <= certified_bound + 1e-8;
}

std::vector<BoundReport> bound_sweep(const Filter& f, const std::vector<int>& ms, const std::vector<double>& t0s,
                                     double t, const SelfDualVector& v1, const SelfDualVector& v2,
                                     double gamma) {
  check_gamma(gamma);
  // The norms do not depend on m or t0.
  const auto r1 = shell_norms(v1, f, 1 - gamma), r2 = shell_norms(v2, f, gamma);
  std::vector<BoundReport> out;
  for (int m : ms)
    for (double t0 : t0s) {
      BoundReport r;
      r.m = m;
      r.t0 = t0;
      r.empirical_error = empirical_error(m, t0, t, v1, v2, f);
      try {
        const auto b = bound_from(r1, r2, m, t0, t, f, gamma);
        r.certified_bound = b.bound;
        r.components = b.components;
      } catch (const Error& e) {
        if (e.kind() != Error::Kind::inadmissible_filter) throw;
        r.certified_bound = inf;
        r.components.fill(inf);
        r.note = e.what();
      }
      out.push_back(r);
    }
  return out;
}

double log2_slope(const std::vector<int>& ms, const std::vector<double>& errors) {
  if (ms.size() != errors.size() || ms.size() < 2)
    throw Error(Error::Kind::invalid_argument, "slope needs at least two matching points");
  double mx = 0, my = 0;
  const double n = static_cast<double>(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    mx += ms[i] / n;
    my += std::log2(errors[i]) / n;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    num += (ms[i] - mx) * (std::log2(errors[i]) - my);
    den += (ms[i] - mx) * (ms[i] - mx);
  }
  return num / den;
}

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& rows) {
  os << "m,t0,empirical,bound,c1,c2,c3,c4\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.m << ',' << r.t0 << ',' << r.empirical_error << ',' << r.certified_bound;
    for (double c : r.components) os << ',' << c;
    os << '\n';
  }
}

}  // namespace oar
