#include "oar/rgflow.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace oar {

namespace {

const cplx I{0, 1};

// 2^m prod_{n=0}^{m-1} |m0(2^n theta)|^2
double filter_density(const Filter& f, double theta, int m) {
  double d = 1;
  for (int n = 0; n < m; ++n) d *= 2 * std::norm(m0(f, std::ldexp(theta, n)));
  return d;
}

std::vector<double> dyadic_breaks(double half_width, int levels) {
  std::vector<double> b{0.0};
  for (int n = 1; n <= levels; ++n) {
    b.push_back(std::ldexp(half_width, -n));
    b.push_back(-std::ldexp(half_width, -n));
  }
  return b;
}

double search_kmax(const ScalingFunctionFT& sf, double tail_tol, double cap) {
  QuadratureSpec q;
  q.rtol = 1e-12;
  auto f = [&](double k) { return cplx(sf.abs2(k)); };
  double inner_mass = integrate(f, 0.0, 2 * pi, {}, q).real();
  for (double K = 2 * pi; K <= cap * (1 + 1e-12); K *= 2) {
    if (2 * pi - 2 * inner_mass < tail_tol) return K;
    inner_mass += integrate(f, K, 2 * K, {}, q).real();
  }
  return -1;
}

std::vector<QuasiFreeState::Node> renormalized_nodes(const RenormalizedState& st, double width, int order) {
  std::vector<QuasiFreeState::Node> out;
  const int m = st.m;
  if (m < 6) {
    const Grid g = make_grid(-pi, pi, dyadic_breaks(pi, m), std::ldexp(width, -m), order);
    out.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double th = g.x[i];
      out.push_back({std::ldexp(th, m), g.w[i] * filter_density(st.filter, th, m) / (2 * pi),
                     st.base(th)(1, 0)});
    }
  } else {
    const double K = std::ldexp(pi, m);
    const Grid g = make_grid(-K, K, dyadic_breaks(K, m), width, order);
    out.reserve(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double k = g.x[i];
      double d = 1;
      for (int n = 1; n <= m; ++n) d *= std::norm(m0(st.filter, std::ldexp(k, -n)));
      out.push_back({k, g.w[i] * d / (2 * pi), st.base(std::ldexp(k, -m))(1, 0)});
    }
  }
  return out;
}

}  // namespace

SmearedVector SmearedVector::delta(int j, cplx c) {
  VecXc v(1);
  v(0) = c;
  return {j, v};
}

cplx SmearedVector::fourier(double theta) const {
  if (empty()) return 0;
  const cplx e = std::polar(1.0, -theta);
  cplx acc = 0;
  for (int i = size() - 1; i >= 0; --i) acc = acc * e + values(i);
  return acc * std::polar(1.0, -theta * offset);
}

SmearedVector SmearedVector::conj() const { return {offset, values.conjugate()}; }

SmearedVector operator+(const SmearedVector& a, const SmearedVector& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int lo = std::min(a.offset, b.offset);
  const int hi = std::max(a.offset + a.size(), b.offset + b.size());
  VecXc v(hi - lo);
  for (int j = lo; j < hi; ++j) v(j - lo) = a[j] + b[j];
  return {lo, v};
}

SmearedVector operator*(cplx c, const SmearedVector& a) { return {a.offset, c * a.values}; }

cplx inner(const SmearedVector& a, const SmearedVector& b) {
  cplx s = 0;
  const int lo = std::max(a.offset, b.offset);
  const int hi = std::min(a.offset + a.size(), b.offset + b.size());
  for (int j = lo; j < hi; ++j) s += std::conj(a[j]) * b[j];
  return s;
}

SmearedVector apply_isometry(const Filter& f, const SmearedVector& xi, int steps) {
  SmearedVector cur = xi;
  for (int s = 0; s < steps; ++s) {
    if (cur.empty()) return cur;
    const int lo = f.support_offset + 2 * cur.offset;
    const int hi = f.support_offset + f.size() - 1 + 2 * (cur.offset + cur.size() - 1);
    VecXc v = VecXc::Zero(hi - lo + 1);
    for (int j = cur.offset; j < cur.offset + cur.size(); ++j)
      for (int n = 0; n < f.size(); ++n) v(2 * j + f.support_offset + n - lo) += f.coeffs(n) * cur[j];
    cur = {lo, v};
  }
  return cur;
}

cplx isometry_inner_product(const Filter& f, int m, const SmearedVector& xi, const SmearedVector& eta,
                            const QuadratureSpec& q) {
  auto integrand = [&](double th) {
    return filter_density(f, th, m) * std::conj(xi.fourier(std::ldexp(th, m))) * eta.fourier(std::ldexp(th, m));
  };
  return integrate(integrand, -pi, pi, dyadic_breaks(pi, m), q, std::ldexp(1.0, -m)) / (2 * pi);
}

QuasiFreeState::QuasiFreeState(std::string label, std::vector<Node> coarse, std::vector<Node> fine, double rtol,
                               double atol)
    : label_(std::move(label)), coarse_(std::move(coarse)), fine_(std::move(fine)), rtol_(rtol), atol_(atol) {}

template <typename F>
cplx QuasiFreeState::evaluate(F&& term) const {
  auto sum = [&](const std::vector<Node>& nodes, double* mag) {
    std::vector<cplx> t(nodes.size());
    std::vector<double> a(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      t[i] = term(nodes[i]);
      a[i] = std::abs(t[i]);
    }
    if (mag) *mag = pairwise_sum(a.data(), a.size());
    return pairwise_sum(t.data(), t.size());
  };
  double mag = 0;
  const cplx coarse = sum(coarse_, nullptr);
  const cplx fine = sum(fine_, &mag);
  const double err = std::abs(fine - coarse);
  last_error_ = std::max(last_error_, err);
  if (err > rtol_ * mag + atol_) throw QuadratureError(coarse, fine, label_ + ": refine panels");
  return fine;
}

cplx QuasiFreeState::aa_dag(const SmearedVector& xi, const SmearedVector& eta) const {
  const cplx exact = 0.5 * inner(xi, eta);
  return exact + evaluate([&](const Node& n) {
           return n.w * 0.5 * n.k21.imag() * std::conj(xi.fourier(n.p)) * eta.fourier(n.p);
         });
}

cplx QuasiFreeState::adag_adag(const SmearedVector& xi, const SmearedVector& eta) const {
  if (!tail_error_.empty()) throw Error(Error::Kind::tail_mass, tail_error_);
  return evaluate([&](const Node& n) {
    return n.w * 0.5 * I * n.k21.real() * xi.fourier(-n.p) * eta.fourier(n.p);
  });
}

QuasiFreeState make_renormalized_state(const RenormalizedState& st, const QuadratureSpec& q) {
  if (!st.base.is_lattice())
    throw Error(Error::Kind::invalid_argument, "renormalized state needs a lattice base kernel");
  if (st.m < 0) throw Error(Error::Kind::invalid_argument, "m must be >= 0");
  return QuasiFreeState("renormalized m=" + std::to_string(st.m),
                        renormalized_nodes(st, q.panel_width(), q.order),
                        renormalized_nodes(st, q.doubled().panel_width(), q.order), q.rtol, q.atol);
}

double choose_kmax(const ScalingFunctionFT& sf, double tail_tol, double cap) {
  // Memoized: the answer only depends on the taps and the two thresholds.
  static std::mutex mu;
  static std::map<std::vector<double>, double> memo;
  std::vector<double> key(sf.filter().coeffs.data(), sf.filter().coeffs.data() + sf.filter().size());
  key.push_back(tail_tol);
  key.push_back(cap);
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
  }
  const double K = search_kmax(sf, tail_tol, cap);
  std::lock_guard<std::mutex> lock(mu);
  memo[key] = K;
  return K;
}

QuasiFreeState make_limit_state(const Filter& f, const CovarianceKernel& limit, const QuadratureSpec& q) {
  if (limit.is_lattice()) throw Error(Error::Kind::invalid_argument, "limit state needs a continuum kernel");
  const ScalingFunctionFT sf(f);
  const double K = choose_kmax(sf);
  const std::string label = std::string("limit ") + to_string(limit.kind) + " D" + std::to_string(f.size());
  if (K < 0) {
    const std::string msg = "tail mass of |s^|^2 stays above 1e-10 up to 2^9 pi for D" +
                            std::to_string(f.size()) + "; use a smoother filter";
    // The critical a a^dag value is exact without any truncation; everything else needs the tail.
    if (limit.kind != KernelKind::critical_limit) throw Error(Error::Kind::tail_mass, msg);
    QuasiFreeState st(label, {}, {}, q.rtol, q.atol);
    st.tail_error_ = msg;
    return st;
  }
  auto nodes = [&](double width) {
    const Grid g = make_grid(-K, K, {0.0}, width, q.order);
    std::vector<QuasiFreeState::Node> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      out[i] = {g.x[i], g.w[i] * sf.abs2(g.x[i]) / (2 * pi), limit(g.x[i])(1, 0)};
    return out;
  };
  return QuasiFreeState(label, nodes(q.panel_width()), nodes(q.doubled().panel_width()), q.rtol, q.atol);
}

cplx renormalized_two_point(const RenormalizedState& st, const SmearedVector& xi, const SmearedVector& eta,
                            Pairing which, const QuadratureSpec& q) {
  return make_renormalized_state(st, q).two_point(xi, eta, which);
}

cplx limit_two_point(const Filter& f, const SmearedVector& xi, const SmearedVector& eta, Pairing which,
                     const QuadratureSpec& q) {
  return make_limit_state(f, covariance_critical_limit(), q).two_point(xi, eta, which);
}

cplx majorana_two_point(const Filter& f, int chirality, const SmearedVector& xi, const SmearedVector& eta,
                        const QuadratureSpec& q, int chirality2) {
  if (chirality != 1 && chirality != -1)
    throw Error(Error::Kind::invalid_argument, "chirality must be +1 or -1");
  if (chirality2 != 0 && chirality2 != chirality) return 0;
  const ScalingFunctionFT sf(f);
  const double K = choose_kmax(sf);
  if (K < 0) throw Error(Error::Kind::tail_mass, "tail mass criterion unsatisfiable for this filter");
  auto integrand = [&](double k) {
    return 0.5 * (1 + chirality * sign(k)) * sf.abs2(k) * std::conj(xi.fourier(k)) * eta.fourier(k);
  };
  return integrate(integrand, -K, K, {0.0}, q) / pi;
}

cplx massive_thermal_two_point(const Filter& f, double mu0, double beta0, double t, const SmearedVector& xi,
                               const SmearedVector& eta, Pairing which, const QuadratureSpec& q) {
  return make_limit_state(f, covariance_massive_thermal(mu0, beta0, t), q).two_point(xi, eta, which);
}

Couplings massive_thermal_couplings(double mu0, double beta0, double t, int m) {
  return Couplings{t, t * (1 - std::ldexp(mu0, -m)), std::ldexp(beta0, m)};
}

const char* to_string(FlowDestination d) {
  switch (d) {
    case FlowDestination::critical: return "critical";
    case FlowDestination::disorder_fixed_point: return "disorder_fixed_point";
    case FlowDestination::order_fixed_point: return "order_fixed_point";
  }
  return "?";
}

Mat2c fixed_point_kernel(FlowDestination d, double k) {
  Mat2c K;
  switch (d) {
    case FlowDestination::critical: return covariance_critical_limit()(k);
    case FlowDestination::disorder_fixed_point: K << 1, I, -I, 1; return K;  // z/|z| -> +1
    case FlowDestination::order_fixed_point: K << 1, -I, I, 1; return K;     // z/|z| -> -1
  }
  return Mat2c::Identity();
}

FlowClassification classify_flow(const Couplings& c, double probe_k) {
  c.validate();
  if (!c.ground_state()) throw Error(Error::Kind::invalid_argument, "classify_flow needs beta = infinity");
  FlowClassification r;
  r.lambda = c.lambda();
  r.destination = r.lambda == 0 ? FlowDestination::critical
                  : r.lambda > 0 ? FlowDestination::disorder_fixed_point
                                 : FlowDestination::order_fixed_point;
  const auto K = covariance_lattice(c);
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    double d = 0;
    for (double k : {-probe_k, probe_k}) {
      const Mat2c diff = K(std::ldexp(k, -r.steps[i])) - fixed_point_kernel(r.destination, k);
      d = std::max(d, diff.cwiseAbs().maxCoeff());
    }
    r.distance[i] = d;
  }
  return r;
}

}  // namespace oar
