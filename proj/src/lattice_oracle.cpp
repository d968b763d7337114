#include "oar/lattice_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "json.hpp"

namespace oar {

namespace {

using Eigen::MatrixXd;

// Site j sits at bit L-1-j so that site 0 is the leading Kronecker factor.
inline int bit_of(int sites, int j) { return sites - 1 - j; }
inline int spin_at(unsigned idx, int sites, int j) { return (idx >> bit_of(sites, j)) & 1u ? -1 : 1; }

void require(bool ok, Error::Kind k, const std::string& msg) {
  if (!ok) throw Error(k, msg);
}

// sum_j s_j s_{j+1} over the chain for a sigma3 basis index.
int bond_sum(unsigned idx, int sites, Boundary b) {
  int s = 0;
  const int last = b == Boundary::periodic ? sites : sites - 1;
  for (int j = 0; j < last; ++j) s += spin_at(idx, sites, j) * spin_at(idx, sites, (j + 1) % sites);
  return s;
}

MatrixXd kron_power(const MatrixXd& m, int n) {
  MatrixXd out = MatrixXd::Ones(1, 1);
  for (int i = 0; i < n; ++i) out = Eigen::kroneckerProduct(out, m).eval();
  return out;
}

// Symmetric V = Q diag(lambda) Q^T with lambda scaled to max 1.
struct Spectral {
  MatrixXd Q;
  Eigen::VectorXd lambda;
  double scale;
};

Spectral spectral(const MatrixXd& V) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(V);
  require(es.info() == Eigen::Success, Error::Kind::degenerate_model, "eigensolver failed");
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  return {es.eigenvectors(), es.eigenvalues() / top, top};
}

}  // namespace

Mat2c pauli(int k) {
  Mat2c s;
  if (k == 1) s << 0, 1, 1, 0;
  if (k == 2) s << 0, cplx(0, -1), cplx(0, 1), 0;
  if (k == 3) s << 1, 0, 0, -1;
  return s;
}

double IsingTensor::operator()(int mu, int mup, int s, int sp) const {
  auto b = [](int x) { return x > 0 ? 0 : 1; };
  return values[8 * b(mu) + 4 * b(mup) + 2 * b(s) + b(sp)];
}

IsingTensor make_ising_tensor(double K1, double K2) {
  IsingTensor t{K1, K2, {}};
  const int sp[2] = {1, -1};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          t.values[8 * a + 4 * b + 2 * c + d] =
              (a == c) ? std::exp(K1 * sp[a] * sp[b]) * std::exp(K2 * sp[c] * sp[d]) : 0.0;
  return t;
}

void LatticeSpec::validate() const {
  require(M >= 1 && M <= 4, Error::Kind::size_guard, "lattice: need 1 <= M <= 4");
  require(N >= 1 && N <= 64, Error::Kind::size_guard, "lattice: need 1 <= N <= 64");
  require(std::isfinite(K1) && std::isfinite(K2), Error::Kind::invalid_argument, "lattice: couplings must be finite");
}

double dual_coupling(double K) {
  require(K > 0, Error::Kind::degenerate_model, "dual coupling needs K > 0");
  return -0.5 * std::log(std::tanh(K));
}

namespace {

// counts[d1 * (bonds + 1) + d2] for an L x R torus, enumerated row by row.
std::vector<std::uint32_t> enumerate_bonds(int L, int R) {
  const int bonds = L * R;
  std::vector<std::uint32_t> counts((bonds + 1) * (bonds + 1), 0);
  // Per-row tables: disagreeing horizontal bonds of a row, and bit counts.
  const unsigned rows = 1u << L, row_mask = rows - 1;
  std::vector<std::uint8_t> ring(rows), bits(rows);
  for (unsigned r = 0; r < rows; ++r) {
    bits[r] = static_cast<std::uint8_t>(std::popcount(r));
    ring[r] = static_cast<std::uint8_t>(std::popcount(r ^ (((r << 1) | (r >> (L - 1))) & row_mask)));
  }
  const unsigned long total = 1ul << bonds;
  for (unsigned long c = 0; c < total; ++c) {
    int d1 = 0, d2 = 0;
    const unsigned first = c & row_mask;
    unsigned row = first;
    for (int k = 1; k <= R; ++k) {
      const unsigned next = k == R ? first : (c >> (k * L)) & row_mask;
      d1 += ring[row];
      d2 += bits[row ^ next];
      row = next;
    }
    ++counts[d1 * (bonds + 1) + d2];
  }
  return counts;
}

}  // namespace

BondHistogram bond_histogram(int M, int N) {
  LatticeSpec{M, N, 0, 0}.validate();
  const int L = 2 * M, R = 2 * N;
  require(L * R <= 24, Error::Kind::size_guard, "brute force limited to 24 spins");
  BondHistogram h;
  h.bonds = L * R;
  const int n = h.bonds + 1;
  h.counts.assign(n * n, 0);
  // Few long rows are much cheaper than many short ones; transposing swaps the bond types.
  if (R > L) {
    const auto t = enumerate_bonds(R, L);
    for (int d1 = 0; d1 < n; ++d1)
      for (int d2 = 0; d2 < n; ++d2) h.counts[d1 * n + d2] = t[d2 * n + d1];
  } else {
    const auto t = enumerate_bonds(L, R);
    h.counts.assign(t.begin(), t.end());
  }
  return h;
}

double partition_function(const BondHistogram& h, double K1, double K2) {
  const int n = h.bonds + 1;
  double z = 0;
  for (int d1 = 0; d1 < n; ++d1)
    for (int d2 = 0; d2 < n; ++d2)
      if (const double c = h.counts[d1 * n + d2]; c != 0)
        z += c * std::exp(K1 * (h.bonds - 2 * d1) + K2 * (h.bonds - 2 * d2));
  return z;
}

double partition_function_brute(const LatticeSpec& spec) {
  spec.validate();
  return partition_function(bond_histogram(spec.M, spec.N), spec.K1, spec.K2);
}

TransferMatrices transfer_matrices(const LatticeSpec& spec, Boundary b) {
  spec.validate();
  require(spec.K2 > 0, Error::Kind::degenerate_model, "transfer matrix: K2 must be positive (K2* diverges)");
  const int L = spec.sites();
  const int dim = 1 << L;
  MatrixXd w(2, 2);
  w << std::exp(spec.K2), std::exp(-spec.K2), std::exp(-spec.K2), std::exp(spec.K2);

  TransferMatrices t;
  t.v1 = kron_power(w, L);
  Eigen::VectorXd diag(dim), root(dim);
  for (int i = 0; i < dim; ++i) {
    diag(i) = std::exp(spec.K1 * bond_sum(i, L, b));
    root(i) = std::sqrt(diag(i));
  }
  t.v3 = diag.asDiagonal();
  t.v = diag.asDiagonal() * t.v1;
  t.v_sym = root.asDiagonal() * t.v1 * root.asDiagonal();
  return t;
}

double correlation_brute(const LatticeSpec& spec, const std::vector<std::pair<int, int>>& insertions) {
  spec.validate();
  require(spec.N <= 16, Error::Kind::size_guard, "correlation_brute: N <= 16");
  const int L = spec.sites(), R = spec.rows();
  auto ins = insertions;
  for (auto [j, k] : ins)
    require(j >= 0 && j < L && k >= 0 && k < R, Error::Kind::invalid_argument, "correlation: insertion off lattice");
  std::stable_sort(ins.begin(), ins.end(), [](auto& a, auto& b) { return a.second < b.second; });

  const auto sp = spectral(transfer_matrices(spec).v_sym);
  auto dpow = [&](int p) { return sp.lambda.array().pow(p).matrix().asDiagonal(); };
  const double z = sp.lambda.array().pow(R).sum();
  if (ins.empty()) return 1.0;

  // tr(V^{R + k1 - kn} s1 V^{k2 - k1} s2 ... sn), everything in the eigenbasis.
  MatrixXd prod = dpow(R + ins.front().second - ins.back().second);
  for (std::size_t i = 0; i < ins.size(); ++i) {
    if (i > 0) prod = prod * dpow(ins[i].second - ins[i - 1].second);
    Eigen::VectorXd s(1 << L);
    for (int x = 0; x < s.size(); ++x) s(x) = spin_at(x, L, ins[i].first);
    prod = prod * (sp.Q.transpose() * s.asDiagonal() * sp.Q);
  }
  return prod.trace() / z;
}

double correlation_enumerated(const LatticeSpec& spec, const std::vector<std::pair<int, int>>& insertions) {
  spec.validate();
  const int L = spec.sites(), R = spec.rows();
  require(L * R <= 24, Error::Kind::size_guard, "enumeration limited to 24 spins");
  const unsigned row_mask = (1u << L) - 1;
  double z = 0, num = 0;
  for (unsigned long c = 0; c < (1ul << (L * R)); ++c) {
    int e1 = 0, e2 = 0;
    for (int k = 0; k < R; ++k) {
      const unsigned row = (c >> (k * L)) & row_mask;
      const unsigned next = (c >> (((k + 1) % R) * L)) & row_mask;
      const unsigned rot = ((row << 1) | (row >> (L - 1))) & row_mask;
      e1 += L - 2 * std::popcount(row ^ rot);
      e2 += L - 2 * std::popcount(row ^ next);
    }
    const double w = std::exp(spec.K1 * e1 + spec.K2 * e2);
    int s = 1;
    for (auto [j, k] : insertions) s *= spin_at((c >> (k * L)) & row_mask, L, j);
    z += w;
    num += s * w;
  }
  return num / z;
}

MatXc site_operator(int sites, int j, const Mat2c& op) {
  const int dim = 1 << sites;
  const int bit = bit_of(sites, j);
  MatXc out = MatXc::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    const int bc = (c >> bit) & 1;
    for (int br = 0; br < 2; ++br) {
      const int r = (c & ~(1 << bit)) | (br << bit);
      out(r, c) = op(br, bc);
    }
  }
  return out;
}

MatrixXd tfim_hamiltonian(int M, double t1, double t3, Boundary b) {
  require(M >= 1 && M <= 4, Error::Kind::size_guard, "tfim: need 1 <= M <= 4");
  const int L = 2 * M, dim = 1 << L;
  MatrixXd H = MatrixXd::Zero(dim, dim);
  for (int x = 0; x < dim; ++x) {
    H(x, x) = -t3 * bond_sum(x, L, b);
    for (int j = 0; j < L; ++j) H(x ^ (1 << bit_of(L, j)), x) -= t1;
  }
  return H;
}

double trotter_error(int M, double beta, double t1, double t3, int N) {
  require(N >= 1, Error::Kind::invalid_argument, "trotter: N >= 1");
  const double k1 = beta * t3 / N, k2star = beta * t1 / N;
  const LatticeSpec spec{M, 1, k1, dual_coupling(k2star)};
  const auto t = transfer_matrices(spec, Boundary::open);
  const double pref = std::pow(2 * std::sinh(2 * spec.K2), M);
  MatrixXd step = t.v_sym / pref;
  MatrixXd p = MatrixXd::Identity(step.rows(), step.cols());
  for (int i = 0; i < N; ++i) p = p * step;

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(tfim_hamiltonian(M, t1, t3, Boundary::open));
  const MatrixXd exact =
      es.eigenvectors() * (-beta * es.eigenvalues().array()).exp().matrix().asDiagonal() * es.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<MatrixXd> diff(p - exact, Eigen::EigenvaluesOnly);
  return diff.eigenvalues().cwiseAbs().maxCoeff();
}

MatXc gibbs_state(const MatrixXd& H, double beta) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  const auto& e = es.eigenvalues();
  const double e0 = e(0);
  Eigen::VectorXd w(e.size());
  for (int i = 0; i < e.size(); ++i) {
    if (std::isinf(beta))
      w(i) = (e(i) - e0 < 1e-10 * std::max(1.0, std::abs(e0))) ? 1.0 : 0.0;
    else
      w(i) = std::exp(-beta * (e(i) - e0));
  }
  w /= w.sum();
  const MatrixXd rho = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
  return rho.cast<cplx>();
}

MatXc JordanWigner::number() const {
  MatXc n = MatXc::Zero(parity.rows(), parity.cols());
  for (int j = 0; j < sites; ++j) n += adag(j) * a[j];
  return n;
}

VecXc JordanWigner::vacuum() const { return sigma1_product_state(sites, 0); }

VecXc JordanWigner::fock_state(const std::vector<int>& occupied) const {
  VecXc v = vacuum();
  for (auto it = occupied.rbegin(); it != occupied.rend(); ++it) v = adag(*it) * v;
  return v;
}

VecXc JordanWigner::fock_state_mask(unsigned mask) const {
  std::vector<int> occ;
  for (int j = 0; j < sites; ++j)
    if (mask >> j & 1u) occ.push_back(j);
  return fock_state(occ);
}

JordanWigner jordan_wigner_chain(int sites) {
  require(sites >= 1 && sites <= 8, Error::Kind::size_guard, "jordan_wigner: at most 8 sites");
  JordanWigner jw;
  jw.sites = sites;
  const int dim = 1 << sites;
  const Mat2c lower = (pauli(3) + cplx(0, 1) * pauli(2)) / 2.0;
  MatXc string = MatXc::Identity(dim, dim);
  for (int j = 0; j < sites; ++j) {
    jw.a.push_back(string * site_operator(sites, j, lower));
    string = string * site_operator(sites, j, pauli(1));
  }
  jw.parity = string;
  return jw;
}

VecXc sigma1_product_state(int sites, unsigned plus_mask) {
  VecXc v = VecXc::Ones(1);
  for (int j = 0; j < sites; ++j) {
    Eigen::Vector2cd s(1, (plus_mask >> j & 1u) ? 1.0 : -1.0);
    VecXc next(v.size() * 2);
    for (int i = 0; i < v.size(); ++i) next.segment(2 * i, 2) = v(i) * s / std::sqrt(2.0);
    v = next;
  }
  return v;
}

MatrixXd one_particle_disentangler(const Filter& f, int sites) {
  require(f.size() <= sites, Error::Kind::invalid_argument, "disentangler: filter longer than chain");
  require(sites % 2 == 0, Error::Kind::invalid_argument, "disentangler: chain length must be even");
  const auto g = high_pass(f);
  auto wrap = [&](int i) { return ((i % sites) + sites) % sites; };
  MatrixXd u = MatrixXd::Zero(sites, sites);
  for (int l = 0; l < sites; ++l) {
    if (l % 2 == 0)
      for (int i = 0; i < f.size(); ++i) u(wrap(l + f.support_offset + i), l) += f.coeffs(i);
    else
      for (int i = 0; i < g.size(); ++i) u(wrap(l + g.support_offset + i - 1), l) += g.coeffs(i);
  }
  return u;
}

namespace {

double det_minor(const MatrixXd& u, const std::vector<int>& rows, const std::vector<int>& cols) {
  const int n = static_cast<int>(rows.size());
  MatrixXd m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = u(rows[r], cols[c]);
  return n == 0 ? 1.0 : m.partialPivLu().determinant();
}

std::vector<int> modes_of(unsigned mask, int sites) {
  std::vector<int> out;
  for (int j = 0; j < sites; ++j)
    if (mask >> j & 1u) out.push_back(j);
  return out;
}

}  // namespace

MatXc second_quantize(const MatrixXd& u) {
  const int L = static_cast<int>(u.rows());
  const auto jw = jordan_wigner_chain(L);
  const int dim = 1 << L;
  MatXc F(dim, dim);
  for (unsigned m = 0; m < unsigned(dim); ++m) F.col(m) = jw.fock_state_mask(m);
  MatXc D = MatXc::Zero(dim, dim);
  for (unsigned r = 0; r < unsigned(dim); ++r)
    for (unsigned c = 0; c < unsigned(dim); ++c) {
      if (std::popcount(r) != std::popcount(c)) continue;
      D(r, c) = det_minor(u, modes_of(r, L), modes_of(c, L));
    }
  return F * D * F.adjoint();
}

MatXc disentangler_unitary(const Filter& f, int M) {
  require(M >= 1 && M <= 4, Error::Kind::size_guard, "disentangler: need 1 <= M <= 4");
  return second_quantize(one_particle_disentangler(f, 2 * M));
}

MatXc partial_trace_odd(const MatXc& rho, int sites) {
  require(sites % 2 == 0, Error::Kind::invalid_argument, "partial trace: even chain length required");
  const int dim = 1 << sites, half = sites / 2;
  auto split = [&](int x, int& even, int& odd) {
    even = odd = 0;
    for (int j = 0; j < sites; ++j) {
      const int b = (x >> bit_of(sites, j)) & 1;
      if (j % 2 == 0)
        even |= b << bit_of(half, j / 2);
      else
        odd |= b << (j / 2);
    }
  };
  std::vector<int> ev(dim), od(dim);
  for (int x = 0; x < dim; ++x) split(x, ev[x], od[x]);
  MatXc out = MatXc::Zero(1 << half, 1 << half);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      if (od[r] == od[c]) out(ev[r], ev[c]) += rho(r, c);
  return out;
}

MatXc embed_even(const MatXc& A, int small_sites) {
  const int sites = 2 * small_sites, dim = 1 << sites;
  MatXc out = MatXc::Zero(dim, dim);
  auto parts = [&](int x, int& even, int& odd) {
    even = odd = 0;
    for (int j = 0; j < sites; ++j) {
      const int b = (x >> bit_of(sites, j)) & 1;
      if (j % 2 == 0)
        even |= b << bit_of(small_sites, j / 2);
      else
        odd |= b << (j / 2);
    }
  };
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      int er, orr, ec, oc;
      parts(r, er, orr);
      parts(c, ec, oc);
      if (orr == oc) out(r, c) = A(er, ec);
    }
  return out;
}

void check_state(const MatXc& rho, double tol) {
  require(rho.rows() == rho.cols(), Error::Kind::invalid_argument, "state: not square");
  require((rho - rho.adjoint()).cwiseAbs().maxCoeff() <= tol, Error::Kind::invalid_argument, "state: not Hermitian");
  require(std::abs(rho.trace() - cplx(1)) <= tol, Error::Kind::invalid_argument, "state: trace is not one");
  Eigen::SelfAdjointEigenSolver<MatXc> es(rho, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -tol, Error::Kind::invalid_argument, "state: not positive");
}

MatXc coarse_grain_channel(const MatXc& rho, const MatXc& U) {
  const int dim = static_cast<int>(rho.rows());
  const int sites = std::countr_zero(unsigned(dim));
  require(dim == (1 << sites) && sites % 2 == 0, Error::Kind::invalid_argument,
          "channel: input must live on an even number of sites");
  require(U.rows() == dim && U.cols() == dim, Error::Kind::invalid_argument, "channel: unitary has the wrong size");
  check_state(rho);
  return partial_trace_odd(U.adjoint() * rho * U, sites);
}

MatXc coarse_grain_channel(const MatXc& rho, const Filter& f) {
  const int sites = std::countr_zero(unsigned(rho.rows()));
  require(sites % 2 == 0, Error::Kind::invalid_argument, "channel: input must live on an even number of sites");
  return coarse_grain_channel(rho, disentangler_unitary(f, sites / 2));
}

MatXc dual_channel(const MatXc& A, const MatXc& U) {
  const int small = std::countr_zero(unsigned(A.rows()));
  require(U.rows() == (1 << (2 * small)), Error::Kind::invalid_argument, "dual channel: unitary has the wrong size");
  return U * embed_even(A, small) * U.adjoint();
}

MatXc dual_channel(const MatXc& A, const Filter& f) {
  return dual_channel(A, disentangler_unitary(f, std::countr_zero(unsigned(A.rows()))));
}

MatXc two_point_matrix(const MatXc& rho, const JordanWigner& jw) {
  MatXc G(jw.sites, jw.sites);
  for (int i = 0; i < jw.sites; ++i)
    for (int j = 0; j < jw.sites; ++j) G(i, j) = (rho * jw.adag(i) * jw.a[j]).trace();
  return G;
}

std::vector<FlowStep> finite_flow(const FlowSpec& spec, const Filter& f, int m_steps) {
  require(spec.sites >= 2 && spec.sites <= 8 && spec.sites % 2 == 0, Error::Kind::size_guard,
          "flow: start chain must have 2, 4, 6 or 8 sites");
  require(m_steps >= 0 && spec.sites % (1 << m_steps) == 0, Error::Kind::size_guard,
          "flow: chain too short for the requested steps");
  std::vector<FlowStep> out;
  MatXc rho = gibbs_state(tfim_hamiltonian(spec.sites / 2, spec.t1, spec.t3, spec.boundary), spec.beta);
  int L = spec.sites;
  out.push_back({L, rho, two_point_matrix(rho, jordan_wigner_chain(L))});
  for (int m = 0; m < m_steps; ++m) {
    rho = coarse_grain_channel(rho, f);
    L /= 2;
    check_state(rho, 1e-10);
    out.push_back({L, rho, two_point_matrix(rho, jordan_wigner_chain(L))});
  }
  return out;
}

std::vector<OracleFixture> standard_fixtures() {
  std::vector<OracleFixture> fx;
  fx.push_back({"M=1,N=1,K1=0,K2=0", "partition_function", partition_function_brute({1, 1, 0, 0}), 1e-12});
  fx.push_back({"M=1,N=1,K1=0.3,K2=0.3", "partition_function", partition_function_brute({1, 1, 0.3, 0.3}), 1e-10});
  fx.push_back({"M=2,N=1,K1=0.2,K2=0.5", "partition_function", partition_function_brute({2, 1, 0.2, 0.5}), 1e-8});
  const LatticeSpec crit{2, 2, 0.4406867935097715, 0.4406867935097715};
  fx.push_back({"M=2,N=2,K=Kc", "corr_(0,0)_(1,0)", correlation_brute(crit, {{0, 0}, {1, 0}}), 1e-10});
  fx.push_back({"M=2,N=2,K=Kc", "corr_(0,0)_(0,1)", correlation_brute(crit, {{0, 0}, {0, 1}}), 1e-10});
  const auto rho = gibbs_state(tfim_hamiltonian(4, 1, 1, Boundary::open), std::numeric_limits<double>::infinity());
  const MatXc zz = site_operator(8, 3, pauli(3)) * site_operator(8, 4, pauli(3));
  fx.push_back({"tfim,L=8,open,t1=t3=1,ground", "s3_3_s3_4", (rho * zz).trace().real(), 1e-10});
  fx.push_back({"tfim,M=2,beta=1,N=16", "trotter_error", trotter_error(2, 1, 1, 1, 16), 1e-12});
  fx.push_back({"tfim,M=2,beta=1,N=64", "trotter_error", trotter_error(2, 1, 1, 1, 64), 1e-12});
  return fx;
}

void write_fixtures_json(std::ostream& os, const std::vector<OracleFixture>& fx) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& f : fx)
    j.push_back({{"spec", f.spec}, {"quantity", f.quantity}, {"value", f.value}, {"tolerance", f.tolerance}});
  os << j.dump(2) << '\n';
}

std::vector<OracleFixture> read_fixtures_json(std::istream& is) {
  const auto doc = nlohmann::json::parse(is);
  // Either a bare array or a report with a "fixtures" member.
  const auto& j = doc.is_object() ? doc.at("fixtures") : doc;
  std::vector<OracleFixture> fx;
  for (const auto& e : j)
    fx.push_back({e.at("spec").get<std::string>(), e.at("quantity").get<std::string>(), e.at("value").get<double>(),
                  e.at("tolerance").get<double>()});
  return fx;
}

}  // namespace oar
