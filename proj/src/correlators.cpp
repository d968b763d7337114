#include "oar/correlators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <tuple>

namespace oar {

namespace detail {

void check_skew(Eigen::Index rows, Eigen::Index cols, double defect, double tol) {
  if (rows != cols) throw Error(Error::Kind::invalid_argument, "pfaffian: matrix is not square");
  if (rows % 2 != 0) throw Error(Error::Kind::invalid_argument, "pfaffian: odd dimension");
  if (defect > tol)
    throw Error(Error::Kind::antisymmetry, "pfaffian: antisymmetry violated by " + std::to_string(defect));
}

}  // namespace detail

namespace {

// sigma^2 = 1: keep the sites of odd multiplicity.
std::vector<int> reduce_sites(const std::vector<int>& sites) {
  std::vector<int> odd;
  for (std::size_t i = 0; i < sites.size();) {
    std::size_t j = i;
    while (j < sites.size() && sites[j] == sites[i]) ++j;
    if ((j - i) % 2) odd.push_back(sites[i]);
    i = j;
  }
  return odd;
}

}  // namespace

cplx self_dual_two_point(const QuasiFreeState& st, const SelfDualVector& v1, const SelfDualVector& v2) {
  const auto f1 = v1.annihilation_part(), g1 = v1.creation_part();
  const auto f2 = v2.annihilation_part(), g2 = v2.creation_part();
  // a a: conj of omega(a^dag(f2) a^dag(f1)); a^dag a from the CAR.
  const cplx aa = std::conj(st.adag_adag(f2, f1));
  const cplx a_ad = st.aa_dag(f1, g2);
  const cplx ad_a = inner(f2, g1) - st.aa_dag(f2, g1);
  const cplx ad_ad = st.adag_adag(g1, g2);
  return aa + a_ad + ad_a + ad_ad;
}

cplx pfaffian_combinatorial(const MatXc& A, double tol) {
  detail::check_skew(A.rows(), A.cols(), antisymmetry_defect(A), tol);
  const int dim = static_cast<int>(A.rows());
  if (dim > 12) throw Error(Error::Kind::size_guard, "combinatorial pfaffian limited to dim <= 12");
  if (dim == 0) return 1;
  const int n = dim / 2;

  // Sign of a permutation by counting inversions.
  auto parity = [](const std::vector<int>& p) {
    int inv = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = i + 1; j < p.size(); ++j) inv += p[i] > p[j];
    return inv % 2 ? -1 : 1;
  };

  std::vector<int> J, K;
  std::vector<bool> used(dim, false);
  cplx total = 0;
  std::function<void()> rec = [&] {
    int first = 0;
    while (first < dim && used[first]) ++first;
    if (first == dim) {
      std::vector<int> perm = J;
      perm.insert(perm.end(), K.begin(), K.end());
      cplx prod = 1;
      for (int i = 0; i < n; ++i) prod *= A(J[i], K[i]);
      total += double(parity(perm)) * prod;
      return;
    }
    used[first] = true;
    for (int k = first + 1; k < dim; ++k) {
      if (used[k]) continue;
      used[k] = true;
      J.push_back(first);
      K.push_back(k);
      rec();
      J.pop_back();
      K.pop_back();
      used[k] = false;
    }
    used[first] = false;
  };
  rec();
  return ((n * (n - 1) / 2) % 2 ? -1.0 : 1.0) * total;
}

std::vector<SelfDualVector> spin_string_factors(const std::vector<int>& sites) {
  if (!std::is_sorted(sites.begin(), sites.end()))
    throw Error(Error::Kind::invalid_argument, "spin correlator sites must be sorted");
  const auto odd = reduce_sites(sites);
  if (odd.size() % 2) return {};
  long total = 0;
  for (std::size_t p = 0; p < odd.size(); p += 2) total += 2L * (odd[p + 1] - odd[p]);
  if (total > 64) throw Error(Error::Kind::size_guard, "spin string longer than 64 factors");
  std::vector<SelfDualVector> out;
  for (std::size_t p = 0; p < odd.size(); p += 2)
    for (int l = odd[p]; l < odd[p + 1]; ++l) {
      out.push_back(psi_odd(l));
      out.push_back(psi_even(l + 1));
    }
  return out;
}

cplx SelfDualTable::operator()(const SelfDualVector& v1, const SelfDualVector& v2) {
  // Single-site factors only; anything else goes straight to the state.
  auto key = [](const SelfDualVector& v, int& type, int& pos) {
    if (v.xi.empty() && v.eta.size() == 1 && v.eta.values(0) == cplx(0, 1)) {
      type = 0;
      pos = v.eta.offset;
      return true;
    }
    if (v.eta.empty() && v.xi.size() == 1 && v.xi.values(0) == cplx(1)) {
      type = 1;
      pos = v.xi.offset;
      return true;
    }
    return false;
  };
  int t1, p1, t2, p2;
  if (!key(v1, t1, p1) || !key(v2, t2, p2)) return self_dual_two_point(*st_, v1, v2);
  const auto k = std::make_tuple(t1, t2, p1 - p2);
  auto it = memo_.find(k);
  if (it == memo_.end()) it = memo_.emplace(k, self_dual_two_point(*st_, v1, v2)).first;
  return it->second;
}

MatXc skew_matrix(SelfDualTable& table, const std::vector<SelfDualVector>& factors) {
  const int n = static_cast<int>(factors.size());
  MatXc A = MatXc::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = table(factors[i], factors[j]);
      A(j, i) = -A(i, j);
    }
  return A;
}

SpinCorrelation spin_spin_correlation(const QuasiFreeState& st, const std::vector<int>& sites) {
  SelfDualTable table(st);
  return spin_spin_correlation(table, sites);
}

SpinCorrelation spin_spin_correlation(SelfDualTable& table, const std::vector<int>& sites) {
  SpinCorrelation r;
  const auto factors = spin_string_factors(sites);
  r.factors = static_cast<int>(factors.size());
  if (factors.empty()) {
    // Either everything cancelled (value 1) or an odd count survived (value 0).
    r.value = reduce_sites(sites).empty() ? 1.0 : 0.0;
    return r;
  }
  const cplx pf = pfaffian(skew_matrix(table, factors));
  r.value = pf.real();
  r.imag_residue = pf.imag();
  return r;
}

double ToeplitzSymbol::at(int d) const {
  const auto it = entries.find(d);
  if (it == entries.end()) throw Error(Error::Kind::invalid_argument, "toeplitz: missing lag " + std::to_string(d));
  return it->second;
}

ToeplitzSymbol make_toeplitz_symbol(SelfDualTable& table, int max_lag) {
  ToeplitzSymbol s;
  for (int d = -max_lag; d <= max_lag; ++d) s.entries[d] = table(psi_odd(d), psi_even(0)).real();
  return s;
}

ToeplitzSymbol make_toeplitz_symbol(const QuasiFreeState& st, int max_lag) {
  SelfDualTable table(st);
  return make_toeplitz_symbol(table, max_lag);
}

double toeplitz_correlation(const ToeplitzSymbol& sym, int separation) {
  if (separation < 1) throw Error(Error::Kind::invalid_argument, "toeplitz: separation must be >= 1");
  Eigen::MatrixXd T(separation, separation);
  for (int r = 0; r < separation; ++r)
    for (int c = 0; c < separation; ++c) T(r, c) = sym.at(c - r - 1);
  return T.partialPivLu().determinant();
}

double fitted_decay_exponent(const std::vector<int>& separations, const std::vector<double>& values) {
  if (separations.size() != values.size() || separations.size() < 2)
    throw Error(Error::Kind::invalid_argument, "exponent fit needs at least two matching points");
  const double n = static_cast<double>(values.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (separations[i] <= 0 || values[i] == 0)
      throw Error(Error::Kind::invalid_argument, "exponent fit needs positive separations and nonzero values");
    mx += std::log(separations[i]) / n;
    my += std::log(std::abs(values[i])) / n;
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dx = std::log(separations[i]) - mx;
    num += dx * (std::log(std::abs(values[i])) - my);
    den += dx * dx;
  }
  return num / den;
}

void write_correlator_csv(std::ostream& os, const std::vector<CorrelatorRow>& rows, const std::string& filter,
                          const std::string& state_kind) {
  os << "separation,value,quadrature_tolerance,filter,state_kind\n" << std::setprecision(17);
  for (const auto& r : rows)
    os << r.separation << ',' << r.value << ',' << r.tolerance << ',' << filter << ',' << state_kind << '\n';
}

}  // namespace oar
