#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "oar/rgflow.hpp"

namespace oar {

// Psi(xi, eta) = a(xi - i eta) + a^dag(conj(xi + i eta)).
struct SelfDualVector {
  SmearedVector xi;
  SmearedVector eta;

  SmearedVector annihilation_part() const { return xi - cplx(0, 1) * eta; }
  SmearedVector creation_part() const { return (xi + cplx(0, 1) * eta).conj(); }
};

// Psi(0, i delta_j) = a_j - a^dag_j and Psi(delta_j, 0) = a_j + a^dag_j.
inline SelfDualVector psi_odd(int j) { return {SmearedVector{}, SmearedVector::delta(j, cplx(0, 1))}; }
inline SelfDualVector psi_even(int j) { return {SmearedVector::delta(j), SmearedVector{}}; }

cplx self_dual_two_point(const QuasiFreeState& st, const SelfDualVector& v1, const SelfDualVector& v2);

// Largest |A + A^T| relative to max(1, max|A|).
template <typename Derived>
double antisymmetry_defect(const Eigen::MatrixBase<Derived>& A) {
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  return (A + A.transpose()).cwiseAbs().maxCoeff() / scale;
}

namespace detail {
void check_skew(Eigen::Index rows, Eigen::Index cols, double defect, double tol);
}

// Pfaffian by Parlett-Reid reduction with partial pivoting.
template <typename Derived>
typename Derived::Scalar pfaffian(const Eigen::MatrixBase<Derived>& A_in, double tol = 1e-13) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_skew(A_in.rows(), A_in.cols(), antisymmetry_defect(A_in), tol);
  Mat A = A_in;
  const Eigen::Index n = A.rows();
  Scalar pf(1);
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index kp;
    A.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&kp);
    kp += k + 1;
    if (kp != k + 1) {
      A.row(k + 1).swap(A.row(kp));
      A.col(k + 1).swap(A.col(kp));
      pf = -pf;
    }
    if (A(k + 1, k) == Scalar(0)) return Scalar(0);
    pf *= A(k, k + 1);
    if (k + 2 < n) {
      const auto m = n - k - 2;
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau = A.row(k).tail(m).transpose() / A(k, k + 1);
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c = A.col(k + 1).tail(m);
      A.bottomRightCorner(m, m) += tau * c.transpose() - c * tau.transpose();
    }
  }
  return pf;
}

// Sum over perfect matchings, written as the ordered-subset sum
// (-1)^{n(n-1)/2} sum eps(J,K) prod a_{j_i k_i}. Dimensions up to 12.
cplx pfaffian_combinatorial(const MatXc& A, double tol = 1e-13);

// Ordered factors of the strings for sorted sites, after cancelling repeats.
std::vector<SelfDualVector> spin_string_factors(const std::vector<int>& sites);

// omega(Psi Psi) for single-site factors, memoized on (type, type, offset) since
// the states are translation invariant. Not thread safe.
class SelfDualTable {
 public:
  explicit SelfDualTable(const QuasiFreeState& st) : st_(&st) {}
  cplx operator()(const SelfDualVector& v1, const SelfDualVector& v2);
  const QuasiFreeState& state() const { return *st_; }

 private:
  const QuasiFreeState* st_;
  std::map<std::tuple<int, int, int>, cplx> memo_;
};

MatXc skew_matrix(SelfDualTable& table, const std::vector<SelfDualVector>& factors);

struct SpinCorrelation {
  double value = 0;
  double imag_residue = 0;
  int factors = 0;
};

SpinCorrelation spin_spin_correlation(SelfDualTable& table, const std::vector<int>& sites);
SpinCorrelation spin_spin_correlation(const QuasiFreeState& st, const std::vector<int>& sites);

// C_d = omega(Psi(0, i delta_j) Psi(delta_j', 0)) with d = j - j'.
struct ToeplitzSymbol {
  std::map<int, double> entries;
  double at(int d) const;
};

// Lags -max_lag ... max_lag.
ToeplitzSymbol make_toeplitz_symbol(SelfDualTable& table, int max_lag);
ToeplitzSymbol make_toeplitz_symbol(const QuasiFreeState& st, int max_lag);

// det of the n x n matrix with (r, c) entry C_{c-r-1}.
double toeplitz_correlation(const ToeplitzSymbol& sym, int separation);

// Least-squares slope of log|value| against log d.
double fitted_decay_exponent(const std::vector<int>& separations, const std::vector<double>& values);

struct CorrelatorRow {
  int separation;
  double value;
  double tolerance;
};
void write_correlator_csv(std::ostream& os, const std::vector<CorrelatorRow>& rows, const std::string& filter,
                          const std::string& state_kind);

}  // namespace oar
