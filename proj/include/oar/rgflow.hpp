#pragma once

#include <array>
#include <string>
#include <vector>

#include "oar/kernels.hpp"
#include "oar/quadrature.hpp"
#include "oar/wavelet.hpp"

namespace oar {

// Finitely supported sequence xi_j, j = offset ... offset + size() - 1.
struct SmearedVector {
  int offset = 0;
  VecXc values;

  SmearedVector() = default;
  SmearedVector(int off, VecXc v) : offset(off), values(std::move(v)) {}

  static SmearedVector delta(int j, cplx c = 1.0);
  static SmearedVector zero() { return {}; }

  int size() const { return static_cast<int>(values.size()); }
  bool empty() const { return values.size() == 0; }
  cplx operator[](int j) const {
    const int i = j - offset;
    return (i >= 0 && i < size()) ? values(i) : cplx(0);
  }

  // sum_j e^{-i theta j} xi_j
  cplx fourier(double theta) const;
  SmearedVector conj() const;
};

SmearedVector operator+(const SmearedVector& a, const SmearedVector& b);
SmearedVector operator*(cplx c, const SmearedVector& a);
inline SmearedVector operator-(const SmearedVector& a, const SmearedVector& b) { return a + (-1.0) * b; }
// <a, b> = sum conj(a_j) b_j
cplx inner(const SmearedVector& a, const SmearedVector& b);

// (R xi)_x = sum_j h_{x - 2j} xi_j, the one-particle isometry of one RG step.
SmearedVector apply_isometry(const Filter& f, const SmearedVector& xi, int steps = 1);

// <R^m xi, R^m eta> evaluated in momentum space with the product formula.
cplx isometry_inner_product(const Filter& f, int m, const SmearedVector& xi, const SmearedVector& eta,
                            const QuadratureSpec& q = {});

enum class Pairing { aa_dag, adag_adag };

struct RenormalizedState {
  CovarianceKernel base;
  Filter filter;
  int m = 0;
};

// A quasi-free state on the CAR algebra over l^2(Z), stored as a tabulated
// (2,1) kernel entry against a spectral density. With w the density,
//   w(a(xi) a^dag(eta))     = <xi,eta>/2 + (1/2pi) int w (Im K21 / 2) conj(xi^) eta^
//   w(a^dag(xi) a^dag(eta)) =              (1/2pi) int w (i Re K21 / 2) xi^(-p) eta^(p)
// The constant half is exact because the density periodizes to one.
class QuasiFreeState {
 public:
  struct Node {
    double p;   // momentum at which the Fourier factors are read
    double w;   // quadrature weight times density / 2pi
    cplx k21;   // kernel entry
  };

  QuasiFreeState() = default;
  QuasiFreeState(std::string label, std::vector<Node> coarse, std::vector<Node> fine, double rtol,
                 double atol);

  cplx aa_dag(const SmearedVector& xi, const SmearedVector& eta) const;
  cplx adag_adag(const SmearedVector& xi, const SmearedVector& eta) const;
  cplx two_point(const SmearedVector& xi, const SmearedVector& eta, Pairing which) const {
    return which == Pairing::aa_dag ? aa_dag(xi, eta) : adag_adag(xi, eta);
  }

  const std::string& label() const { return label_; }
  const std::vector<Node>& nodes() const { return fine_; }
  // Largest |fine - coarse| seen so far, for diagnostics.
  double last_error() const { return last_error_; }

 private:
  template <typename F>
  cplx evaluate(F&& term) const;

  friend QuasiFreeState make_limit_state(const Filter&, const CovarianceKernel&, const QuadratureSpec&);

  std::string label_;
  std::string tail_error_;  // set when the a^dag a^dag density cannot be truncated
  std::vector<Node> coarse_, fine_;
  double rtol_ = 1e-9, atol_ = 1e-13;
  mutable double last_error_ = 0;
};

// omega^(m) = omega o alpha^m for a lattice base kernel. The theta form is used
// below m = 6, the k = 2^m theta form from m = 6 on.
QuasiFreeState make_renormalized_state(const RenormalizedState& st, const QuadratureSpec& q = {});

// Limit state with density |s^(k)|^2 on [-K, K]; K is the smallest 2pi 2^j with
// tail mass below 1e-10, at most 2^9 pi.
QuasiFreeState make_limit_state(const Filter& f, const CovarianceKernel& limit, const QuadratureSpec& q = {});

double choose_kmax(const ScalingFunctionFT& sf, double tail_tol = 1e-10, double cap = 512 * pi);

cplx renormalized_two_point(const RenormalizedState& st, const SmearedVector& xi, const SmearedVector& eta,
                            Pairing which, const QuadratureSpec& q = {});

cplx limit_two_point(const Filter& f, const SmearedVector& xi, const SmearedVector& eta, Pairing which,
                     const QuadratureSpec& q = {});

// Chiral Majorana vacuum two-point function; mixed chirality is identically zero.
cplx majorana_two_point(const Filter& f, int chirality, const SmearedVector& xi, const SmearedVector& eta,
                        const QuadratureSpec& q = {}, int chirality2 = 0);

cplx massive_thermal_two_point(const Filter& f, double mu0, double beta0, double t, const SmearedVector& xi,
                               const SmearedVector& eta, Pairing which, const QuadratureSpec& q = {});

// Lattice couplings whose m-step flow approaches the massive thermal limit:
// t1 = t, t3 = t (1 - 2^{-m} mu0), beta = 2^m beta0 (calibration constant 1).
Couplings massive_thermal_couplings(double mu0, double beta0, double t, int m);

enum class FlowDestination { critical, disorder_fixed_point, order_fixed_point };
const char* to_string(FlowDestination d);

struct FlowClassification {
  FlowDestination destination;
  double lambda;
  std::array<int, 3> steps{4, 8, 12};
  std::array<double, 3> distance{};  // sup over probe momenta of |K(2^{-m}k) - K_target(k)|
};

// Kernel the ground-state flow is driven to, read at momentum k.
Mat2c fixed_point_kernel(FlowDestination d, double k);

FlowClassification classify_flow(const Couplings& c, double probe_k = 0.1);

}  // namespace oar
