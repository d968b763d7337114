#pragma once

#include <iosfwd>
#include <vector>

#include "oar/common.hpp"

namespace oar {

// Low-pass filter h_n, n = support_offset ... support_offset + size() - 1.
struct Filter {
  Eigen::VectorXd coeffs;
  int order = 0;
  int support_offset = 0;

  int size() const { return static_cast<int>(coeffs.size()); }
  // h_n with zero outside the support.
  double operator[](int n) const {
    const int i = n - support_offset;
    return (i >= 0 && i < size()) ? coeffs(i) : 0.0;
  }
};

struct HighPassFilter {
  Eigen::VectorXd coeffs;
  int support_offset = 0;
  Filter parent;

  int size() const { return static_cast<int>(coeffs.size()); }
  double operator[](int n) const {
    const int i = n - support_offset;
    return (i >= 0 && i < size()) ? coeffs(i) : 0.0;
  }
};

// Daubechies filter with p vanishing moments (length 2p), 1 <= p <= 10.
Filter make_daubechies_filter(int p);

HighPassFilter high_pass(const Filter& f);

// m0(theta) = 2^{-1/2} sum_n h_n e^{-i theta n}
cplx m0(const Filter& f, double theta);

// Worst violations of sum h = sqrt2 and sum h_n h_{n+2k} = delta_k0.
struct FilterCheck {
  double sum_error = 0;
  double orthonormality_error = 0;
  bool ok(double tol = 1e-12) const { return sum_error <= tol && orthonormality_error <= tol; }
};
FilterCheck check_filter(const Filter& f);

// Fourier transform of the scaling function as an infinite product of m0.
class ScalingFunctionFT {
 public:
  explicit ScalingFunctionFT(Filter f, double cutoff = 1e-8);

  const Filter& filter() const { return filter_; }
  // Depth P used at k: smallest P >= 1 with 2^{-P}|k| < cutoff.
  int depth(double k) const;
  cplx operator()(double k) const;
  double abs2(double k) const { return std::norm((*this)(k)); }

 private:
  Filter filter_;
  double cutoff_;
  double mu_;  // first moment 2^{-1/2} sum n h_n, for the Taylor pad
};

inline cplx s_hat(const ScalingFunctionFT& sf, double k) { return sf(k); }

// prod_{n=1}^{m} m0(2^{-n} k), no padding.
cplx truncated_product(const Filter& f, double k, int m);

// Plancherel tail 2pi - int_{-K}^{K} |s^|^2.
double tail_mass(const ScalingFunctionFT& sf, double K);

void write_filter_csv(std::ostream& os, const Filter& f);

}  // namespace oar
