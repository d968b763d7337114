#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "oar/correlators.hpp"

namespace oar {

struct SupConstant {
  std::string name;
  double value;        // numerical sup over k > 0 (all four are even in k)
  double argmax;       // where it was found; 0 means the k -> 0 limit
  double closed_form;  // the value claimed in closed form
};

// The four sups entering the final estimate, with a = 2 t0t 2^m:
//   |k|^-1 |i(1 - e^{ik}) / (2 sin(k/2)) - 1|
//   |k|^-2 |1 - cos k|
//   |k|^-3 |sin(a 2|sin(k/2)|) - sin(a|k|)|
//   |k|^-4 |cos(a 2|sin(k/2)|) - cos(a|k|)|
std::array<SupConstant, 4> sup_constants(double t0t = 0.25, int m = 0);

// ( int (1 + k^2)^order |s^(k)|^{2w} ||(xi^, eta^)(k)||^2 dk )^{1/2} for
// order = 1..4. Throws inadmissible_filter when the dyadic shells stop shrinking.
double sobolev_norm(const SelfDualVector& v, const Filter& f, double w, int order);
std::array<double, 4> sobolev_norms(const SelfDualVector& v, const Filter& f, double w);

struct BoundTerms {
  double bound = 0;
  std::array<double, 4> components{};  // the bracketed terms, before 2^{-m} sqrt2 / 2pi
};

// 2^{-m} (sqrt2 / 2pi) [ (sqrt2 + 1)/(2 sqrt2) N1 N1' + 2^{-m} (1/2) N2 N2'
//                       + 2^{-m} (4/3)|t0 t| N3 N3' + 2^{-m} (8/3)(t0 t)^2 N4 N4' ]
BoundTerms assemble_bound(int m, double t0, double t, const std::array<double, 4>& n1,
                          const std::array<double, 4>& n2);

// N from v1 with weight 1 - gamma and v2 with weight gamma.
BoundTerms certified_bound(int m, double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                           const Filter& f, double gamma = 0.5);

// <R^m v1, C_inf e^{i 2^m t0 h} R^m conj(v2)> on the critical lattice with
// t1 = t3 = t, and the continuum value <R_inf v1, C e^{i t0 2tk sigma1} R_inf conj(v2)>.
cplx lattice_dynamical_two_point(int m, double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                                 const Filter& f, const QuadratureSpec& q = {});
cplx continuum_dynamical_two_point(double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                                   const Filter& f, const QuadratureSpec& q = {});
double empirical_error(int m, double t0, double t, const SelfDualVector& v1, const SelfDualVector& v2,
                       const Filter& f, const QuadratureSpec& q = {});

struct BoundReport {
  int m = 0;
  double t0 = 0;
  double empirical_error = 0;
  double certified_bound = 0;  // +inf when the norms diverge
  std::array<double, 4> components{};
  std::string note;

  bool certified() const;  // finite bound that actually bounds, up to 1e-8
};

std::vector<BoundReport> bound_sweep(const Filter& f, const std::vector<int>& ms, const std::vector<double>& t0s,
                                     double t, const SelfDualVector& v1, const SelfDualVector& v2,
                                     double gamma = 0.5);

// Least-squares slope of log2(error) against m.
double log2_slope(const std::vector<int>& ms, const std::vector<double>& errors);

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& rows);

}  // namespace oar
