#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "oar/common.hpp"

namespace oar {

inline constexpr double infinite_beta = std::numeric_limits<double>::infinity();

// Transverse-field Ising couplings: H = -sum(t3 s3 s3 + t1 s1) at inverse temperature beta.
struct Couplings {
  double t1 = 1;
  double t3 = 1;
  double beta = infinite_beta;

  bool ground_state() const { return beta == infinite_beta; }
  // lambda = 1 - t3/t1; -inf when t1 = 0.
  double lambda() const;
  void validate() const;
};

cplx z_theta(const Couplings& c, double theta);

// h(theta) = 2 [[0, -i conj z], [i z, 0]] in the (a, a^dagger) block layout.
Mat2c one_particle_h(const Couplings& c, double theta);

// 2 (e^{beta h} + 1)^{-1} by eigendecomposition; beta may be infinite.
Mat2c kms_covariance(const Mat2c& h, double beta);

enum class KernelKind { lattice_beta, critical_lattice, critical_limit, massive_thermal_limit };

const char* to_string(KernelKind k);

// Momentum-space covariance. Lattice kinds take theta in radians, limit kinds take k.
// Every kernel has the form I - tau U with U a Hermitian involution, so the
// whole state is fixed by the (2,1) entry.
class CovarianceKernel {
 public:
  KernelKind kind = KernelKind::critical_limit;
  Couplings couplings;
  double mu0 = 0;
  double beta0 = infinite_beta;

  bool is_lattice() const {
    return kind == KernelKind::lattice_beta || kind == KernelKind::critical_lattice;
  }
  Mat2c operator()(double p) const;
};

CovarianceKernel covariance_lattice(const Couplings& c);
CovarianceKernel covariance_critical_limit();
CovarianceKernel covariance_massive_thermal(double mu0, double beta0, double t);

// Columns: p, then Re/Im of K11, K12, K21, K22.
void write_kernel_csv(std::ostream& os, const CovarianceKernel& K, const std::vector<double>& grid);

}  // namespace oar
