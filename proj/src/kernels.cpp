#include "oar/kernels.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace oar {

namespace {

const cplx I{0, 1};

double tanh_beta(double beta, double x) {
  if (beta == infinite_beta) return x > 0 ? 1.0 : 0.0;
  return std::tanh(beta * x);
}

// I - tau [[0, -i conj u], [i u, 0]] for a unit phase u.
Mat2c from_phase(cplx u, double tau) {
  Mat2c K;
  K << 1, I * std::conj(u) * tau, -I * u * tau, 1;
  return K;
}

}  // namespace

double Couplings::lambda() const {
  if (t1 == 0) return -std::numeric_limits<double>::infinity();
  return 1 - t3 / t1;
}

void Couplings::validate() const {
  if (!(t1 > 0 || t3 > 0))
    throw Error(Error::Kind::degenerate_model, "degenerate model: t1 = t3 = 0");
  if (t1 < 0 || t3 < 0) throw Error(Error::Kind::invalid_argument, "couplings must be non-negative");
  if (!(beta >= 0)) throw Error(Error::Kind::invalid_argument, "beta must be >= 0 or infinite");
}

cplx z_theta(const Couplings& c, double theta) { return c.t1 - std::polar(1.0, theta) * c.t3; }

Mat2c one_particle_h(const Couplings& c, double theta) {
  const cplx z = z_theta(c, theta);
  Mat2c h;
  h << 0, -2.0 * I * std::conj(z), 2.0 * I * z, 0;
  return h;
}

Mat2c kms_covariance(const Mat2c& h, double beta) {
  Eigen::SelfAdjointEigenSolver<Mat2c> es(h);
  Eigen::Vector2d f;
  for (int i = 0; i < 2; ++i) {
    const double e = es.eigenvalues()(i);
    if (beta == infinite_beta) f(i) = e > 0 ? 0.0 : (e < 0 ? 2.0 : 1.0);
    else f(i) = 1 - std::tanh(beta * e / 2);  // 2/(e^{beta e}+1)
  }
  return es.eigenvectors() * f.asDiagonal() * es.eigenvectors().adjoint();
}

const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::lattice_beta: return "lattice_beta";
    case KernelKind::critical_lattice: return "critical_lattice";
    case KernelKind::critical_limit: return "critical_limit";
    case KernelKind::massive_thermal_limit: return "massive_thermal_limit";
  }
  return "?";
}

Mat2c CovarianceKernel::operator()(double p) const {
  switch (kind) {
    case KernelKind::lattice_beta:
    case KernelKind::critical_lattice: {
      const cplx z = z_theta(couplings, p);
      const double r = std::abs(z);
      if (r == 0) return Mat2c::Identity();  // removable point at criticality
      return from_phase(z / r, tanh_beta(couplings.beta, r));
    }
    case KernelKind::critical_limit: {
      const double s = sign(p);
      Mat2c K;
      K << 1, -s, -s, 1;
      return K;
    }
    case KernelKind::massive_thermal_limit: {
      // 2^m z at theta = 2^{-m} k tends to t (mu0 - i k).
      const double w = std::hypot(mu0, p);
      if (w == 0) return Mat2c::Identity();
      return from_phase(cplx(mu0, -p) / w, tanh_beta(beta0, couplings.t1 * w));
    }
  }
  return Mat2c::Identity();
}

CovarianceKernel covariance_lattice(const Couplings& c) {
  c.validate();
  CovarianceKernel K;
  K.couplings = c;
  K.kind = (c.t1 == c.t3 && c.ground_state()) ? KernelKind::critical_lattice : KernelKind::lattice_beta;
  return K;
}

CovarianceKernel covariance_critical_limit() {
  CovarianceKernel K;
  K.kind = KernelKind::critical_limit;
  return K;
}

CovarianceKernel covariance_massive_thermal(double mu0, double beta0, double t) {
  if (!(mu0 >= 0) || !(beta0 > 0) || !(t > 0))
    throw Error(Error::Kind::invalid_argument, "massive limit needs mu0 >= 0, beta0 > 0, t > 0");
  CovarianceKernel K;
  K.kind = KernelKind::massive_thermal_limit;
  K.mu0 = mu0;
  K.beta0 = beta0;
  K.couplings = Couplings{t, t, infinite_beta};
  return K;
}

void write_kernel_csv(std::ostream& os, const CovarianceKernel& K, const std::vector<double>& grid) {
  os << (K.is_lattice() ? "theta" : "k")
     << ",re_k11,im_k11,re_k12,im_k12,re_k21,im_k21,re_k22,im_k22\n"
     << std::setprecision(17);
  for (double p : grid) {
    const Mat2c C = K(p);
    os << p;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) os << ',' << C(r, c).real() << ',' << C(r, c).imag();
    os << '\n';
  }
}

}  // namespace oar
