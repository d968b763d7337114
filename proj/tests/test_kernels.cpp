#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oar/kernels.hpp"

using namespace oar;

namespace {

double max_abs(const Mat2c& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ZTheta, Substitutions) {
  const Couplings c{1, 1, infinite_beta};
  EXPECT_NEAR(std::abs(z_theta(c, pi) - 2.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(z_theta(Couplings{0.7, 0.7}, 0.0)), 0, 1e-15);
  EXPECT_NEAR(std::norm(z_theta(c, 1.3)), 4 * std::pow(std::sin(0.65), 2), 1e-14);
}

TEST(OneParticleH, SpectrumTraceSquare) {
  const Couplings c{1, 1};
  Eigen::SelfAdjointEigenSolver<Mat2c> es(one_particle_h(c, pi));
  EXPECT_NEAR(es.eigenvalues()(0), -4, 1e-14);
  EXPECT_NEAR(es.eigenvalues()(1), 4, 1e-14);
  for (double th = -3; th < 3; th += 0.25) EXPECT_NEAR(std::abs(one_particle_h(c, th).trace()), 0, 1e-15);

  const Couplings d{1, 0.5};
  const Mat2c h = one_particle_h(d, 0.4);
  const Mat2c ref = 4 * std::norm(z_theta(d, 0.4)) * Mat2c::Identity();
  EXPECT_LT(max_abs(h * h - ref), 1e-14);
  EXPECT_LT(max_abs(h - h.adjoint()), 1e-15);
}

TEST(CovarianceLattice, MatchesMatrixFunctionOnGrid) {
  for (double beta : {0.1, 1.0, 10.0, infinite_beta}) {
    for (const Couplings base : {Couplings{1, 1}, Couplings{1, 0.5}, Couplings{0.3, 1.2}}) {
      Couplings c = base;
      c.beta = beta;
      const auto K = covariance_lattice(c);
      for (int i = 0; i < 1024; ++i) {
        const double th = -pi + (i + 0.5) * 2 * pi / 1024;
        const Mat2c ref = kms_covariance(one_particle_h(c, th), beta);
        EXPECT_LT(max_abs(K(th) - ref), 1e-10) << "beta=" << beta << " theta=" << th;
      }
    }
  }
}

TEST(CovarianceLattice, RandomPostCheck) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> th(-pi, pi), lb(-3, 3), tt(0.1, 2);
  for (int i = 0; i < 10; ++i) {
    Couplings c{tt(rng), tt(rng), std::pow(10.0, lb(rng))};
    const double x = th(rng);
    EXPECT_LT(max_abs(covariance_lattice(c)(x) - kms_covariance(one_particle_h(c, x), c.beta)), 1e-12);
  }
}

TEST(CovarianceLattice, CriticalGroundStateClosedForm) {
  const auto K = covariance_lattice(Couplings{1, 1, infinite_beta});
  EXPECT_EQ(K.kind, KernelKind::critical_lattice);
  const double th = 1.0;
  const double den = 2 * std::abs(std::sin(th / 2));
  const cplx I{0, 1};
  EXPECT_NEAR(std::abs(K(th)(0, 1) - I * (1.0 - std::polar(1.0, -th)) / den), 0, 1e-14);
  EXPECT_NEAR(std::abs(K(th)(1, 0) + I * (1.0 - std::polar(1.0, th)) / den), 0, 1e-14);
  EXPECT_NEAR(std::abs(K(th)(0, 0) - 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(K(th)(1, 1) - 1.0), 0, 1e-15);
}

TEST(CovarianceLattice, ZeroBetaIsIdentity) {
  const auto K = covariance_lattice(Couplings{1, 0.6, 0.0});
  for (double th = -3; th < 3; th += 0.3) EXPECT_LT(max_abs(K(th) - Mat2c::Identity()), 1e-15);
}

TEST(CovarianceLattice, GroundStateIsTwiceAProjector) {
  for (const Couplings c : {Couplings{1, 1}, Couplings{1, 0.2}, Couplings{0.2, 1}}) {
    const auto K = covariance_lattice(c);
    for (double th = -3.1; th < 3.1; th += 0.17) {
      Eigen::SelfAdjointEigenSolver<Mat2c> es(K(th));
      EXPECT_NEAR(es.eigenvalues()(0), 0, 1e-12);
      EXPECT_NEAR(es.eigenvalues()(1), 2, 1e-12);
    }
  }
}

TEST(CovarianceLattice, HermitianWithSpectrumInRange) {
  for (double beta : {0.3, 3.0, infinite_beta}) {
    const auto K = covariance_lattice(Couplings{0.8, 1.1, beta});
    for (double th = -3.1; th < 3.1; th += 0.05) {
      const Mat2c C = K(th);
      EXPECT_LT(max_abs(C - C.adjoint()), 1e-14);
      Eigen::SelfAdjointEigenSolver<Mat2c> es(C);
      EXPECT_GE(es.eigenvalues()(0), -1e-12);
      EXPECT_LE(es.eigenvalues()(1), 2 + 1e-12);
    }
  }
}

TEST(CovarianceLattice, DegenerateModelThrows) {
  EXPECT_THROW(covariance_lattice(Couplings{0, 0}), Error);
}

// The scaling limit of the critical lattice kernel: 2^{-m} k -> 0 sends
// z/|z| to -i sign(k), so the off-diagonal entries tend to -sign(k).
TEST(CovarianceCriticalLimit, SignTable) {
  const auto C = covariance_critical_limit();
  Mat2c pos, neg;
  pos << 1, -1, -1, 1;
  neg << 1, 1, 1, 1;
  EXPECT_LT(max_abs(C(3.2) - pos), 1e-15);
  EXPECT_LT(max_abs(C(-3.2) - neg), 1e-15);
  EXPECT_LT(max_abs(C(0.0) - Mat2c::Identity()), 1e-15);
}

TEST(CovarianceCriticalLimit, IsLimitOfLatticeKernel) {
  const auto L = covariance_lattice(Couplings{1, 1});
  const auto C = covariance_critical_limit();
  for (double k : {-5.0, -0.3, 0.4, 7.0}) EXPECT_LT(max_abs(L(std::ldexp(k, -30)) - C(k)), 1e-8);
}

TEST(CovarianceMassiveThermal, Reductions) {
  const auto crit = covariance_critical_limit();
  const auto M0 = covariance_massive_thermal(0, infinite_beta, 1);
  for (double k : {-2.0, -0.1, 0.3, 4.0}) EXPECT_LT(max_abs(M0(k) - crit(k)), 1e-15);

  const auto M = covariance_massive_thermal(0.5, 2.0, 1.5);
  const Mat2c K0 = M(0.0);
  EXPECT_NEAR(K0(0, 1).real(), 0, 1e-15);
  EXPECT_NEAR(K0(0, 1).imag(), std::tanh(2.0 * 1.5 * 0.5), 1e-15);
  EXPECT_NEAR(std::abs(K0(0, 1) + K0(1, 0)), 0, 1e-15);
  EXPECT_NEAR(std::pow(std::hypot(0.5, 2.0), 2) - 4.0, 0.25, 1e-15);
}

TEST(CovarianceMassiveThermal, IsScalingLimitOfLattice) {
  const double mu0 = 0.8, beta0 = 1.3, t = 1.0;
  const auto M = covariance_massive_thermal(mu0, beta0, t);
  const int m = 26;
  const double lam = std::ldexp(mu0, -m);
  const auto L = covariance_lattice(Couplings{t, t * (1 - lam), std::ldexp(beta0, m)});
  for (double k : {-3.0, -0.2, 0.0, 0.5, 6.0}) EXPECT_LT(max_abs(L(std::ldexp(k, -m)) - M(k)), 1e-6);
}

TEST(Kernel, CsvLayout) {
  std::ostringstream os;
  write_kernel_csv(os, covariance_critical_limit(), {-1.0, 0.0, 1.0});
  const auto s = os.str();
  EXPECT_EQ(s.rfind("k,re_k11,im_k11,re_k12,im_k12,re_k21,im_k21,re_k22,im_k22\n", 0), 0u);
  EXPECT_NE(s.find("\n1,1,0,-1,0,-1,0,1,0\n"), std::string::npos);
}
