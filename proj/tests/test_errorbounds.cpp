#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "oar/errorbounds.hpp"

using namespace oar;

namespace {

const SelfDualVector even0{SmearedVector::delta(0), SmearedVector{}};
const SelfDualVector odd0{SmearedVector{}, SmearedVector::delta(0)};
const SelfDualVector mixed{SmearedVector::delta(1, cplx(0.3, 0.2)), SmearedVector::delta(0, cplx(0, 1))};

const Filter& d8() {
  static const Filter f = make_daubechies_filter(4);
  return f;
}

}  // namespace

TEST(SupConstants, StaticPairAreOneHalf) {
  for (double tt : {0.25, 1.0}) {
    const auto s = sup_constants(tt);
    EXPECT_NEAR(s[0].value, 0.5, 1e-6);
    EXPECT_NEAR(s[1].value, 0.5, 1e-6);
    EXPECT_NEAR(s[0].closed_form, 0.5, 0);
  }
}

// With a = 2 t0 t 2^m both time-dependent sups are attained as k -> 0.
TEST(SupConstants, TimeDependentPairAreSmallMomentumLimits) {
  for (double tt : {0.25, 1.0})
    for (int m : {0, 1}) {
      const double a = 2 * tt * std::ldexp(1.0, m);
      const auto s = sup_constants(tt, m);
      EXPECT_NEAR(s[2].value, a / 24, 1e-4 * a) << tt << " " << m;
      EXPECT_NEAR(s[3].value, a * a / 24, 1e-4 * a * a) << tt << " " << m;
      EXPECT_EQ(s[2].argmax, 0);
      EXPECT_EQ(s[3].argmax, 0);
    }
}

TEST(SupConstants, ClosedFormsAreSixteenTimesLarger) {
  const auto s = sup_constants(0.25);
  EXPECT_NEAR(s[2].closed_form / s[2].value, 16, 1e-3);
  EXPECT_NEAR(s[3].closed_form / s[3].value, 16, 1e-3);
  EXPECT_NEAR(s[2].closed_form, 1.0 / 3, 1e-15);
  EXPECT_NEAR(s[3].closed_form, 1.0 / 6, 1e-15);
}

TEST(SobolevNorms, ShortFiltersDiverge) {
  for (int p : {2, 4}) {
    try {
      sobolev_norm(even0, make_daubechies_filter(p), 0.5, 1);
      FAIL() << "D" << 2 * p << " should be inadmissible";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), Error::Kind::inadmissible_filter);
      EXPECT_NE(std::string(e.what()).find("order 1"), std::string::npos);
    }
  }
}

TEST(SobolevNorms, LongerFilterFirstOrderOnly) {
  const Filter f = make_daubechies_filter(6);
  const double n1 = sobolev_norm(even0, f, 0.5, 1);
  EXPECT_NEAR(n1, 14.2364, 1e-3);
  // The unweighted norm is sqrt(int |s^|) at least; sanity floor.
  EXPECT_GT(n1, 1);
  EXPECT_THROW(sobolev_norm(even0, f, 0.5, 2), Error);
  EXPECT_THROW(sobolev_norms(even0, f, 0.5), Error);
}

TEST(SobolevNorms, ZeroVectorAndBadArguments) {
  const auto n = sobolev_norms(SelfDualVector{}, d8(), 0.5);
  for (double v : n) EXPECT_EQ(v, 0);
  EXPECT_THROW(sobolev_norm(even0, d8(), 0.5, 0), Error);
  EXPECT_THROW(sobolev_norm(even0, d8(), 0.5, 5), Error);
  EXPECT_THROW(sobolev_norm(even0, d8(), 0.0, 1), Error);
}

TEST(AssembleBound, UnitNorms) {
  const std::array<double, 4> one{1, 1, 1, 1};
  const auto b = assemble_bound(0, 0.5, 1, one, one);
  EXPECT_NEAR(b.components[0], (std::sqrt(2.0) + 1) / (2 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(b.components[1], 0.5, 1e-15);
  EXPECT_NEAR(b.components[2], 2.0 / 3, 1e-15);
  EXPECT_NEAR(b.components[3], 2.0 / 3, 1e-15);
  const double sum = b.components[0] + 0.5 + 4.0 / 3;
  EXPECT_NEAR(b.bound, std::sqrt(2.0) / (2 * pi) * sum, 1e-15);
  // Each extra step halves the prefactor and the last three terms once more.
  const auto b1 = assemble_bound(1, 0.5, 1, one, one);
  EXPECT_NEAR(b1.bound, std::sqrt(2.0) / (2 * pi) * (b.components[0] + sum) / 4, 1e-15);
}

TEST(AssembleBound, ZeroTimeIgnoresDynamicNorms) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto b = assemble_bound(3, 0, 1, {1, 2, inf, inf}, {1, 2, inf, inf});
  EXPECT_TRUE(std::isfinite(b.bound));
  EXPECT_EQ(b.components[2], 0);
  EXPECT_EQ(b.components[3], 0);
}

TEST(CertifiedBound, D8HasNoFiniteBound) {
  EXPECT_THROW(certified_bound(4, 0, 1, even0, odd0, d8()), Error);
  EXPECT_THROW(certified_bound(4, 0, 1, even0, odd0, d8(), 1.5), Error);
  const auto rows = bound_sweep(d8(), {2}, {0.0, 0.5}, 1, even0, odd0);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(std::isinf(r.certified_bound));
    EXPECT_FALSE(r.certified());
    EXPECT_NE(r.note.find("inadmissible"), std::string::npos);
    EXPECT_GT(r.empirical_error, 0);
  }
}

TEST(Dynamics, ZeroTimeMatchesRenormalizedState) {
  for (int m : {2, 6}) {
    const auto st = make_renormalized_state({covariance_lattice({1, 1}), d8(), m});
    for (const auto& [x, y] : {std::pair{even0, odd0}, {even0, mixed}, {mixed, mixed}})
      EXPECT_NEAR(std::abs(lattice_dynamical_two_point(m, 0, 1, x, y, d8()) - self_dual_two_point(st, x, y)), 0,
                  1e-10);
  }
}

TEST(Dynamics, ZeroTimeMatchesLimitState) {
  const auto st = make_limit_state(d8(), covariance_critical_limit());
  EXPECT_NEAR(std::abs(continuum_dynamical_two_point(0, 1, even0, mixed, d8()) - self_dual_two_point(st, even0, mixed)),
              0, 1e-9);
}

TEST(Dynamics, StaticDiagonalPairIsExact) {
  EXPECT_LT(empirical_error(4, 0, 1, even0, even0, d8()), 1e-9);
}

TEST(Dynamics, ErrorHalvesEachStep) {
  std::vector<int> ms{5, 6, 7, 8};
  std::vector<double> es;
  for (int m : ms) es.push_back(empirical_error(m, 0.5, 1, even0, odd0, d8()));
  EXPECT_NEAR(log2_slope(ms, es), -1, 0.05);
  EXPECT_NEAR(es[0], 0.0166541, 1e-6);
}

TEST(Dynamics, UnitaryPhasesKeepValuesBounded) {
  for (double t0 : {0.5, 1.0}) {
    const cplx v = lattice_dynamical_two_point(3, t0, 1, even0, even0, d8());
    EXPECT_LE(std::abs(v), 1 + 1e-12);
  }
}

TEST(Slope, ExactOnGeometricData) {
  EXPECT_NEAR(log2_slope({1, 2, 3}, {0.5, 0.25, 0.125}), -1, 1e-14);
  EXPECT_THROW(log2_slope({1}, {0.5}), Error);
}

TEST(BoundCsv, Header) {
  std::ostringstream os;
  BoundReport r;
  r.m = 2;
  r.empirical_error = 0.5;
  write_bound_csv(os, {r});
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "m,t0,empirical,bound,c1,c2,c3,c4");
  EXPECT_NE(os.str().find("2,0,0.5,0"), std::string::npos);
}
