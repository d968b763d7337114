// One line per acceptance criterion. Usage: acceptance [--criterion N]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oar/errorbounds.hpp"
#include "oar/lattice_oracle.hpp"

using namespace oar;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

MatXc random_skew(int n, std::mt19937& gen) {
  std::normal_distribution<double> nd;
  MatXc A = MatXc::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      A(i, j) = cplx(nd(gen), nd(gen));
      A(j, i) = -A(i, j);
    }
  return A;
}

MatXc random_matrix(int n, std::mt19937& gen) {
  std::normal_distribution<double> nd;
  MatXc g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cplx(nd(gen), nd(gen));
  return g;
}

Outcome oracle_identity() {
  double worst = 0;
  int cases = 0;
  for (int M = 1; M <= 4; ++M)
    for (int N = 1; 4 * M * N <= 24; ++N) {
      const auto h = bond_histogram(M, N);
      for (double K : {0.1, 0.4407, 1.0}) {
        const auto v = transfer_matrices({M, N, K, K}).v;
        Eigen::MatrixXd p = Eigen::MatrixXd::Identity(v.rows(), v.cols());
        for (int i = 0; i < 2 * N; ++i) p = p * v;
        const double z = partition_function(h, K, K);
        worst = std::max(worst, std::abs(p.trace() - z) / z);
        ++cases;
      }
    }
  return {worst < 1e-12, std::to_string(cases) + " cases, worst relative error " + fmt(worst)};
}

Outcome channel_correctness() {
  std::mt19937 gen(2024);
  double unit = 0, tp = 0, dual = 0;
  for (int p : {1, 2})
    for (int M : {2, 4}) {
      const Filter f = make_daubechies_filter(p);
      const MatXc U = disentangler_unitary(f, M);
      unit = std::max(unit, (U.adjoint() * U - MatXc::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff());
      const int dim = 1 << (2 * M), small = 1 << M;
      for (int r = 0; r < 20; ++r) {
        const MatXc g = random_matrix(dim, gen);
        MatXc rho = g * g.adjoint();
        rho /= rho.trace();
        const MatXc A = random_matrix(small, gen);
        const MatXc e = coarse_grain_channel(rho, U);
        tp = std::max(tp, std::abs(e.trace() - 1.0));
        dual = std::max(dual, std::abs((e * A).trace() - (rho * dual_channel(A, U)).trace()));
      }
    }
  return {unit < 1e-12 && tp < 1e-13 && dual < 1e-11,
          "unitarity " + fmt(unit) + ", trace " + fmt(tp) + ", duality " + fmt(dual) + " over 80 pairs"};
}

Outcome critical_convergence() {
  bool ok = true;
  std::string detail;
  for (int p : {2, 4}) {
    const Filter f = make_daubechies_filter(p);
    const auto d0 = SmearedVector::delta(0);
    const cplx lim = limit_two_point(f, d0, d0, Pairing::aa_dag);
    std::vector<int> ms{4, 6, 8, 10};
    std::vector<double> es;
    for (int m : ms) es.push_back(std::abs(renormalized_two_point({covariance_lattice({1, 1}), f, m}, d0, d0,
                                                                  Pairing::aa_dag) - lim));
    const bool mono = es[0] > es[1] && es[1] > es[2] && es[2] > es[3];
    const double slope = log2_slope(ms, es);
    ok = ok && mono && std::abs(slope + 1) <= 0.3 && es.back() < 1e-3;
    detail += "D" + std::to_string(2 * p) + " slope " + fmt(slope) + ", m=10 error " + fmt(es.back()) +
              (mono ? "" : " (not monotone)") + "; ";
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome sup_identities() {
  bool ok = true;
  std::string detail;
  for (double tt : {0.25, 1.0}) {
    const auto s = sup_constants(tt);
    const double e0 = std::abs(s[0].value - s[0].closed_form), e1 = std::abs(s[1].value - s[1].closed_form);
    const double e2 = std::abs(s[2].value - s[2].closed_form), e3 = std::abs(s[3].value - s[3].closed_form);
    ok = ok && e0 < 1e-6 && e1 < 1e-6 && e2 < 1e-4 && e3 < 1e-4;
    detail += "t0t=" + fmt(tt) + ": static " + fmt(std::max(e0, e1)) + ", sin " + fmt(s[2].value) + " vs " +
              fmt(s[2].closed_form) + ", cos " + fmt(s[3].value) + " vs " + fmt(s[3].closed_form) + "; ";
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

Outcome error_bound() {
  const Filter f = make_daubechies_filter(4);
  const SelfDualVector v1{SmearedVector::delta(0), SmearedVector{}}, v2{SmearedVector{}, SmearedVector::delta(0)};
  const auto rows = bound_sweep(f, {2, 4, 6, 8}, {0, 0.5, 1}, 1, v1, v2, 0.5);
  int violations = 0;
  double worst_emp = 0;
  for (const auto& r : rows) {
    violations += !r.certified();
    worst_emp = std::max(worst_emp, r.empirical_error);
  }
  std::vector<int> ms{5, 6, 7, 8, 9, 10};
  std::vector<double> es;
  for (int m : ms) es.push_back(empirical_error(m, 0.5, 1, v1, v2, f));
  const double slope = log2_slope(ms, es);
  std::string detail = std::to_string(violations) + "/" + std::to_string(rows.size()) +
                       " grid points without a finite bound above the error (largest error " + fmt(worst_emp) +
                       "), slope " + fmt(slope);
  if (violations && !rows.front().note.empty()) detail += "; " + rows.front().note;
  return {violations == 0 && std::abs(slope + 1) <= 0.2, detail};
}

Outcome pfaffian_machinery() {
  std::mt19937 gen(7);
  double agree = 0, square = 0;
  for (int r = 0; r < 100; ++r) {
    const MatXc A = random_skew(2 + 2 * (r % 4), gen);
    const cplx pf = pfaffian(A);
    agree = std::max(agree, std::abs(pf - pfaffian_combinatorial(A)) / std::max(1.0, std::abs(pf)));
    const cplx det = A.determinant();
    square = std::max(square, std::abs(pf * pf - det) / std::max(1.0, std::abs(det)));
  }
  return {agree < 1e-10 && square < 1e-10, "factorization vs sum " + fmt(agree) + ", Pf^2 - det " + fmt(square)};
}

Outcome spin_correlators() {
  const auto st = make_limit_state(make_daubechies_filter(4), covariance_critical_limit());
  SelfDualTable table(st);
  const auto sym = make_toeplitz_symbol(table, 13);
  double diff = 0, imag = 0, range = 0;
  std::vector<int> ds;
  std::vector<double> vs;
  for (int d = 1; d <= 12; ++d) {
    const auto s = spin_spin_correlation(table, {0, d});
    if (d <= 10) diff = std::max(diff, std::abs(s.value - toeplitz_correlation(sym, d)));
    imag = std::max(imag, s.imag_residue);
    range = std::max(range, std::abs(s.value) - 1);
    if (d >= 6) {
      ds.push_back(d);
      vs.push_back(s.value);
    }
  }
  double odd = 0;
  for (const std::vector<int>& sites : {std::vector<int>{0}, {0, 1, 3}, {0, 2, 5, 7, 9}})
    odd = std::max(odd, std::abs(spin_spin_correlation(table, sites).value));
  const double slope = fitted_decay_exponent(ds, vs);
  const bool ok = diff < 1e-10 && odd == 0 && imag < 1e-9 && range <= 0 && std::abs(slope + 0.25) <= 0.05;
  return {ok, "Pf vs Toeplitz " + fmt(diff) + ", odd " + fmt(odd) + ", imaginary " + fmt(imag) +
                  ", fitted exponent " + fmt(slope) + " (want -0.25 +/- 0.05)"};
}

Outcome instability() {
  const auto dis = classify_flow({1, 0.5});
  const auto ord = classify_flow({0.5, 1});
  const auto crit = classify_flow({1, 1});
  const bool ok = dis.destination == FlowDestination::disorder_fixed_point &&
                  ord.destination == FlowDestination::order_fixed_point &&
                  crit.destination == FlowDestination::critical && dis.distance[2] < 1e-4 && ord.distance[2] < 1e-4;
  return {ok, std::string(to_string(dis.destination)) + " (" + fmt(dis.distance[2]) + "), " +
                  to_string(ord.destination) + " (" + fmt(ord.distance[2]) + "), " + to_string(crit.destination)};
}

Outcome trotter() {
  std::vector<double> es;
  for (int N : {8, 16, 32, 64}) es.push_back(trotter_error(2, 1, 1, 1, N));
  const bool ok = es[0] > es[1] && es[1] > es[2] && es[2] > es[3];
  return {ok, fmt(es[0]) + " > " + fmt(es[1]) + " > " + fmt(es[2]) + " > " + fmt(es[3])};
}

Outcome massive_thermal() {
  const Filter f = make_daubechies_filter(4);
  const double mu0 = 1, beta0 = 1, t = 1;
  const auto lim = make_limit_state(f, covariance_massive_thermal(mu0, beta0, t));
  const auto d0 = SmearedVector::delta(0), d1 = SmearedVector::delta(1);
  const cplx a = lim.aa_dag(d0, d0), b = lim.adag_adag(d0, d1);
  std::vector<double> es;
  for (int m : {4, 6, 8}) {
    const auto s = make_renormalized_state({covariance_lattice(massive_thermal_couplings(mu0, beta0, t, m)), f, m});
    es.push_back(std::max(std::abs(s.aa_dag(d0, d0) - a), std::abs(s.adag_adag(d0, d1) - b)));
  }
  return {es[0] > es[1] && es[1] > es[2] && es[2] < 1e-2, fmt(es[0]) + ", " + fmt(es[1]) + ", " + fmt(es[2])};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "oracle identity", 1, oracle_identity},
      {2, "channel correctness", 10, channel_correctness},
      {3, "critical fixed-point convergence", 30, critical_convergence},
      {4, "sup-constant identities", 5, sup_identities},
      {5, "error bound theorem check", 120, error_bound},
      {6, "Pfaffian machinery", 5, pfaffian_machinery},
      {7, "spin-correlator consistency", 120, spin_correlators},
      {8, "instability classification", 30, instability},
      {9, "Trotter check", 10, trotter},
      {10, "massive/thermal limit", 60, massive_thermal},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--criterion N]\n";
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(all.size())) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }

  bool all_pass = true;
  for (const auto& c : all) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && dt < c.budget_s;
    all_pass = all_pass && pass;
    std::printf("criterion %d %s: %s | %s | %.2f s of %.0f s\n", c.id, c.title, pass ? "PASS" : "FAIL",
                o.detail.c_str(), dt, c.budget_s);
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
