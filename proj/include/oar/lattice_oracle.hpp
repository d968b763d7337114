#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oar/wavelet.hpp"

namespace oar {

// Spin chains use sites 0 ... L-1 in the sigma3 product basis. Site 0 is the
// leftmost tensor factor; basis bit 0 means sigma3 = +1.

enum class Boundary { periodic, open };

// A_{mu mu' s s'} = delta_{mu s} e^{K1 mu mu'} e^{K2 s s'}, spins in {+1, -1}.
struct IsingTensor {
  double K1 = 0, K2 = 0;
  std::array<double, 16> values{};

  double operator()(int mu, int mup, int s, int sp) const;
};
IsingTensor make_ising_tensor(double K1, double K2);

// Torus of 2M columns and 2N rows.
struct LatticeSpec {
  int M = 1;
  int N = 1;
  double K1 = 0;
  double K2 = 0;

  int sites() const { return 2 * M; }
  int rows() const { return 2 * N; }
  void validate() const;
};

// tanh K* = e^{-2K}; the map is an involution.
double dual_coupling(double K);

// Direct sum over all 2^(4MN) spin configurations, at most 24 spins.
double partition_function_brute(const LatticeSpec& spec);

// Number of configurations with d1 disagreeing horizontal and d2 disagreeing
// vertical bonds, counts[d1 * (bonds + 1) + d2]. Independent of the couplings.
struct BondHistogram {
  int bonds = 0;  // per direction, 4MN
  std::vector<double> counts;
};
BondHistogram bond_histogram(int M, int N);
double partition_function(const BondHistogram& h, double K1, double K2);

// <s|V|s'> = prod_j e^{K1 s_j s_{j+1} + K2 s_j s'_j}, so V = v3 * v1 with
// v1 = (2 sinh 2K2)^M e^{K2* sum sigma1} and v3 diagonal.
struct TransferMatrices {
  Eigen::MatrixXd v, v1, v3, v_sym;
};
TransferMatrices transfer_matrices(const LatticeSpec& spec, Boundary b = Boundary::periodic);

// <sigma_{j1 k1} ... > on the torus; insertion = (column j, row k).
double correlation_brute(const LatticeSpec& spec, const std::vector<std::pair<int, int>>& insertions);

// Same quantity by summing over configurations; at most 24 spins.
double correlation_enumerated(const LatticeSpec& spec, const std::vector<std::pair<int, int>>& insertions);

// sigma1, sigma2, sigma3 for k = 1, 2, 3.
Mat2c pauli(int k);

// Single-site operator on an L-site chain.
MatXc site_operator(int sites, int j, const Mat2c& op);

// -sum (t3 sigma3 sigma3 + t1 sigma1) on 2M sites.
Eigen::MatrixXd tfim_hamiltonian(int M, double t1, double t3, Boundary b = Boundary::open);

// || (V_sym / prefactor)^N - e^{-beta H} || with K1 = beta t3 / N and
// K2* = beta t1 / N, open chain, spectral norm.
double trotter_error(int M, double beta, double t1, double t3, int N);

// Normalized e^{-beta H}; beta = inf gives the uniform mixture over the ground space.
MatXc gibbs_state(const Eigen::MatrixXd& H, double beta);

// a_j = (prod_{l<j} sigma1_l) (sigma3_j + i sigma2_j) / 2.
struct JordanWigner {
  int sites = 0;
  std::vector<MatXc> a;
  MatXc parity;  // prod sigma1

  MatXc adag(int j) const { return a[j].adjoint(); }
  MatXc number() const;
  // Omega, the all sigma1 = -1 state.
  VecXc vacuum() const;
  // a^dag_{j1} ... a^dag_{jn} Omega for j1 < ... < jn.
  VecXc fock_state(const std::vector<int>& occupied) const;
  // Same state by bitmask (bit j = mode j occupied).
  VecXc fock_state_mask(unsigned mask) const;
};
JordanWigner jordan_wigner_chain(int sites);
inline JordanWigner jordan_wigner(int M) { return jordan_wigner_chain(2 * M); }

// Product state with sigma1 = +1 on the marked sites and -1 elsewhere.
VecXc sigma1_product_state(int sites, unsigned plus_mask);

// One-particle u on L sites: column l carries h shifted by l for even l and
// g shifted by l - 1 for odd l, indices mod L.
Eigen::MatrixXd one_particle_disentangler(const Filter& f, int sites);

// Second quantization Gamma(u): <J'|U|J> = det u[J', J] in the Fock basis.
MatXc disentangler_unitary(const Filter& f, int M);
MatXc second_quantize(const Eigen::MatrixXd& u);

// Trace over the odd sites, keeping site 2k as site k.
MatXc partial_trace_odd(const MatXc& rho, int sites);
// A on the even sites, identity on the odd ones.
MatXc embed_even(const MatXc& A, int small_sites);

// epsilon(rho) = ptr_odd(U^* rho U) and its dual alpha(A) = U iota(A) U^*.
MatXc coarse_grain_channel(const MatXc& rho, const Filter& f);
MatXc dual_channel(const MatXc& A, const Filter& f);
// Same with the disentangler already built.
MatXc coarse_grain_channel(const MatXc& rho, const MatXc& U);
MatXc dual_channel(const MatXc& A, const MatXc& U);

// Throws unless rho is Hermitian, unit trace and positive to tol.
void check_state(const MatXc& rho, double tol = 1e-10);

// G_ij = tr(rho a^dag_i a_j).
MatXc two_point_matrix(const MatXc& rho, const JordanWigner& jw);

struct FlowSpec {
  int sites = 8;
  double t1 = 1, t3 = 1;
  double beta = 1;
  Boundary boundary = Boundary::open;
};

struct FlowStep {
  int sites;
  MatXc rho;
  MatXc two_point;
};
std::vector<FlowStep> finite_flow(const FlowSpec& spec, const Filter& f, int m_steps);

// Golden values shared by the tests and the CLI.
struct OracleFixture {
  std::string spec;
  std::string quantity;
  double value;
  double tolerance;
};
std::vector<OracleFixture> standard_fixtures();
void write_fixtures_json(std::ostream& os, const std::vector<OracleFixture>& fx);
std::vector<OracleFixture> read_fixtures_json(std::istream& is);

}  // namespace oar
