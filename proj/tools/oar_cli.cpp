#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "oar/errorbounds.hpp"
#include "oar/lattice_oracle.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oar;
using oar::cli::RunConfig;

namespace {

// Bad configuration: exit 2, nothing written.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A finished file body, written only once every body of the run is ready.
struct Output {
  fs::path path;
  std::string body;
};

fs::path resolve_output(const std::string& requested, const std::string& fallback) {
  fs::path p = requested.empty() ? fs::path(fallback) : fs::path(requested);
  if (const char* dir = std::getenv("OAR_OUTPUT_DIR"); dir && *dir) p = fs::path(dir) / p.filename();
  return p;
}

void write_atomic(const Output& out) {
  if (out.path.has_parent_path()) fs::create_directories(out.path.parent_path());
  fs::path tmp = out.path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os << out.body;
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, out.path);
}

std::string csv_preamble(const RunConfig& c) {
  return "# oar " OAR_VERSION "\n# config " + json(c).dump() + "\n";
}

std::string json_report(const RunConfig& c, json results) {
  json doc = {{"version", OAR_VERSION}, {"config", c}};
  for (auto& [k, v] : results.items()) doc[k] = v;
  return doc.dump(2) + "\n";
}

Filter resolve_filter(const RunConfig& c) {
  if (!c.filter_coeffs.empty()) {
    Filter f;
    f.coeffs = Eigen::Map<const Eigen::VectorXd>(c.filter_coeffs.data(), c.filter_coeffs.size());
    f.order = static_cast<int>(c.filter_coeffs.size()) / 2;
    return f;
  }
  std::string name = c.filter;
  for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (name == "haar") return make_daubechies_filter(1);
  int len = 0;
  if (name.size() > 1 && name[0] == 'd') {
    try {
      std::size_t used = 0;
      len = std::stoi(name.substr(1), &used);
      if (used != name.size() - 1) len = 0;
    } catch (const std::exception&) {
      len = 0;
    }
  }
  if (len < 2 || len > 20 || len % 2) throw UsageError("unknown filter '" + c.filter + "' (haar, d2, d4, ..., d20)");
  return make_daubechies_filter(len / 2);
}

std::string filter_name(const Filter& f) { return "d" + std::to_string(f.size()); }

QuadratureSpec quadrature(const RunConfig& c) {
  QuadratureSpec q;
  q.points = c.quad_points;
  q.order = c.quad_order;
  q.rtol = c.quad_rtol;
  return q;
}

Couplings couplings(const RunConfig& c) {
  Couplings k{c.t1, c.t3, c.beta};
  if (c.critical) k = Couplings{1, 1, infinite_beta};
  try {
    k.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return k;
}

// ---- filters -------------------------------------------------------------

std::vector<Output> cmd_filters(const RunConfig& c) {
  std::vector<Filter> fs;
  if (c.filter == "all" && c.filter_coeffs.empty())
    for (int p = 1; p <= 10; ++p) fs.push_back(make_daubechies_filter(p));
  else
    fs.push_back(resolve_filter(c));

  const fs::path path = resolve_output(c.output, "filters." + c.format);
  if (c.format == "json") {
    json arr = json::array();
    for (const auto& f : fs) {
      const auto g = high_pass(f);
      const auto chk = check_filter(f);
      arr.push_back({{"name", filter_name(f)},
                     {"h_offset", f.support_offset},
                     {"h", std::vector<double>(f.coeffs.data(), f.coeffs.data() + f.size())},
                     {"g_offset", g.support_offset},
                     {"g", std::vector<double>(g.coeffs.data(), g.coeffs.data() + g.size())},
                     {"sum_error", chk.sum_error},
                     {"orthonormality_error", chk.orthonormality_error}});
    }
    return {{path, json_report(c, {{"filters", arr}})}};
  }
  std::ostringstream os;
  os << csv_preamble(c) << "filter,n,h_n,g_n\n" << std::setprecision(17);
  for (const auto& f : fs) {
    std::ostringstream one;
    write_filter_csv(one, f);
    std::istringstream lines(one.str());
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) os << filter_name(f) << ',' << line << '\n';
  }
  return {{path, os.str()}};
}

// ---- kernel --------------------------------------------------------------

CovarianceKernel kernel_for(const RunConfig& c) {
  if (c.kind == "critical-limit") return covariance_critical_limit();
  if (c.kind == "massive-thermal") return covariance_massive_thermal(c.mu0, c.beta0, c.t1);
  if (c.kind == "critical-lattice") return covariance_lattice({c.t1, c.t1, infinite_beta});
  if (c.kind == "lattice") return covariance_lattice(couplings(c));
  throw UsageError("unknown kernel kind '" + c.kind + "'");
}

std::vector<Output> cmd_kernel(const RunConfig& c) {
  const auto K = kernel_for(c);
  if (c.points < 2) throw UsageError("--points must be >= 2");
  const double hi = K.is_lattice() ? std::min(c.kmax, pi) : c.kmax;
  std::vector<double> grid;
  for (int i = 0; i < c.points; ++i) grid.push_back(-hi + 2 * hi * i / (c.points - 1));
  std::ostringstream os;
  os << csv_preamble(c);
  write_kernel_csv(os, K, grid);
  return {{resolve_output(c.output, "kernel.csv"), os.str()}};
}

// ---- flow ----------------------------------------------------------------

std::vector<Output> cmd_flow(const RunConfig& c) {
  const Filter f = resolve_filter(c);
  const Couplings k = couplings(c);
  if (c.m < 0) throw UsageError("--m must be >= 0");
  const Pairing which = c.pairing == "adag_adag" ? Pairing::adag_adag : Pairing::aa_dag;
  if (c.pairing != "aa_dag" && c.pairing != "adag_adag") throw UsageError("--pairing is aa_dag or adag_adag");
  const auto q = quadrature(c);
  const bool critical = k.ground_state() && k.t1 == k.t3;

  const RenormalizedState st{covariance_lattice(k), f, c.m};
  json rows = json::array();
  std::ostringstream os;
  os << csv_preamble(c) << "j,re_flow,im_flow" << (critical ? ",re_limit,im_limit,abs_diff" : "") << '\n'
     << std::setprecision(17);
  for (int j = 0; j <= c.jmax; ++j) {
    const auto xi = SmearedVector::delta(0), eta = SmearedVector::delta(j);
    const cplx v = renormalized_two_point(st, xi, eta, which, q);
    json row = {{"j", j}, {"flow", {v.real(), v.imag()}}};
    os << j << ',' << v.real() << ',' << v.imag();
    if (critical) {
      const cplx l = limit_two_point(f, xi, eta, which, q);
      row["limit"] = {l.real(), l.imag()};
      row["abs_diff"] = std::abs(v - l);
      os << ',' << l.real() << ',' << l.imag() << ',' << std::abs(v - l);
    }
    os << '\n';
    rows.push_back(row);
  }
  const fs::path path = resolve_output(c.output, "flow." + c.format);
  if (c.format == "csv") return {{path, os.str()}};
  json res = {{"filter", filter_name(f)}, {"rows", rows}};
  if (k.ground_state()) {
    const auto cls = classify_flow(k);
    res["destination"] = to_string(cls.destination);
    res["lambda"] = cls.lambda;
    res["distance"] = cls.distance;
  }
  return {{path, json_report(c, res)}};
}

// ---- spincorr ------------------------------------------------------------

QuasiFreeState correlator_state(const RunConfig& c, const Filter& f) {
  if (c.state == "limit") return make_limit_state(f, covariance_critical_limit(), quadrature(c));
  if (c.state == "lattice") return make_renormalized_state({covariance_lattice(couplings(c)), f, 0}, quadrature(c));
  throw UsageError("--state is limit or lattice");
}

std::vector<Output> cmd_spincorr(const RunConfig& c) {
  const Filter f = resolve_filter(c);
  if (c.dmax < 1) throw UsageError("--dmax must be >= 1");
  const auto st = correlator_state(c, f);
  SelfDualTable table(st);
  const int dmax = c.check_exponent ? std::max(c.dmax, 12) : c.dmax;
  const auto sym = make_toeplitz_symbol(table, dmax + 1);

  std::ostringstream os;
  os << csv_preamble(c) << "sites,factors,value,toeplitz,pf_minus_toeplitz,imag_residue\n" << std::setprecision(17);
  json rows = json::array();
  std::vector<int> ds;
  std::vector<double> vals;
  for (int d = 1; d <= dmax; ++d) {
    const auto s = spin_spin_correlation(table, {0, d});
    const double t = toeplitz_correlation(sym, d);
    ds.push_back(d);
    vals.push_back(s.value);
    if (d > c.dmax) continue;
    os << "0;" << d << ',' << s.factors << ',' << s.value << ',' << t << ',' << s.value - t << ',' << s.imag_residue
       << '\n';
    rows.push_back({{"sites", {0, d}}, {"factors", s.factors}, {"value", s.value}, {"toeplitz", t},
                    {"imag_residue", s.imag_residue}});
  }
  if (!c.sites.empty()) {
    const auto s = spin_spin_correlation(table, c.sites);
    std::string label;
    for (int x : c.sites) label += (label.empty() ? "" : ";") + std::to_string(x);
    os << label << ',' << s.factors << ',' << s.value << ",,," << s.imag_residue << '\n';
    rows.push_back({{"sites", c.sites}, {"factors", s.factors}, {"value", s.value}, {"imag_residue", s.imag_residue}});
  }
  json res = {{"filter", filter_name(f)}, {"state", c.state}, {"rows", rows}};
  if (c.check_exponent) {
    const std::vector<int> fd(ds.begin() + 5, ds.begin() + 12);
    const std::vector<double> fv(vals.begin() + 5, vals.begin() + 12);
    const double slope = fitted_decay_exponent(fd, fv);
    os << "# fitted_exponent,6,12," << slope << '\n';
    res["fitted_exponent"] = {{"dmin", 6}, {"dmax", 12}, {"slope", slope}};
  }
  const fs::path path = resolve_output(c.output, "spincorr." + c.format);
  if (c.format == "csv") return {{path, os.str()}};
  return {{path, json_report(c, res)}};
}

// ---- oracle --------------------------------------------------------------

std::vector<Output> cmd_oracle(const RunConfig& c) {
  std::ostringstream fx;
  write_fixtures_json(fx, standard_fixtures());
  return {{resolve_output(c.output, "oracle.json"), json_report(c, {{"fixtures", json::parse(fx.str())}})}};
}

// ---- verify --------------------------------------------------------------

struct Check {
  std::string suite, name;
  bool passed;
  double value, threshold;
  std::string detail;
};

MatXc random_state(int dim, std::mt19937& gen) {
  std::normal_distribution<double> nd;
  MatXc g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = cplx(nd(gen), nd(gen));
  MatXc rho = g * g.adjoint();
  return rho / rho.trace();
}

MatXc random_hermitian(int dim, std::mt19937& gen) {
  std::normal_distribution<double> nd;
  MatXc g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = cplx(nd(gen), nd(gen));
  return (g + g.adjoint()) / 2.0;
}

void suite_filters(const RunConfig& c, std::vector<Check>& out) {
  std::vector<Filter> fs;
  if (!c.filter_coeffs.empty())
    fs.push_back(resolve_filter(c));
  else
    for (int p = 1; p <= 10; ++p) fs.push_back(make_daubechies_filter(p));
  for (const auto& f : fs) {
    const auto chk = check_filter(f);
    out.push_back({"filters", "Filter invariant sum h = sqrt2 (" + filter_name(f) + ")", chk.sum_error <= 1e-12,
                   chk.sum_error, 1e-12, ""});
    out.push_back({"filters", "Filter invariant orthonormal shifts (" + filter_name(f) + ")",
                   chk.orthonormality_error <= 1e-12, chk.orthonormality_error, 1e-12, ""});
  }
}

void suite_oracle(const RunConfig& c, std::vector<Check>& out) {
  const int max_spins = c.grid == "full" ? 24 : 16;
  for (double K : {0.1, 0.4407, 1.0})
    for (int M = 1; M <= 4 && 4 * M <= max_spins; ++M)
      for (int N = 1; 4 * M * N <= max_spins; ++N) {
        const LatticeSpec spec{M, N, K, K};
        const auto v = transfer_matrices(spec).v;
        Eigen::MatrixXd p = Eigen::MatrixXd::Identity(v.rows(), v.cols());
        for (int i = 0; i < 2 * N; ++i) p = p * v;
        const double z = partition_function_brute(spec), rel = std::abs(p.trace() - z) / z;
        std::ostringstream name;
        name << "tr V^2N = Z (M=" << M << ", N=" << N << ", K=" << K << ")";
        out.push_back({"oracle", name.str(), rel < 1e-12, rel, 1e-12, ""});
      }
  double prev = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  std::string trail;
  for (int N : {8, 16, 32, 64}) {
    const double e = trotter_error(2, 1.0, 1, 1, N);
    decreasing = decreasing && e < prev;
    prev = e;
    trail += (trail.empty() ? "" : " ") + std::to_string(e);
  }
  out.push_back({"oracle", "Trotter error strictly decreasing over N = 8..64", decreasing, prev, 0, trail});
}

void suite_channel(const RunConfig& c, std::vector<Check>& out) {
  std::mt19937 gen(c.seed);
  const std::vector<int> Ms = c.grid == "full" ? std::vector<int>{2, 4} : std::vector<int>{2};
  for (int p : {1, 2})
    for (int M : Ms) {
      const Filter f = make_daubechies_filter(p);
      const std::string tag = " (" + filter_name(f) + ", " + std::to_string(2 * M) + " sites)";
      const MatXc U = disentangler_unitary(f, M);
      const double unit = (U.adjoint() * U - MatXc::Identity(U.rows(), U.cols())).cwiseAbs().maxCoeff();
      out.push_back({"channel", "U^* U = I" + tag, unit < 1e-12, unit, 1e-12, ""});
      const int dim = 1 << (2 * M), small = 1 << M;
      double tp = 0, dual = 0;
      for (int r = 0; r < 5; ++r) {
        const MatXc rho = random_state(dim, gen);
        const MatXc A = random_hermitian(small, gen);
        const MatXc e = coarse_grain_channel(rho, U);
        tp = std::max(tp, std::abs(e.trace() - 1.0));
        dual = std::max(dual, std::abs((e * A).trace() - (rho * dual_channel(A, U)).trace()));
      }
      out.push_back({"channel", "trace preserving" + tag, tp < 1e-13, tp, 1e-13, ""});
      out.push_back({"channel", "tr(eps(rho) A) = tr(rho alpha(A))" + tag, dual < 1e-11, dual, 1e-11, ""});
    }
}

void suite_kernels(const RunConfig&, std::vector<Check>& out) {
  double worst = 0;
  for (auto k : {Couplings{1, 0.5, infinite_beta}, Couplings{0.5, 1, infinite_beta}, Couplings{1, 1, 2.0},
                 Couplings{1, 1, infinite_beta}}) {
    const auto K = covariance_lattice(k);
    for (double th = -3.1; th < 3.2; th += 0.2) {
      const Mat2c C = K(th);
      // I - tau U with U a Hermitian involution: K = K^*, tr K = 2, (K - I)^2 = tau^2 I.
      const Mat2c D = C - Mat2c::Identity();
      const double tau2 = (D * D)(0, 0).real();
      worst = std::max({worst, (C - C.adjoint()).cwiseAbs().maxCoeff(), std::abs(C.trace() - 2.0),
                        (D * D - tau2 * Mat2c::Identity()).cwiseAbs().maxCoeff()});
    }
  }
  out.push_back({"kernels", "lattice kernels have the form I - tau U", worst < 1e-12, worst, 1e-12, ""});
  const auto L = covariance_critical_limit();
  const double flip = std::abs(L(0.5)(0, 1) + 1.0) + std::abs(L(-0.5)(0, 1) - 1.0);
  out.push_back({"kernels", "critical limit off-diagonal is -sign k", flip < 1e-14, flip, 1e-14, ""});
}

void suite_correlators(const RunConfig& c, std::vector<Check>& out) {
  std::mt19937 gen(c.seed);
  std::normal_distribution<double> nd;
  double pf_det = 0;
  for (int r = 0; r < 20; ++r) {
    const int n = 2 + 2 * (r % 4);
    MatXc A = MatXc::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        A(i, j) = cplx(nd(gen), nd(gen));
        A(j, i) = -A(i, j);
      }
    const cplx pf = pfaffian(A), det = A.determinant();
    pf_det = std::max({pf_det, std::abs(pf * pf - det) / std::max(1.0, std::abs(det)),
                       std::abs(pf - pfaffian_combinatorial(A)) / std::max(1.0, std::abs(pf))});
  }
  out.push_back({"correlators", "Pf^2 = det and combinatorial Pf agree", pf_det < 1e-10, pf_det, 1e-10, ""});

  const auto st = make_renormalized_state({covariance_lattice({1, 1}), make_daubechies_filter(2), 0});
  SelfDualTable table(st);
  const auto sym = make_toeplitz_symbol(table, 11);
  double diff = 0, imag = 0, range = 0;
  for (int d = 1; d <= 10; ++d) {
    const auto s = spin_spin_correlation(table, {0, d});
    diff = std::max(diff, std::abs(s.value - toeplitz_correlation(sym, d)));
    imag = std::max(imag, s.imag_residue);
    range = std::max(range, std::abs(s.value) - 1);
  }
  out.push_back({"correlators", "Pfaffian = Toeplitz for d = 1..10 (lattice)", diff < 1e-10, diff, 1e-10, ""});
  out.push_back({"correlators", "spin correlators real", imag < 1e-9, imag, 1e-9, ""});
  out.push_back({"correlators", "spin correlators in [-1, 1]", range <= 1e-12, range, 1e-12, ""});
  const double odd = std::abs(spin_spin_correlation(table, {0, 1, 3}).value);
  out.push_back({"correlators", "odd spin correlators vanish", odd == 0, odd, 0, ""});
}

void suite_errorbounds(const RunConfig& c, std::vector<Check>& out, std::vector<Output>& files,
                       const fs::path& csv_path) {
  const Filter f = make_daubechies_filter(4);
  const SelfDualVector v1{SmearedVector::delta(0), SmearedVector{}}, v2{SmearedVector{}, SmearedVector::delta(0)};
  const bool full = c.grid == "full";
  const auto rows = bound_sweep(f, full ? std::vector<int>{2, 4, 6, 8} : std::vector<int>{2, 4},
                                full ? std::vector<double>{0, 0.5, 1} : std::vector<double>{0, 0.5}, 1, v1, v2);
  for (const auto& r : rows) {
    std::ostringstream name;
    name << "empirical error <= certified bound (d8, m=" << r.m << ", t0=" << r.t0 << ")";
    out.push_back({"errorbounds", name.str(), r.certified(), r.empirical_error, r.certified_bound, r.note});
  }
  const std::vector<int> ms = full ? std::vector<int>{5, 6, 7, 8, 9, 10} : std::vector<int>{5, 6, 7};
  std::vector<double> es;
  for (int m : ms) es.push_back(empirical_error(m, 0.5, 1, v1, v2, f));
  const double slope = log2_slope(ms, es);
  out.push_back({"errorbounds", "empirical error slope -1 +/- 0.2 (t0=0.5)", std::abs(slope + 1) <= 0.2, slope, -1, ""});

  std::ostringstream os;
  os << csv_preamble(c);
  write_bound_csv(os, rows);
  files.push_back({csv_path, os.str()});
}

std::vector<Output> cmd_verify(const RunConfig& c, bool& passed) {
  const std::vector<std::string> known{"all", "filters", "oracle", "channel", "kernels", "correlators", "errorbounds"};
  if (std::find(known.begin(), known.end(), c.suite) == known.end()) throw UsageError("unknown suite '" + c.suite + "'");
  if (c.grid != "small" && c.grid != "full") throw UsageError("--grid is small or full");
  std::vector<Check> checks;
  std::vector<Output> files;
  const fs::path report = resolve_output(c.output, "verify.json");
  auto want = [&](const char* s) { return c.suite == "all" || c.suite == s || !c.filter_coeffs.empty(); };
  // A custom filter is checked on its own; nothing downstream is meaningful without it.
  if (!c.filter_coeffs.empty()) {
    suite_filters(c, checks);
  } else {
    if (want("filters")) suite_filters(c, checks);
    if (want("oracle")) suite_oracle(c, checks);
    if (want("channel")) suite_channel(c, checks);
    if (want("kernels")) suite_kernels(c, checks);
    if (want("correlators")) suite_correlators(c, checks);
    if (want("errorbounds")) suite_errorbounds(c, checks, files, report.parent_path() / "bounds.csv");
  }

  passed = true;
  json arr = json::array(), failed = json::array();
  for (const auto& k : checks) {
    json rec = {{"suite", k.suite}, {"name", k.name}, {"passed", k.passed}, {"value", cli::detail::number(k.value)},
                {"threshold", cli::detail::number(k.threshold)}};
    if (!k.detail.empty()) rec["detail"] = k.detail;
    arr.push_back(rec);
    if (!k.passed) {
      passed = false;
      failed.push_back(rec);
    }
  }
  files.push_back({report,
                   json_report(c, {{"passed", passed}, {"checks", arr}, {"failed", failed}})});
  for (const auto& r : failed) std::cerr << "FAIL " << r.dump() << '\n';
  return files;
}

// ---- wiring --------------------------------------------------------------

void add_common(CLI::App* sub, RunConfig& c) {
  sub->add_option("-o,--output", c.output, "output file (OAR_OUTPUT_DIR replaces its directory)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--seed", c.seed, "seed for randomized checks");
  sub->add_option("--quad-points", c.quad_points, "quadrature nodes per 2 pi")->check(CLI::Range(16, 1 << 16));
  sub->add_option("--quad-order", c.quad_order, "Gauss-Legendre nodes per panel")->check(CLI::Range(2, 64));
  sub->add_option("--quad-rtol", c.quad_rtol, "relative tolerance of the doubling test")->check(CLI::PositiveNumber);
}

void add_filter(CLI::App* sub, RunConfig& c) {
  sub->add_option("--filter", c.filter, "haar, d2 ... d20");
  sub->add_option("--filter-coeffs", c.filter_coeffs, "explicit low-pass coefficients")->delimiter(',');
}

void add_couplings(CLI::App* sub, RunConfig& c) {
  sub->add_option("--t1", c.t1, "transverse field");
  sub->add_option("--t3", c.t3, "nearest-neighbour coupling");
  sub->add_option("--beta", c.beta, "inverse temperature (inf for the ground state)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-algebraic renormalization of the critical Ising chain"};
  app.set_version_flag("--version", std::string(OAR_VERSION));
  app.require_subcommand(1);
  RunConfig c;

  auto* filters = app.add_subcommand("filters", "tabulate Daubechies filters");
  add_filter(filters, c);
  add_common(filters, c);

  auto* kernel = app.add_subcommand("kernel", "tabulate a covariance kernel");
  kernel->add_option("--kind", c.kind, "lattice, critical-lattice, critical-limit, massive-thermal")
      ->check(CLI::IsMember({"lattice", "critical-lattice", "critical-limit", "massive-thermal"}));
  kernel->add_option("--kmax", c.kmax, "grid half-width")->check(CLI::PositiveNumber);
  kernel->add_option("--points", c.points, "grid size");
  kernel->add_option("--mu0", c.mu0, "mass");
  kernel->add_option("--beta0", c.beta0, "continuum inverse temperature");
  add_couplings(kernel, c);
  add_common(kernel, c);

  auto* flow = app.add_subcommand("flow", "renormalized two-point functions");
  add_filter(flow, c);
  add_couplings(flow, c);
  flow->add_option("--m", c.m, "RG steps");
  flow->add_option("--jmax", c.jmax, "largest offset of the second vector")->check(CLI::NonNegativeNumber);
  flow->add_option("--pairing", c.pairing, "aa_dag or adag_adag");
  flow->add_flag("--critical", c.critical, "t1 = t3 = 1, ground state, compare with the limit");
  add_common(flow, c);

  auto* spin = app.add_subcommand("spincorr", "spin-spin correlators");
  add_filter(spin, c);
  add_couplings(spin, c);
  spin->add_option("--dmax", c.dmax, "largest separation");
  spin->add_option("--state", c.state, "limit or lattice")->check(CLI::IsMember({"limit", "lattice"}));
  spin->add_option("--sites", c.sites, "extra spin string, e.g. 0,1,3")->delimiter(',');
  spin->add_flag("--check-exponent", c.check_exponent, "fit the decay exponent over d = 6..12");
  add_common(spin, c);

  auto* oracle = app.add_subcommand("oracle", "regenerate the lattice golden fixtures");
  add_common(oracle, c);

  auto* verify = app.add_subcommand("verify", "run the automated checks");
  verify->add_option("--suite", c.suite, "all, filters, oracle, channel, kernels, correlators, errorbounds");
  verify->add_option("--grid", c.grid, "small or full");
  verify->add_option("--filter-coeffs", c.filter_coeffs, "check these coefficients instead")->delimiter(',');
  add_common(verify, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  c.command = app.get_subcommands().front()->get_name();
  if (c.command == "oracle" || c.command == "verify") c.format = "json";
  try {
    std::vector<Output> files;
    bool passed = true;
    if (c.command == "filters") {
      if (filters->count("--filter") == 0 && c.filter_coeffs.empty()) c.filter = "all";
      files = cmd_filters(c);
    } else if (c.command == "kernel") {
      files = cmd_kernel(c);
    } else if (c.command == "flow") {
      files = cmd_flow(c);
    } else if (c.command == "spincorr") {
      files = cmd_spincorr(c);
    } else if (c.command == "oracle") {
      files = cmd_oracle(c);
    } else {
      files = cmd_verify(c, passed);
    }
    for (const auto& f : files) {
      write_atomic(f);
      std::cout << f.path.string() << '\n';
    }
    return passed ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for more information.\n";
    return 2;
  } catch (const Error& e) {
    if (e.kind() == Error::Kind::invalid_argument) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
    std::cerr << "failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return 1;
  }
}
