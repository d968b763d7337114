#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace oar::cli {

// Everything a run depends on. Each output file carries a copy.
struct RunConfig {
  std::string command;
  std::string filter = "d8";
  std::vector<double> filter_coeffs;  // overrides `filter` when non-empty
  double t1 = 1, t3 = 1;
  double beta = std::numeric_limits<double>::infinity();
  double mu0 = 1, beta0 = 1;
  int m = 4;
  std::string kind = "critical-limit";
  double kmax = 10;
  int points = 200;
  int jmax = 4;
  std::string pairing = "aa_dag";
  bool critical = false;
  int dmax = 12;
  std::vector<int> sites;
  bool check_exponent = false;
  std::string state = "limit";
  std::string suite = "all";
  std::string grid = "small";
  int quad_points = 128;
  int quad_order = 16;
  double quad_rtol = 1e-9;
  std::string output;
  std::string format = "csv";
  unsigned seed = 1;
};

namespace detail {

// JSON has no infinity; store it as a string.
inline nlohmann::json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}
inline double number(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>() == "inf" ? std::numeric_limits<double>::infinity()
                                                           : -std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"command", c.command},     {"filter", c.filter},
       {"filter_coeffs", c.filter_coeffs},
       {"t1", c.t1},               {"t3", c.t3},
       {"beta", detail::number(c.beta)},
       {"mu0", c.mu0},             {"beta0", detail::number(c.beta0)},
       {"m", c.m},                 {"kind", c.kind},
       {"kmax", c.kmax},           {"points", c.points},
       {"jmax", c.jmax},           {"pairing", c.pairing},
       {"critical", c.critical},   {"dmax", c.dmax},
       {"sites", c.sites},         {"check_exponent", c.check_exponent},
       {"state", c.state},         {"suite", c.suite},
       {"grid", c.grid},           {"quad_points", c.quad_points},
       {"quad_order", c.quad_order}, {"quad_rtol", c.quad_rtol},
       {"output", c.output},       {"format", c.format},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
  j.at("command").get_to(c.command);
  j.at("filter").get_to(c.filter);
  j.at("filter_coeffs").get_to(c.filter_coeffs);
  j.at("t1").get_to(c.t1);
  j.at("t3").get_to(c.t3);
  c.beta = detail::number(j.at("beta"));
  j.at("mu0").get_to(c.mu0);
  c.beta0 = detail::number(j.at("beta0"));
  j.at("m").get_to(c.m);
  j.at("kind").get_to(c.kind);
  j.at("kmax").get_to(c.kmax);
  j.at("points").get_to(c.points);
  j.at("jmax").get_to(c.jmax);
  j.at("pairing").get_to(c.pairing);
  j.at("critical").get_to(c.critical);
  j.at("dmax").get_to(c.dmax);
  j.at("sites").get_to(c.sites);
  j.at("check_exponent").get_to(c.check_exponent);
  j.at("state").get_to(c.state);
  j.at("suite").get_to(c.suite);
  j.at("grid").get_to(c.grid);
  j.at("quad_points").get_to(c.quad_points);
  j.at("quad_order").get_to(c.quad_order);
  j.at("quad_rtol").get_to(c.quad_rtol);
  j.at("output").get_to(c.output);
  j.at("format").get_to(c.format);
  j.at("seed").get_to(c.seed);
}

}  // namespace oar::cli
