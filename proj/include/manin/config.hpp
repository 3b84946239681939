#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "manin/localfield.hpp"

namespace manin {

// One experiment. Every field has a key usable in a config file ("key = value") and as a flag ("--key value").
struct ExperimentConfig {
  std::string command;  // zeta-local, osc, clemens, density, theta, count, fit, poisson, equi, model
  std::string model = "E1";
  std::vector<Place> S = {Place::real()};
  std::string place = "inf";     // inf, a prime, or "global" (density)
  std::string s = "2";           // complex: "2", "1.5+0.5i"
  std::string a;                 // character, comma-separated rationals; empty = 0
  std::vector<double> B;         // count grid; empty = derived from grid_lo/grid_hi
  double grid_lo = 1, grid_hi = 6;
  int per_decade = 2;
  int A = 100;                   // poisson cutoff
  std::uint64_t P = 10000;       // Euler product cutoff
  std::uint64_t poisson_P = 100000;
  int d = 1;                     // osc phase degree
  std::string phi = "auto";      // osc test function: indicator, units (finite), bump (real); auto picks one
  int a_max_exp = 6;             // osc grid: |a| = 10^1..10^k (real) or p^1..p^k (finite)
  bool restrict_to_D = true;     // clemens
  std::vector<std::string> regions = {"++", "+-", "-+", "--"};
  int smooth_k = 0;              // smoothed real metric exponent, 0 = max metric
  double rel_tol = 1e-8;         // oscillatory quadrature target
  std::uint64_t node_cap = 4'000'000'000ull;
  std::string input;             // fit: count-table JSON to fit instead of recounting
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string out;               // artifact directory; empty = stdout only

  std::vector<double> grid() const;
  void validate() const;  // ConfigError on anything inconsistent

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

// Keys accepted by set_key, in a stable order.
const std::vector<std::string>& config_keys();

// Assign one key from its text form; ConfigError for unknown keys or bad values.
void set_key(ExperimentConfig& c, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);
void apply_key_values(ExperimentConfig& c, const std::map<std::string, std::string>& kv);

cplx parse_complex(const std::string& text);
std::string format_complex(cplx z);

}  // namespace manin
