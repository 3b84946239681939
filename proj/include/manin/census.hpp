#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "manin/catalog.hpp"
#include "manin/density.hpp"

namespace manin {

struct EnumOptions {
  unsigned threads = 1;
  std::uint64_t node_cap = 4'000'000'000ull;  // BudgetExceeded beyond this many slab steps
};

struct CountRow {
  double B = 0;
  std::uint64_t N = 0;
  double V = 0;  // NaN when no volume formula is available
  double seconds = 0;  // not serialized
};

struct AsymptoticFit;

struct CountTable {
  std::string model;
  std::vector<Place> S;
  int b = 1;
  std::vector<CountRow> rows;

  bool monotone() const;
  // columns B,N,V,N_over_BlogB,fit; the fit column is empty without a fit
  std::string to_csv(const AsymptoticFit* fit = nullptr) const;
  nlohmann::json to_json() const;
  static CountTable from_json(const nlohmann::json& j);
};

// #{x in G(Q) integral outside S : H(x; lambda) <= B}, exactly.
std::uint64_t enumerate_points(const CompactificationModel& m, const std::vector<Place>& S, double B,
                               const EnumOptions& opt = {});
CountTable count_table(const CompactificationModel& m, const std::vector<Place>& S, const std::vector<double>& grid,
                       const EnumOptions& opt = {});

// 10^{lo}, 10^{lo + 1/per_decade}, ..., 10^{hi}
std::vector<double> geometric_grid(double lo_exp, double hi_exp, int per_decade = 2);

// Adelic volume of the height ball; closed forms for E1 (any S), E3 and E5 (S = {inf}).
double volume_V(const CompactificationModel& m, const std::vector<Place>& S, double B);

struct AsymptoticFit {
  int b = 1;
  double theta_hat = 0;
  double c0 = 0;                  // (log B)^{b-2} coefficient, b >= 2
  std::vector<double> residuals;  // N/B minus the least-squares model over the whole grid
  double rms = 0;                 // of residuals
  double half_width = 0;          // two standard errors of theta_hat
  std::vector<double> B;

  double model_at(double B) const;
  nlohmann::json to_json() const;
};

// b = 1: theta_hat is the mean of N/B over the top half of the grid; b >= 2: least squares of N/B
// on (log B)^{b-1}, (log B)^{b-2}. Needs at least 5 rows.
AsymptoticFit fit_asymptotic(const CountTable& table, int b);

struct PoissonResult {
  std::string model;
  double s = 0;
  int A = 0;
  double lhs = 0, lhs_tail = 0;
  double rhs = 0, rhs_tail = 0;
  double gap = 0;
  std::vector<double> terms;  // H(a; s lambda) for a = 0..A (the sum uses a and -a)
  bool flagged = false;

  nlohmann::json to_json() const;
};

// sum_x H(x; s lambda)^{-1} against sum_{|a| <= A} H(a; s lambda); E1 and E2.
PoissonResult poisson_crosscheck(const CompactificationModel& m, double s, int A, std::uint64_t P = 100000);

// Sign conditions per coordinate (+1, -1, 0 = free), optionally |x_1| <= |x_2|.
struct Region {
  std::string name;
  std::vector<int> sign;
  bool abs_le = false;

  static Region parse(const std::string& text);  // e.g. "++", "+-", "+0", "abs_le"
};

struct EquiRow {
  std::string region;
  std::uint64_t count = 0;
  double empirical = 0;
  double predicted = 0;
};

// E1, E3, E5 with S = {inf}.
std::vector<EquiRow> equidistribution_test(const CompactificationModel& m, const std::vector<Place>& S, double B,
                                           const std::vector<Region>& regions, const EnumOptions& opt = {});
nlohmann::json equi_to_json(const std::vector<EquiRow>& rows);

}  // namespace manin
