#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "manin/catalog.hpp"
#include "manin/oscillatory.hpp"

namespace manin {

// s lambda_alpha for each boundary component.
std::vector<cplx> along_lambda(const CompactificationModel& m, cplx s);

// H_p(0; s_alpha) from the stratum counts #D_A^o(F_p). With integral = true (p not in S) only
// strata off D contribute; otherwise every stratum does. PoleError on p^{s_alpha - rho_alpha + 1} = 1.
cplx denef_density(const CompactificationModel& m, std::uint64_t p, const std::vector<cplx>& s_alpha,
                   bool integral = true);

// Independent evaluation: valuation shells of every coordinate, with the height evaluated exactly on
// residue class representatives modulo p^depth (all classes on the two innermost shells, where the
// reduction stratum changes). Shell layers are summed until they stop contributing.
cplx brute_density_oracle(const CompactificationModel& m, std::uint64_t p, const std::vector<cplx>& s_alpha,
                          int depth = 2, bool integral = true);

struct LocalDensity {
  Place place = Place::real();
  std::vector<Rational> a;
  cplx s{1.0, 0.0};
  cplx value{};
  Exactness exactness = Exactness::Exact;
  double error = 0;
  bool flagged = false;

  nlohmann::json to_json() const;
  static LocalDensity from_json(const nlohmann::json& j);
};

// int_{R^n} prod ||f_alpha||^{s lambda_alpha} psi(<a,x>) dx. a != 0 needs every coordinate group
// hit by a to be one-dimensional (E1, E2, E4, E5).
LocalDensity arch_density(const CompactificationModel& m, const Point& a, cplx s);

// H_p(a; s lambda) exactly; zero unless a lies in Z_p^n.
cplx fourier_finite(const CompactificationModel& m, std::uint64_t p, const Point& a, cplx s, bool integral = true);

// |1 - H_p(a;s lambda) prod_{alpha off D, d_alpha(a) = 0} (1 - p^{-(1 + s lambda_alpha - rho_alpha)})|
double character_defect(const CompactificationModel& m, std::uint64_t p, const Point& a, cplx s);

struct EulerProductValue {
  std::uint64_t P = 0;
  double partial = 0;    // prod_{p <= P, p not in S} H_p(0; s lambda)
  double corrected = 0;  // regularized product times prod zeta^S(s lambda_alpha - rho_alpha + 1)
  double tail = 0;       // |corrected(P) - corrected(P/2)|

  nlohmann::json to_json() const;
};

// Finite-place part of H(0; s lambda) off S, s real > 1.
EulerProductValue euler_product(const CompactificationModel& m, const std::vector<Place>& S, double s,
                                std::uint64_t P = 10000, unsigned threads = 1);

// H(0; s lambda) over all places: arch x finite places in S x Euler product.
double global_density(const CompactificationModel& m, const std::vector<Place>& S, double s,
                      std::uint64_t P = 10000, unsigned threads = 1);

struct ThetaResult {
  double theta = 0;
  int b = 1;
  std::vector<double> eps, scaled;  // eps^b H(0;(1+eps)lambda) / (b-1)!
  double order2 = 0, order3 = 0;    // extrapolations through the last 3 and all 4 points
  bool unstable = false;            // order2 and order3 disagree by more than 1%
  double euler_tail = 0;

  nlohmann::json to_json() const;
};

ThetaResult theta_constant(const CompactificationModel& m, const std::vector<Place>& S, unsigned threads = 1,
                           std::uint64_t P = 10000);

// Boundary residue volume tau_v^max at a place of S (max-metric models with D nonempty at the real
// place, any model at a finite place).
double tau_max_boundary(const CompactificationModel& m, const Place& v);

// prod_{alpha off D} 1/lambda_alpha * prod_p (1-1/p)^{rank} H_p(0;lambda) * prod_{v in S} tau_v / (b-1)!
double theta_from_tau(const CompactificationModel& m, const std::vector<Place>& S, std::uint64_t P = 10000);

// One-dimensional building block: int_R max(1,|x|)^{-sigma} e^{-2 pi i a x} dx (max-metric) or with
// the smoothed norm of the model's metric.
struct LineTransform {
  cplx value{};
  double error = 0;
  bool ok = true;
};
LineTransform line_transform(const MetricOptions& metric, double a, cplx sigma);

}  // namespace manin
