#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "manin/localfield.hpp"

namespace manin {

enum class Exactness { Exact, Quadrature };

struct OscillatoryResult {
  cplx value{};
  double abs_bound_used = 0;  // zeta_F(Re s) min(1, |a|^-kappa), the envelope shape
  Exactness exactness = Exactness::Exact;
  double error = 0;           // quadrature estimate (plus tail certificate where relevant)
  bool flagged = false;       // error target missed
};

struct OscOptions {
  double rel_tol = 1e-8;
  int max_level = 12;                    // finite places: refinement ceiling p^max_level
  std::uint64_t max_terms = 20'000'000;  // finite places: residue terms per integral
  double tail_tol = 1e-10;               // inverse phase: shell tail target
  double inverse_panel_cap = 1e3;        // inverse phase: largest shell before the closed-form tail
};

// int_{xi + p^n Z_p} psi(a x^d) dx, by an exact sum over residue classes.
cplx coset_phase_integral(std::uint64_t p, const Rational& xi, int n, const Rational& a, int d,
                          const OscOptions& opt = {});

// Least positive n with Phi constant on balls of radius p^-n.
int schwartz_level(const StepFunction& phi);

// T with int_{Z_p^*} Phi(x) psi(a x^d) dx = 0 whenever |a|_p >= T.
double vanishing_threshold(std::uint64_t p, int d, const StepFunction& phi);
// Same as an exponent: T = p^e.
int vanishing_exponent(std::uint64_t p, int d, const StepFunction& phi);

// min(1/2, Re s_j / d_j)
double kappa(const std::vector<cplx>& s, const std::vector<int>& d);

// Real a is used at all places; on C it is the complex number a + 0i (|a|_C = a^2).
OscillatoryResult osc_integral_1d(const Place& v, const TestFunction& phi, const Rational& a, int d, cplx s,
                                  const OscOptions& opt = {});

// Product test function on F^n (n <= 3): StepFunctions at a finite place, BumpFunctions on R.
OscillatoryResult osc_integral_nd(const Place& v, const std::vector<TestFunction>& phi, const Rational& a,
                                  const std::vector<int>& d, const std::vector<cplx>& s,
                                  const OscOptions& opt = {});

// int |x|^{s-1} psi(a / x^d) Phi(x) dx as a sum over valuation (finite) or dyadic (real) shells.
OscillatoryResult inverse_phase_integral(const Place& v, const TestFunction& phi, const Rational& a, int d,
                                         cplx s, const OscOptions& opt = {});

// Dyadic partition of unity on R \ {0}: sum_n theta(2^n x) = 1, theta = 1 on 2^{-1/4} <= |x| <= 2^{1/4}.
double dyadic_theta(double x);

struct DecayRow {
  double abs_a = 0;
  cplx value{};
  double envelope = 0;
  bool exact = false;
};

struct DecayReport {
  Place place = Place::real();
  int d = 1;
  cplx s{1.0, 0.0};
  double kappa = 0.5;
  double zeta_re_s = 0;
  std::vector<DecayRow> rows;
  double fitted_C = 0;         // smallest C with observed <= envelope on the grid
  double fitted_exponent = 0;  // least-squares slope of -log|I| against log|a|
  double envelope_ratio = 0;   // sup over grid / value at the first grid point
  bool flagged = false;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

// |a| is the normalized absolute value at v of each grid entry.
DecayReport decay_report(const Place& v, const TestFunction& phi, int d, cplx s, const std::vector<Rational>& a_grid,
                         unsigned threads = 1, const OscOptions& opt = {});

}  // namespace manin
