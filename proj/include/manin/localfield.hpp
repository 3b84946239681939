#pragma once

#include <complex>
#include <cstdint>
#include "json.hpp"
#include <string>
#include <variant>
#include <vector>

#include "manin/quadrature.hpp"
#include "manin/rational.hpp"

namespace manin {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kZeroTol = 1e-9;

class Place {
 public:
  enum class Kind { Real, Complex, Finite };

  static Place real() { return Place(Kind::Real, 0); }
  static Place complex() { return Place(Kind::Complex, 0); }
  static Place finite(std::uint64_t p);  // throws ConfigError unless p is prime
  // "inf"/"real", "complex", or a prime number.
  static Place parse(const std::string& text);

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_archimedean() const { return kind_ != Kind::Finite; }
  std::uint64_t prime() const { return p_; }
  std::string to_string() const;

  friend bool operator==(const Place&, const Place&) = default;
  friend auto operator<=>(const Place& a, const Place& b) {
    if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
    return a.p_ <=> b.p_;
  }

 private:
  Place(Kind k, std::uint64_t p) : kind_(k), p_(p) {}
  Kind kind_;
  std::uint64_t p_;
};

// e^{2 pi i r / n} with exact values at multiples of a quarter turn.
cplx unit_root(std::int64_t r, std::uint64_t n);

double abs_value(const Rational& x, const Place& v);
double abs_value(cplx z, const Place& v);  // Real or Complex only
Rational abs_exact(const Rational& x, std::uint64_t p);

cplx psi(const Place& v, const Rational& x);
cplx psi_real(double x);
cplx psi_complex(cplx z);

// Haar volume of {|x|_v <= r}.
double haar_ball(const Place& v, double r);
// Haar volume of xi + p^n Z_p (independent of xi).
Rational haar_coset(std::uint64_t p, int n);

cplx zeta_local(const Place& v, cplx s);
double residue_c(const Place& v);

// Locally constant compactly supported function on Q_p: values on residue classes of
// p^{-support} Z_p modulo p^level, indexed by r where x = r / p^support.
class StepFunction {
 public:
  StepFunction(std::uint64_t p, int level, int support, std::vector<cplx> table);

  static StepFunction indicator_zp(std::uint64_t p);
  // 1_{xi + p^n Z_p} for a p-adic integer xi.
  static StepFunction indicator_coset(std::uint64_t p, const Rational& xi, int n);
  static StepFunction indicator_units(std::uint64_t p);

  std::uint64_t prime() const { return p_; }
  int level() const { return level_; }
  int support() const { return support_; }
  const std::vector<cplx>& table() const { return table_; }
  std::uint64_t modulus() const { return table_.size(); }

  cplx operator()(const Rational& x) const;
  // Value on the class of the p-adic integer u, given u mod p^L with L >= level().
  cplx at_integer(std::uint64_t u) const;
  cplx at_zero() const { return table_[0]; }
  double sup_norm() const;
  bool supported_in_zp() const { return support_ <= 0; }

  // Smallest n (>= -support) such that the function is constant modulo p^n.
  int minimal_level() const;
  StepFunction refine(int new_level) const;
  StepFunction coarsen(int new_level) const;  // requires new_level >= minimal_level()
  StepFunction canonical() const { return coarsen(minimal_level()); }
  StepFunction with_support(int new_support) const;  // enlarge the domain ball
  // u -> Phi(p^j u)
  StepFunction dilate(int j) const;

  nlohmann::json to_json() const;
  static StepFunction from_json(const nlohmann::json& j);

 private:
  std::uint64_t p_;
  int level_;
  int support_;
  std::vector<cplx> table_;
};

// Smooth compactly supported archimedean test function
//   Phi(x) = amplitude * phi((x - center)/radius),   phi(t) = exp(1 - 1/(1 - t^2)) on |t| < 1.
// On C it is radial: Phi(z) = amplitude * phi(|z - center| / radius).
class BumpFunction {
 public:
  BumpFunction(double center = 0.0, double radius = 1.0, double amplitude = 1.0, int n_derivatives = 2);

  double operator()(double x) const { return derivative(x, 0); }
  double derivative(double x, int k) const;
  double at(cplx z) const;  // radial evaluation for the complex place
  double lower() const { return center_ - radius_; }
  double upper() const { return center_ + radius_; }
  double center() const { return center_; }
  double radius() const { return radius_; }
  double amplitude() const { return amplitude_; }
  int n_derivatives() const { return n_derivatives_; }
  // Upper bounds for sup |Phi^{(k)}|, k = 0..n_derivatives.
  const std::vector<double>& sup_bounds() const { return sup_bounds_; }

  nlohmann::json to_json() const;
  static BumpFunction from_json(const nlohmann::json& j);

 private:
  double center_, radius_, amplitude_;
  int n_derivatives_;
  std::vector<std::vector<double>> poly_;  // phi^{(k)} = P_k(t) (1-t^2)^{-2k} phi(t)
  std::vector<double> sup_bounds_;
};

using TestFunction = std::variant<StepFunction, BumpFunction>;

struct TateResult {
  cplx value;
  double error = 0;
  bool converged = true;
};

// zeta(Phi, |.|^s) = int Phi(x) |x|^s d^x x, with d^x x = (1 - 1/q)^{-1} dx/|x| at finite places.
TateResult tate_integral(const Place& v, const TestFunction& phi, cplx s);

// Exact transform of a StepFunction: a -> int Phi(x) psi(a x) dx.
StepFunction fourier_step(const StepFunction& phi);

// Archimedean transform evaluated numerically at a point.
cplx fourier_bump(const Place& v, const BumpFunction& phi, double a);

}  // namespace manin
