#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace manin {

using cplx = std::complex<double>;

// Neumaier summation, componentwise for complex values.
class CompensatedSum {
 public:
  void add(double x);
  void add(cplx x);
  cplx value() const { return {re_ + cre_, im_ + cim_}; }
  double real() const { return re_ + cre_; }

 private:
  static void step(double& s, double& c, double x);
  double re_ = 0, cre_ = 0, im_ = 0, cim_ = 0;
};

struct QuadOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-15;
  unsigned max_depth = 20;  // bisection depth cap for adaptive rules
  std::size_t max_panels = 50'000'000;
};

struct QuadResult {
  cplx value{};
  double error = 0;
  bool ok = true;  // false when the error target was missed
  std::size_t panels = 0;
};

using Integrand = std::function<cplx(double)>;

// Adaptive Gauss-Kronrod (7/15) on a finite interval.
QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt = {});

// Adaptive rule applied separately on consecutive sub-intervals [pts[i], pts[i+1]].
QuadResult integrate_breaks(const Integrand& f, const std::vector<double>& pts, const QuadOptions& opt = {});

// Fixed Gauss-Kronrod 15 on panels [y_i, y_{i+1}] of a monotone map x(y); meant for
// oscillatory integrands whose phase is linear in y.
QuadResult integrate_panels(const Integrand& f_of_y, double y0, double y1, std::size_t n_panels,
                            const QuadOptions& opt = {});

// Integral of x^{-sigma} g(x) over [a, inf), a > 0, sigma > 1, for g bounded at infinity.
// Substitutes x = a u^{-1/(sigma-1)}, which maps the power tail onto [0,1] with a bounded integrand.
QuadResult integrate_power_tail(const Integrand& g, double a, double sigma, const QuadOptions& opt = {});

// Polynomial (Neville) extrapolation to h = 0 from samples (h_i, v_i).
double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& v);

}  // namespace manin
