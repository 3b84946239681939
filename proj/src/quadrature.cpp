#include "manin/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "manin/errors.hpp"

namespace manin {

using GK15 = boost::math::quadrature::gauss_kronrod<double, 15>;

void CompensatedSum::step(double& s, double& c, double x) {
  double t = s + x;
  if (std::fabs(s) >= std::fabs(x))
    c += (s - t) + x;
  else
    c += (x - t) + s;
  s = t;
}

void CompensatedSum::add(double x) { step(re_, cre_, x); }

void CompensatedSum::add(cplx x) {
  step(re_, cre_, x.real());
  step(im_, cim_, x.imag());
}

QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt) {
  QuadResult out;
  if (a == b) return out;
  double err = 0, l1 = 0;
  // leaf errors come back unscaled from [-1,1]; work on [0,1] so the stopping test sees the true scale
  double w = b - a;
  if (w != 1) {
    auto g = [&](double t) { return f(a + w * t); };
    out.value = w * GK15::integrate(g, 0.0, 1.0, opt.max_depth, opt.rel_tol, &err, &l1);
    err *= std::fabs(w);
    l1 *= std::fabs(w);
  } else {
    out.value = GK15::integrate(f, a, b, opt.max_depth, opt.rel_tol, &err, &l1);
  }
  out.error = err;
  out.panels = 1;
  out.ok = std::isfinite(out.value.real()) && std::isfinite(out.value.imag()) &&
           err <= std::max(opt.rel_tol * std::max(std::abs(out.value), l1 * 1e-3), opt.abs_tol) * 10;
  return out;
}

QuadResult integrate_breaks(const Integrand& f, const std::vector<double>& pts, const QuadOptions& opt) {
  QuadResult out;
  CompensatedSum sum;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] <= pts[i]) continue;
    auto r = integrate(f, pts[i], pts[i + 1], opt);
    sum.add(r.value);
    out.error += r.error;
    out.ok = out.ok && r.ok;
    out.panels += r.panels;
  }
  out.value = sum.value();
  return out;
}

QuadResult integrate_panels(const Integrand& f, double y0, double y1, std::size_t n_panels,
                            const QuadOptions& opt) {
  QuadResult out;
  if (n_panels == 0 || y0 == y1) return out;
  if (n_panels > opt.max_panels) throw BudgetExceeded("quadrature panel cap exceeded");
  CompensatedSum sum;
  double h = (y1 - y0) / static_cast<double>(n_panels);
  double scale = 0;
  for (std::size_t i = 0; i < n_panels; ++i) {
    double a = y0 + h * static_cast<double>(i);
    double b = (i + 1 == n_panels) ? y1 : a + h;
    double err = 0, l1 = 0;
    cplx v = GK15::integrate(f, a, b, 0, 0.0, &err, &l1);
    // Boost reports the non-adaptive error on the reference interval [-1,1]
    err *= 0.5 * (b - a);
    sum.add(v);
    // QUADPACK-style rescaling of |K15 - G7|
    if (l1 > 0 && err > 0) err = l1 * std::min(1.0, std::pow(200.0 * err / l1, 1.5));
    out.error += err;
    scale += l1;
  }
  out.value = sum.value();
  out.panels = n_panels;
  out.ok = out.error <= std::max(opt.rel_tol * std::max(std::abs(out.value), 1e-6 * scale), opt.abs_tol) * 10;
  return out;
}

QuadResult integrate_power_tail(const Integrand& g, double a, double sigma, const QuadOptions& opt) {
  if (!(sigma > 1) || !(a > 0)) throw std::invalid_argument("integrate_power_tail: need sigma > 1, a > 0");
  double e = 1.0 / (sigma - 1.0);
  auto h = [&](double u) -> cplx {
    if (u <= 0) return 0.0;
    double x = a * std::pow(u, -e);
    if (!std::isfinite(x)) return 0.0;
    return g(x);
  };
  auto r = integrate(h, 0.0, 1.0, opt);
  double scale = std::pow(a, 1.0 - sigma) * e;
  r.value *= scale;
  r.error *= scale;
  return r;
}

double extrapolate_to_zero(const std::vector<double>& h, const std::vector<double>& v) {
  if (h.size() != v.size() || h.empty()) throw std::invalid_argument("extrapolate_to_zero: bad samples");
  std::vector<double> p = v;
  std::size_t n = h.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
  return p[0];
}

}  // namespace manin
