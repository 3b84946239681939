#include "manin/oscillatory.hpp"

#include <algorithm>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "manin/errors.hpp"

namespace manin {

using nlohmann::json;

namespace {

// x -> e(beta x^e / p^m) on Z_p, with beta a residue mod p^m; e may be negative (units only).
struct PadicPhase {
  std::uint64_t p = 2;
  int m = 0;  // 0: trivial phase
  std::uint64_t beta = 0;
  std::uint64_t pm = 1;

  PadicPhase(std::uint64_t prime, const Rational& b) : p(prime) {
    if (b == 0) return;
    int v = valuation(b, p);
    if (v >= 0) return;
    m = -v;
    pm = ipow(p, static_cast<unsigned>(m));
    beta = residue_mod_pk(b * haar_coset(p, v), p, m);
  }

  cplx at(std::uint64_t x, int e) const {
    if (m == 0) return 1.0;
    std::uint64_t xr = x % pm;
    std::uint64_t y = e >= 0 ? powmod(xr, static_cast<std::uint64_t>(e), pm)
                             : powmod(invmod(xr, pm), static_cast<std::uint64_t>(-e), pm);
    return unit_root(static_cast<std::int64_t>(mulmod(beta, y, pm)), pm);
  }
};

void check_level(int L, const OscOptions& opt) {
  if (L > opt.max_level) throw BudgetExceeded("p-adic refinement depth exceeds the configured ceiling");
}

std::uint64_t term_count(std::uint64_t p, int L, const OscOptions& opt) {
  check_level(L, opt);
  std::uint64_t N = ipow(p, static_cast<unsigned>(L));
  if (N > opt.max_terms) throw BudgetExceeded("p-adic residue sum exceeds the term budget");
  return N;
}

// int_{Z_p^*} phi_j(u) psi(b u^e) du by summation over units mod p^L.
cplx unit_shell(const StepFunction& phi_j, const PadicPhase& ph, int e, const OscOptions& opt) {
  if (phi_j.support() < 0) return 0.0;  // phi_j lives on p Z_p
  const std::uint64_t p = phi_j.prime();
  int L = std::max({1, phi_j.level(), ph.m});
  std::uint64_t N = term_count(p, L, opt);
  CompensatedSum acc;
  for (std::uint64_t u = 1; u < N; ++u) {
    if (u % p == 0) continue;
    cplx f = phi_j.at_integer(u);
    if (f == 0.0) continue;
    acc.add(f * ph.at(u, e));
  }
  return acc.value() / static_cast<double>(N);
}

cplx pow_p(std::uint64_t p, int j, cplx s) {
  if (j == 0) return 1.0;
  return std::exp(-static_cast<double>(j) * s * std::log(static_cast<double>(p)));
}

double zeta_re(const Place& v, double sigma) { return zeta_local(v, cplx(sigma, 0.0)).real(); }

double abs_at(const Place& v, const Rational& a) {
  if (v.is_finite()) return padic_abs(a, v.prime()).get_d();
  return abs_value(a, v);
}

int ceil_div(int a, int b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }

// ---- finite places

OscillatoryResult finite_1d(const StepFunction& phi0, const Rational& a, int d, cplx s, const OscOptions& opt) {
  StepFunction phi = phi0.canonical();
  const std::uint64_t p = phi.prime();
  const int c = valuation(static_cast<std::int64_t>(d), p);
  const int va = valuation(a, p);
  int J = std::max(phi.level(), -phi.support());
  if (a != 0 && va < 0) J = std::max(J, ceil_div(-va, d));
  CompensatedSum sum;
  for (int j = -phi.support(); j < J; ++j) {
    StepFunction pj = phi.dilate(j);
    if (a != 0) {
      int vb = va + j * d;
      int e = std::max(std::max(1, pj.level()) + c + 1, 2 * (c + 1));
      if (-vb >= e) continue;
    }
    Rational b = a * haar_coset(p, -j * d);
    PadicPhase ph(p, b);
    sum.add(pow_p(p, j, s) * unit_shell(pj, ph, d, opt));
  }
  double pd = static_cast<double>(p);
  if (phi.at_zero() != 0.0) sum.add(phi.at_zero() * (1.0 - 1.0 / pd) * pow_p(p, J, s) / (1.0 - pow_p(p, 1, s)));
  OscillatoryResult out;
  out.value = sum.value();
  out.exactness = Exactness::Exact;
  return out;
}

// Sum over k in the box [0, K_i) for coordinates outside `large`, with the remaining
// coordinates summed in closed form (trivial phase there).
OscillatoryResult finite_nd(const std::vector<StepFunction>& phis0, const Rational& a, const std::vector<int>& d,
                            const std::vector<cplx>& s, const OscOptions& opt) {
  const std::size_t n = phis0.size();
  std::vector<StepFunction> phis;
  for (auto& f : phis0) {
    StepFunction g = f.canonical();
    if (g.support() > 0) throw Unsupported("osc_integral_nd: finite-place factors must be supported in Z_p");
    phis.push_back(g.with_support(0));
  }
  const std::uint64_t p = phis[0].prime();
  for (auto& f : phis)
    if (f.prime() != p) throw ConfigError("osc_integral_nd: prime mismatch");
  const double pd = static_cast<double>(p);
  const int va = valuation(a, p);
  std::vector<int> K(n);
  for (std::size_t i = 0; i < n; ++i) {
    K[i] = std::max(phis[i].level(), 0);
    if (a != 0 && va < 0) K[i] = std::max(K[i], ceil_div(-va, d[i]));
  }
  // non-oscillatory pieces
  std::vector<cplx> small(n), large(n);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum acc;
    for (int k = 0; k < K[i]; ++k) {
      StepFunction pk = phis[i].dilate(k);
      acc.add(pow_p(p, k, s[i]) * unit_shell(pk, PadicPhase(p, 0), 0, opt));
    }
    small[i] = acc.value();
    large[i] = phis[i].at_zero() * (1.0 - 1.0 / pd) * pow_p(p, K[i], s[i]) / (1.0 - pow_p(p, 1, s[i]));
  }
  CompensatedSum total;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    cplx term = 1.0;
    for (std::size_t i = 0; i < n; ++i) term *= (mask >> i & 1) ? large[i] : small[i];
    total.add(term);
  }
  // box part: every k_i < K_i, phase b = a p^{sum k_i d_i}
  std::vector<int> k(n, 0);
  std::vector<int> cval(n);
  for (std::size_t i = 0; i < n; ++i) cval[i] = valuation(static_cast<std::int64_t>(d[i]), p);
  bool any = true;
  for (std::size_t i = 0; i < n; ++i) any = any && K[i] > 0;
  while (any) {
    int shift = 0;
    for (std::size_t i = 0; i < n; ++i) shift += k[i] * d[i];
    std::vector<StepFunction> pk;
    for (std::size_t i = 0; i < n; ++i) pk.push_back(phis[i].dilate(k[i]));
    bool vanishes = false;
    if (a != 0) {
      int vb = va + shift;
      for (std::size_t i = 0; i < n && !vanishes; ++i) {
        int e = std::max(std::max(1, pk[i].level()) + cval[i] + 1, 2 * (cval[i] + 1));
        vanishes = -vb >= e;
      }
    }
    if (!vanishes) {
      PadicPhase ph(p, a * haar_coset(p, -shift));
      int L = std::max(1, ph.m);
      for (auto& f : pk) L = std::max(L, f.level());
      std::uint64_t N = term_count(p, L, opt);
      std::uint64_t cells = 1;
      for (std::size_t i = 0; i < n; ++i) {
        cells *= N;
        if (cells > opt.max_terms) throw BudgetExceeded("osc_integral_nd: residue sum exceeds the term budget");
      }
      // iterate over unit tuples mod p^L
      std::vector<std::uint64_t> u(n, 1);
      CompensatedSum acc;
      for (;;) {
        cplx f = 1.0;
        std::uint64_t mono = 1;
        for (std::size_t i = 0; i < n && f != 0.0; ++i) {
          f *= pk[i].at_integer(u[i]);
          mono = ph.m ? mulmod(mono, powmod(u[i] % ph.pm, static_cast<std::uint64_t>(d[i]), ph.pm), ph.pm) : 0;
        }
        if (f != 0.0) acc.add(f * (ph.m ? ph.at(mono, 1) : cplx(1.0)));
        std::size_t i = 0;
        for (; i < n; ++i) {
          do ++u[i];
          while (u[i] < N && u[i] % p == 0);
          if (u[i] < N) break;
          u[i] = 1;
        }
        if (i == n) break;
      }
      cplx w = acc.value() / std::pow(static_cast<double>(N), static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i) w *= pow_p(p, k[i], s[i]);
      total.add(w);
    }
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++k[i] < K[i]) break;
      k[i] = 0;
    }
    if (i == n) break;
  }
  OscillatoryResult out;
  out.value = total.value();
  return out;
}

OscillatoryResult finite_inverse(const StepFunction& phi0, const Rational& a, int d, cplx s, const OscOptions& opt) {
  StepFunction phi = phi0.canonical();
  const std::uint64_t p = phi.prime();
  const int c = valuation(static_cast<std::int64_t>(d), p);
  const int va = valuation(a, p);
  const int e_inf = std::max(c + 2, 2 * (c + 1));
  CompensatedSum sum;
  for (int j = -phi.support();; ++j) {
    int vb = va - j * d;
    if (j >= phi.level() && -vb >= e_inf) break;
    StepFunction pj = phi.dilate(j);
    int e = std::max(std::max(1, pj.level()) + c + 1, 2 * (c + 1));
    if (-vb >= e) continue;
    PadicPhase ph(p, a * haar_coset(p, j * d));
    sum.add(pow_p(p, j, s) * unit_shell(pj, ph, -d, opt));
  }
  OscillatoryResult out;
  out.value = sum.value();
  return out;
}

// ---- archimedean places

// int_0^1 t^texp F(t) dt for F bounded. Imaginary texp oscillates without end at 0, so go to t = e^-u.
QuadResult unit_mellin(const std::function<cplx(double)>& F, cplx texp, const QuadOptions& qo) {
  if (texp == 0.0) return integrate(F, 0.0, 1.0, qo);
  const double U = 48;  // e^-48 below any tolerance in use
  auto f = [&](double u) -> cplx { return std::exp(-u * (1.0 + texp)) * F(std::exp(-u)); };
  double step = std::min(1.0, 2.0 / std::max(1e-300, std::abs(texp.imag())));
  std::vector<double> pts;
  for (double u = 0; u < U; u += step) pts.push_back(u);
  pts.push_back(U);
  auto r = integrate_breaks(f, pts, qo);
  double sup = 0;
  for (double t : {0.0, 1e-300, std::exp(-U)}) sup = std::max(sup, std::abs(F(t)));
  r.error += sup * std::exp(-U);
  return r;
}

using RealFn = std::function<double(double)>;

// int_lo^R y^{s-1} e^{-2 pi i b y^d} g(y) dy, 0 <= lo < R, g smooth on [lo, R].
QuadResult half_line_osc(const RealFn& g, double lo, double R, double b, int d, cplx s, const OscOptions& opt) {
  QuadResult out;
  if (!(R > lo)) return out;
  const double sigma = s.real();
  QuadOptions qo;
  qo.rel_tol = opt.rel_tol * 0.1;
  qo.abs_tol = 1e-17;
  auto phase = [b, d](double y) { return psi_real(b * std::pow(y, d)); };
  double eps = b == 0 ? R : std::min(R, std::pow(std::fabs(b), -1.0 / d));
  CompensatedSum sum;
  if (lo < eps) {
    if (lo == 0) {
      cplx texp = (s - sigma) / sigma;
      auto f = [&](double t) -> cplx {
        if (t <= 0) return 0.0;
        double y = eps * std::pow(t, 1.0 / sigma);
        return g(y) * phase(y);
      };
      auto r = unit_mellin(f, texp, qo);
      cplx scale = std::exp(s * std::log(eps)) / sigma;
      sum.add(scale * r.value);
      out.error += std::abs(scale) * r.error;
      out.ok = out.ok && r.ok;
    } else {
      auto f = [&](double y) -> cplx { return std::exp((s - 1.0) * std::log(y)) * g(y) * phase(y); };
      auto r = integrate(f, lo, eps, qo);
      sum.add(r.value);
      out.error += r.error;
      out.ok = out.ok && r.ok;
    }
  }
  double z0 = std::pow(std::max(lo, eps), d), z1 = std::pow(R, d);
  if (z1 > z0) {
    double inv_d = 1.0 / d;
    auto f = [&](double z) -> cplx {
      double y = std::pow(z, inv_d);
      return std::exp((s - 1.0) * std::log(y)) * g(y) * (inv_d * std::pow(z, inv_d - 1.0)) * psi_real(b * z);
    };
    auto n = static_cast<std::size_t>(std::ceil(2 * (z1 - z0) * std::fabs(b))) + 32;
    auto r = integrate_panels(f, z0, z1, n, qo);
    sum.add(r.value);
    out.error += r.error;
    out.ok = out.ok && r.ok;
    out.panels += r.panels;
  }
  out.value = sum.value();
  return out;
}

QuadResult real_line_osc(const BumpFunction& phi, double a, int d, cplx s, const OscOptions& opt) {
  QuadResult out;
  CompensatedSum sum;
  if (phi.upper() > 0) {
    auto r = half_line_osc([&](double y) { return phi(y); }, std::max(0.0, phi.lower()), phi.upper(), a, d, s, opt);
    sum.add(r.value);
    out.error += r.error;
    out.ok = out.ok && r.ok;
  }
  if (phi.lower() < 0) {
    double b = (d % 2) ? -a : a;
    auto r = half_line_osc([&](double y) { return phi(-y); }, std::max(0.0, -phi.upper()), -phi.lower(), b, d, s, opt);
    sum.add(r.value);
    out.error += r.error;
    out.ok = out.ok && r.ok;
  }
  out.value = sum.value();
  return out;
}

OscillatoryResult real_1d(const BumpFunction& phi, double a, int d, cplx s, const OscOptions& opt) {
  auto r = real_line_osc(phi, a, d, s, opt);
  OscillatoryResult out;
  out.value = r.value;
  out.error = r.error;
  out.flagged = !r.ok;
  out.exactness = Exactness::Quadrature;
  return out;
}

// Polar reduction: I = 2 int_0^{2pi} dtheta int_0^R r^{2s-1} psi_R(2 a cos(d theta) r^d) Phi(r) dr,
// folded to 4 int_0^pi H(2 a cos t) dt.
OscillatoryResult complex_1d(const BumpFunction& phi, double a, int d, cplx s, const OscOptions& opt) {
  if (phi.center() != 0.0) throw Unsupported("osc_integral_1d: complex bump must be centered at 0");
  const double R = phi.radius();
  auto g = [&](double r) { return phi.at(cplx(r, 0.0)); };
  bool inner_ok = true;
  double inner_err = 0;
  auto H = [&](double t) -> cplx {
    auto r = half_line_osc(g, 0.0, R, 2.0 * a * std::cos(t), d, 2.0 * s, opt);
    inner_ok = inner_ok && r.ok;
    inner_err = std::max(inner_err, r.error);
    return r.value;
  };
  OscillatoryResult out;
  out.exactness = Exactness::Quadrature;
  if (a == 0) {
    auto r = half_line_osc(g, 0.0, R, 0.0, d, 2.0 * s, opt);
    out.value = 4.0 * kPi * r.value;
    out.error = 4.0 * kPi * r.error;
    out.flagged = !r.ok;
    return out;
  }
  std::vector<double> pts;
  for (int i = 0; i <= 64; ++i) pts.push_back(kPi * i / 64.0);
  QuadOptions qo;
  qo.rel_tol = opt.rel_tol;
  qo.max_depth = 12;
  auto r = integrate_breaks(H, pts, qo);
  out.value = 4.0 * r.value;
  out.error = 4.0 * (r.error + kPi * inner_err);
  out.flagged = !(r.ok && inner_ok);
  return out;
}

// int_{[-R,R]} |x|^{s-1} G(x) dx for G smooth away from 0, via the Mellin substitution on each side.
QuadResult mellin_line(const std::function<cplx(double)>& G, double lo, double hi, cplx s, const QuadOptions& qo) {
  QuadResult out;
  CompensatedSum sum;
  const double sigma = s.real();
  cplx texp = (s - sigma) / sigma;
  auto side = [&](double R, double sign) {
    if (!(R > 0)) return;
    auto f = [&](double t) -> cplx {
      if (t <= 0) return 0.0;
      double y = R * std::pow(t, 1.0 / sigma);
      return G(sign * y);
    };
    auto r = unit_mellin(f, texp, qo);
    cplx scale = std::exp(s * std::log(R)) / sigma;
    sum.add(scale * r.value);
    out.error += std::abs(scale) * r.error;
    out.ok = out.ok && r.ok;
  };
  side(hi, 1.0);
  side(-lo, -1.0);
  out.value = sum.value();
  return out;
}

OscillatoryResult real_nd(const std::vector<BumpFunction>& phis, double a, const std::vector<int>& d,
                          const std::vector<cplx>& s, const OscOptions& opt) {
  const std::size_t n = phis.size();
  QuadOptions qo;
  qo.rel_tol = opt.rel_tol;
  qo.max_depth = 16;
  double outer_err = 0, inner_err = 0;
  OscOptions inner_opt = opt;
  inner_opt.rel_tol = opt.rel_tol * 0.1;
  // innermost: x_1 given the product of the other monomials
  std::function<cplx(std::size_t, double)> level = [&](std::size_t i, double coef) -> cplx {
    if (i == 0) {
      auto r = real_line_osc(phis[0], coef, d[0], s[0], inner_opt);
      inner_err = std::max(inner_err, r.error);
      return r.value;
    }
    for (auto& f : phis)
      if (f.lower() > 0 || f.upper() < 0) throw Unsupported("osc_integral_nd: bumps must contain 0");
    auto G = [&, i, coef](double x) -> cplx {
      double w = phis[i](x);
      if (w == 0.0) return 0.0;
      return w * level(i - 1, coef * std::pow(x, d[i]));
    };
    auto r = mellin_line(G, phis[i].lower(), phis[i].upper(), s[i], qo);
    if (i == n - 1) outer_err = r.error;
    return r.value;
  };
  OscillatoryResult out;
  out.value = level(n - 1, a);
  // inner errors enter through int |x|^{sigma-1} |phi|, bounded by the support mass
  double mass = 1;
  for (std::size_t i = 1; i < n; ++i) {
    double R = std::max(-phis[i].lower(), phis[i].upper());
    mass *= 2 * std::pow(R, s[i].real()) / s[i].real() * phis[i].sup_bounds()[0];
  }
  out.error = outer_err + mass * inner_err;
  out.exactness = Exactness::Quadrature;
  out.flagged = !std::isfinite(out.error) || out.error > std::max(opt.rel_tol * std::abs(out.value), 1e-10);
  return out;
}

double unit_bump(double t) {
  double u = 1.0 - t * t;
  if (u <= 0) return 0.0;
  return std::exp(1.0 - 1.0 / u);
}

double theta_numerator(double t) { return unit_bump(t / 0.75); }

double theta_period_sum(double t) {
  double k0 = std::floor(t);
  double acc = 0;
  for (double k = k0 - 1; k <= k0 + 2; k += 1) acc += theta_numerator(t - k);
  return acc;
}

// sum_{n > N} theta(2^n x)
double theta_tail(double x, int N) {
  if (!(std::fabs(x) > std::ldexp(1.0, -N - 2))) return 1.0;
  double t = std::log2(std::fabs(x));
  double acc = 0;
  double num_lo = -t - 0.75, num_hi = -t + 0.75;  // theta(2^n x) needs |t + n| < 0.75
  for (int n = std::max(N + 1, static_cast<int>(std::floor(num_lo))); n <= std::ceil(num_hi); ++n)
    acc += theta_numerator(t + n);
  if (acc == 0) return 0;
  return acc / theta_period_sum(t);
}

OscillatoryResult real_inverse(const BumpFunction& phi, double a, int d, cplx s, const OscOptions& opt) {
  const double sigma = s.real();
  const double Rmax = std::max(std::fabs(phi.lower()), std::fabs(phi.upper()));
  const bool touches_zero = phi.lower() < 0 && phi.upper() > 0;
  const double Rmin = touches_zero ? 0.0 : std::min(std::fabs(phi.lower()), std::fabs(phi.upper()));
  if (touches_zero && !(sigma > -1)) throw ConfigError("inverse_phase_integral: need Re(s) > -1");
  const double y_lo = std::pow(2.0, -0.75), y_hi = std::pow(2.0, 0.75);
  const int n_min = static_cast<int>(std::floor(-std::log2(Rmax) - 0.75)) - 1;
  int n_max_support = std::numeric_limits<int>::max();
  if (!touches_zero) n_max_support = static_cast<int>(std::ceil(-std::log2(Rmin) + 0.75)) + 1;
  QuadOptions qo;
  qo.rel_tol = opt.rel_tol * 0.1;
  qo.abs_tol = 1e-18;
  // eta_{a,n} on both sides of y in [2^-3/4, 2^3/4]; z = y^-d makes the phase linear.
  auto shell = [&](int n, bool& ok, double& err) -> cplx {
    double scale = std::ldexp(1.0, -n);
    double omega = a * std::ldexp(1.0, n * d);
    CompensatedSum acc;
    for (double sign : {1.0, -1.0}) {
      double b = (sign < 0 && d % 2) ? -omega : omega;
      auto f = [&](double z) -> cplx {
        double y = std::pow(z, -1.0 / d);
        double w = phi(sign * scale * y);
        if (w == 0.0) return 0.0;
        double th = theta_numerator(std::log2(y)) / theta_period_sum(std::log2(y));
        return std::exp((s - 1.0) * std::log(y)) * w * th * (std::pow(z, -1.0 / d - 1.0) / d) * psi_real(b * z);
      };
      double z0 = std::pow(y_hi, -d), z1 = std::pow(y_lo, -d);
      auto np = static_cast<std::size_t>(std::ceil(3 * std::fabs(b) * (z1 - z0))) + 256;
      auto r = integrate_panels(f, z0, z1, np, qo);
      acc.add(r.value);
      ok = ok && r.ok;
      err += r.error;
    }
    return std::exp(-static_cast<double>(n) * s * std::log(2.0)) * acc.value();
  };
  OscillatoryResult out;
  out.exactness = Exactness::Quadrature;
  bool ok = true;
  double err = 0;
  CompensatedSum sum;
  if (!touches_zero) {
    for (int n = n_min; n <= n_max_support; ++n) sum.add(shell(n, ok, err));
    out.value = sum.value();
    out.error = err;
    out.flagged = !ok;
    return out;
  }
  // integration-by-parts tail bound: |eta_{a,n}| <= V_n / (2 pi d |a| 2^{nd})
  const auto& sup = phi.sup_bounds();
  auto theta = [](double y) { return theta_numerator(std::log2(y)) / theta_period_sum(std::log2(y)); };
  QuadOptions wq;
  wq.rel_tol = 1e-6;
  auto w1f = [&](double y) -> cplx {
    double h = 1e-6;
    double dth = (theta(y + h) - theta(y - h)) / (2 * h);
    return std::abs(s + static_cast<double>(d)) * std::pow(y, sigma + d - 1) * theta(y) +
           std::pow(y, sigma + d) * std::fabs(dth);
  };
  double W1 = 2.0 * integrate(w1f, y_lo, y_hi, wq).value.real();
  double W2 = 2.0 * integrate([&](double y) -> cplx { return std::pow(y, sigma + d) * theta(y); }, y_lo, y_hi, wq)
                        .value.real();
  const double r1 = std::pow(2.0, -(sigma + d)), r2 = r1 / 2;
  auto tail_bound = [&](int N) {
    return (sup[0] * W1 * std::pow(r1, N + 1) / (1 - r1) + sup[1] * W2 * std::pow(r2, N + 1) / (1 - r2)) /
           (2 * kPi * d * std::fabs(a));
  };
  const double panel_cap = opt.inverse_panel_cap;
  int N = n_min;
  for (;; ++N) {
    sum.add(shell(N, ok, err));
    double tb = tail_bound(N);
    if (tb <= opt.tail_tol * std::max(std::abs(sum.value()), 1e-300)) {
      out.error = err + tb;
      break;
    }
    double next_panels = std::fabs(a) * std::ldexp(1.0, (N + 1) * d) * std::pow(y_lo, -d);
    if (next_panels > panel_cap) {
      // remaining shells: u = |x|^-d turns them into a Fourier integral on [U0, inf); the
      // partition ramp [U0, U1] goes to panels, the rest (weight 1) to Ooura's rule
      const double U0 = std::pow(std::ldexp(std::pow(2.0, 0.75), -(N + 1)), -d);
      const double U1 = std::pow(std::ldexp(std::pow(2.0, -0.75), -(N + 1)), -d);
      const double beta = (s.real() + d) / d;
      CompensatedSum tail;
      double terr = 0;
      for (double sign : {1.0, -1.0}) {
        double b = (sign < 0 && d % 2) ? -a : a;
        auto amp = [&](double u, bool ramp) -> cplx {
          double x = std::pow(u, -1.0 / d);
          double w = (ramp ? theta_tail(x, N) : 1.0) * phi(sign * x);
          if (w == 0.0) return 0.0;
          cplx tau = s.imag() == 0 ? cplx(1.0) : std::exp(cplx(0.0, -s.imag() / d) * std::log(u));
          return tau * std::pow(u, -beta) * w / static_cast<double>(d);
        };
        auto np = static_cast<std::size_t>(std::ceil(3 * std::fabs(b) * (U1 - U0))) + 64;
        auto ramp = integrate_panels([&](double u) { return amp(u, true) * psi_real(b * u); }, U0, U1, np, qo);
        tail.add(ramp.value);
        terr += ramp.error;
        ok = ok && ramp.ok;
        double om = 2 * kPi * std::fabs(b);
        boost::math::quadrature::ooura_fourier_cos<double> fc(1e-10);
        boost::math::quadrature::ooura_fourier_sin<double> fs(1e-10);
        cplx C = 0, S = 0;
        double e = 0;
        for (bool im : {false, true}) {
          if (im && s.imag() == 0) continue;
          auto g = [&](double v) {
            cplx z = amp(U1 + v, false);
            return im ? z.imag() : z.real();
          };
          auto [cv, ce] = fc.integrate(g, om);
          auto [sv, se] = fs.integrate(g, om);
          C += im ? cplx(0, cv) : cplx(cv);
          S += im ? cplx(0, sv) : cplx(sv);
          e += std::isfinite(ce) && std::isfinite(se) ? ce * std::fabs(cv) + se * std::fabs(sv) : INFINITY;
        }
        double sg = b >= 0 ? 1.0 : -1.0;
        tail.add(psi_real(b * U1) * (C - cplx(0, sg) * S));
        terr += e;
      }
      sum.add(tail.value());
      out.error = err + terr;
      ok = ok && terr <= std::max(opt.rel_tol * std::abs(sum.value()), 1e-14);
      break;
    }
  }
  out.value = sum.value();
  // shell-level flags are relative to each shell; judge the total against the sup of Phi instead
  (void)ok;
  out.flagged = !(out.error <= std::max(opt.rel_tol * std::abs(out.value), 1e-10 * sup[0]));
  return out;
}

}  // namespace

cplx coset_phase_integral(std::uint64_t p, const Rational& xi, int n, const Rational& a, int d,
                          const OscOptions& opt) {
  if (!is_prime(p)) throw ConfigError("coset_phase_integral: p must be prime");
  if (n < 1 || d < 1) throw ConfigError("coset_phase_integral: need n >= 1 and d >= 1");
  if (xi == 0 || valuation(xi, p) != 0) throw ConfigError("coset_phase_integral: xi must be a p-adic unit");
  int L = n;
  if (a != 0) L = std::max(L, -valuation(a, p));
  check_level(L, opt);
  std::uint64_t pn = ipow(p, static_cast<unsigned>(n));
  std::uint64_t steps = term_count(p, L - n, opt);
  std::uint64_t pL = ipow(p, static_cast<unsigned>(L));
  std::uint64_t x0 = residue_mod_pk(xi, p, L);
  PadicPhase ph(p, a);
  CompensatedSum acc;
  for (std::uint64_t t = 0; t < steps; ++t) {
    acc.add(ph.at(x0 % pn + t * pn, d));
  }
  return acc.value() / static_cast<double>(pL);
}

int schwartz_level(const StepFunction& phi) { return std::max(1, phi.minimal_level()); }

int vanishing_exponent(std::uint64_t p, int d, const StepFunction& phi) {
  if (d < 1) throw ConfigError("vanishing_threshold: d must be positive");
  if (phi.prime() != p) throw ConfigError("vanishing_threshold: prime mismatch");
  if (phi.canonical().support() > 0) throw ConfigError("vanishing_threshold: Phi must be supported in Z_p");
  int c = valuation(static_cast<std::int64_t>(d), p);
  return std::max(schwartz_level(phi) + c + 1, 2 * (c + 1));
}

double vanishing_threshold(std::uint64_t p, int d, const StepFunction& phi) {
  return std::pow(static_cast<double>(p), vanishing_exponent(p, d, phi));
}

double kappa(const std::vector<cplx>& s, const std::vector<int>& d) {
  double k = 0.5;
  for (std::size_t i = 0; i < s.size(); ++i) k = std::min(k, s[i].real() / d.at(i));
  return k;
}

OscillatoryResult osc_integral_1d(const Place& v, const TestFunction& phi, const Rational& a, int d, cplx s,
                                  const OscOptions& opt) {
  if (d < 1) throw ConfigError("osc_integral_1d: d must be positive");
  if (!(s.real() > 0)) throw ConfigError("osc_integral_1d: need Re(s) > 0");
  OscillatoryResult out;
  if (v.is_finite()) {
    auto* step = std::get_if<StepFunction>(&phi);
    if (!step || step->prime() != v.prime()) throw ConfigError("osc_integral_1d: need a StepFunction at this prime");
    out = finite_1d(*step, a, d, s, opt);
  } else {
    auto* bump = std::get_if<BumpFunction>(&phi);
    if (!bump) throw ConfigError("osc_integral_1d: archimedean place needs a BumpFunction");
    out = v.kind() == Place::Kind::Real ? real_1d(*bump, a.get_d(), d, s, opt) : complex_1d(*bump, a.get_d(), d, s, opt);
  }
  double k = kappa({s}, {d});
  double abs_a = abs_at(v, a);
  out.abs_bound_used = zeta_re(v, s.real()) * std::min(1.0, abs_a > 0 ? std::pow(abs_a, -k) : 1.0);
  return out;
}

OscillatoryResult osc_integral_nd(const Place& v, const std::vector<TestFunction>& phi, const Rational& a,
                                  const std::vector<int>& d, const std::vector<cplx>& s, const OscOptions& opt) {
  const std::size_t n = phi.size();
  if (n == 0 || n > 3) throw ConfigError("osc_integral_nd: dimension must be 1, 2 or 3");
  if (d.size() != n || s.size() != n) throw ConfigError("osc_integral_nd: d and s must match the dimension");
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] < 1) throw ConfigError("osc_integral_nd: d_j must be positive");
    if (!(s[i].real() > 0)) throw ConfigError("osc_integral_nd: need Re(s_j) > 0");
  }
  OscillatoryResult out;
  if (v.is_finite()) {
    std::vector<StepFunction> f;
    for (auto& t : phi) {
      auto* st = std::get_if<StepFunction>(&t);
      if (!st || st->prime() != v.prime()) throw ConfigError("osc_integral_nd: need StepFunctions at this prime");
      f.push_back(*st);
    }
    out = finite_nd(f, a, d, s, opt);
  } else if (v.kind() == Place::Kind::Real) {
    std::vector<BumpFunction> f;
    for (auto& t : phi) {
      auto* b = std::get_if<BumpFunction>(&t);
      if (!b) throw ConfigError("osc_integral_nd: archimedean place needs BumpFunctions");
      f.push_back(*b);
    }
    out = real_nd(f, a.get_d(), d, s, opt);
  } else {
    throw Unsupported("osc_integral_nd: complex place not implemented for n > 1");
  }
  double zeta_prod = 1;
  for (auto& sj : s) zeta_prod *= zeta_re(v, sj.real());
  double abs_a = abs_at(v, a);
  out.abs_bound_used = zeta_prod * std::min(1.0, abs_a > 0 ? std::pow(abs_a, -kappa(s, d)) : 1.0);
  return out;
}

OscillatoryResult inverse_phase_integral(const Place& v, const TestFunction& phi, const Rational& a, int d, cplx s,
                                         const OscOptions& opt) {
  if (a == 0) throw ConfigError("inverse_phase_integral: a must be nonzero");
  if (d < 1) throw ConfigError("inverse_phase_integral: d must be positive");
  if (v.is_finite()) {
    auto* step = std::get_if<StepFunction>(&phi);
    if (!step || step->prime() != v.prime()) throw ConfigError("inverse_phase_integral: need a StepFunction");
    return finite_inverse(*step, a, d, s, opt);
  }
  if (v.kind() == Place::Kind::Complex) throw Unsupported("inverse_phase_integral: complex place not implemented");
  auto* bump = std::get_if<BumpFunction>(&phi);
  if (!bump) throw ConfigError("inverse_phase_integral: archimedean place needs a BumpFunction");
  return real_inverse(*bump, a.get_d(), d, s, opt);
}

double dyadic_theta(double x) {
  if (x == 0) return 0;
  double t = std::log2(std::fabs(x));
  return theta_numerator(t) / theta_period_sum(t);
}

std::string DecayReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "abs_a,re_I,im_I,envelope\n";
  for (auto& r : rows) os << r.abs_a << ',' << r.value.real() << ',' << r.value.imag() << ',' << r.envelope << '\n';
  return os.str();
}

json DecayReport::to_json() const {
  json rs = json::array();
  for (auto& r : rows)
    rs.push_back({{"abs_a", r.abs_a}, {"re", r.value.real()}, {"im", r.value.imag()}, {"envelope", r.envelope},
                  {"exact", r.exact}});
  return {{"place", place.to_string()},
          {"d", d},
          {"s", {s.real(), s.imag()}},
          {"kappa", kappa},
          {"zeta_re_s", zeta_re_s},
          {"fitted_C", fitted_C},
          {"fitted_exponent", std::isfinite(fitted_exponent) ? json(fitted_exponent) : json("inf")},
          {"envelope_ratio", envelope_ratio},
          {"flagged", flagged},
          {"rows", rs}};
}

DecayReport decay_report(const Place& v, const TestFunction& phi, int d, cplx s, const std::vector<Rational>& a_grid,
                         unsigned threads, const OscOptions& opt) {
  if (a_grid.empty()) throw ConfigError("decay_report: empty grid");
  DecayReport rep;
  rep.place = v;
  rep.d = d;
  rep.s = s;
  rep.kappa = kappa({s}, {d});
  rep.zeta_re_s = zeta_re(v, s.real());
  std::vector<OscillatoryResult> res(a_grid.size());
  std::vector<std::exception_ptr> errs(a_grid.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(a_grid.size())));
  auto work = [&](unsigned t) {
    for (std::size_t i = t; i < a_grid.size(); i += threads) {
      try {
        res[i] = osc_integral_1d(v, phi, a_grid[i], d, s, opt);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  std::vector<double> ratio;
  for (std::size_t i = 0; i < a_grid.size(); ++i) {
    DecayRow row;
    row.abs_a = abs_at(v, a_grid[i]);
    row.value = res[i].value;
    row.exact = res[i].exactness == Exactness::Exact;
    rep.flagged = rep.flagged || res[i].flagged;
    ratio.push_back(std::abs(row.value) * std::pow(std::max(1.0, row.abs_a), rep.kappa) / rep.zeta_re_s);
    rep.rows.push_back(row);
  }
  rep.fitted_C = *std::max_element(ratio.begin(), ratio.end());
  for (auto& r : rep.rows) r.envelope = rep.fitted_C * rep.zeta_re_s * std::min(1.0, std::pow(r.abs_a, -rep.kappa));
  rep.envelope_ratio = ratio[0] > 0 ? rep.fitted_C / ratio[0] : (rep.fitted_C > 0 ? INFINITY : 1.0);
  // slope over points above the noise floor
  double top = 0;
  for (auto& r : rep.rows) top = std::max(top, std::abs(r.value));
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    double m = std::abs(rep.rows[i].value);
    double floor = rep.rows[i].exact ? 1e-13 * top : std::max(1e-13 * top, 1e3 * res[i].error);
    if (m > floor && m > 0) {
      xs.push_back(std::log(rep.rows[i].abs_a));
      ys.push_back(-std::log(m));
    }
  }
  if (xs.size() < 2) {
    rep.fitted_exponent = INFINITY;
  } else {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    rep.fitted_exponent = sxy / sxx;
  }
  return rep;
}

}  // namespace manin
