#include "manin/localfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "manin/errors.hpp"

namespace manin {

using nlohmann::json;

Place Place::finite(std::uint64_t p) {
  if (!is_prime(p)) throw ConfigError("not a prime: " + std::to_string(p));
  return Place(Kind::Finite, p);
}

Place Place::parse(const std::string& text) {
  if (text == "inf" || text == "real" || text == "R") return real();
  if (text == "complex" || text == "C") return complex();
  try {
    std::size_t used = 0;
    unsigned long long p = std::stoull(text, &used);
    if (used != text.size()) throw ConfigError("bad place: " + text);
    return finite(p);
  } catch (const std::logic_error&) {
    throw ConfigError("bad place: " + text);
  }
}

std::string Place::to_string() const {
  switch (kind_) {
    case Kind::Real: return "inf";
    case Kind::Complex: return "complex";
    default: return std::to_string(p_);
  }
}

cplx unit_root(std::int64_t r, std::uint64_t n) {
  auto nn = static_cast<std::int64_t>(n);
  std::int64_t m = r % nn;
  if (m < 0) m += nn;
  auto um = static_cast<unsigned __int128>(m);
  if ((4 * um) % n == 0) {
    switch (static_cast<int>(4 * um / n)) {
      case 0: return {1, 0};
      case 1: return {0, 1};
      case 2: return {-1, 0};
      default: return {0, -1};
    }
  }
  long double angle = 2.0L * 3.141592653589793238462643383279502884L * static_cast<long double>(m) /
                      static_cast<long double>(n);
  return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

namespace {

// e^{2 pi i t} for an exact rational t.
cplx exp_2pi_i(const Rational& t) {
  Integer fl;
  mpz_fdiv_q(fl.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
  Rational f = t - Rational(fl);
  f.canonicalize();
  if (f.get_den().fits_ulong_p() && f.get_num().fits_slong_p()) {
    return unit_root(f.get_num().get_si(), f.get_den().get_ui());
  }
  long double angle = 2.0L * 3.141592653589793238462643383279502884L * static_cast<long double>(f.get_d());
  return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

}  // namespace

Rational abs_exact(const Rational& x, std::uint64_t p) { return padic_abs(x, p); }

double abs_value(const Rational& x, const Place& v) {
  switch (v.kind()) {
    case Place::Kind::Real: return std::fabs(x.get_d());
    case Place::Kind::Complex: {
      double d = x.get_d();
      return d * d;
    }
    default: return padic_abs(x, v.prime()).get_d();
  }
}

double abs_value(cplx z, const Place& v) {
  switch (v.kind()) {
    case Place::Kind::Real: return std::fabs(z.real());
    case Place::Kind::Complex: return std::norm(z);
    default: throw ConfigError("abs_value: complex argument at a finite place");
  }
}

cplx psi(const Place& v, const Rational& x) {
  switch (v.kind()) {
    case Place::Kind::Real: return exp_2pi_i(-x);
    case Place::Kind::Complex: return exp_2pi_i(-2 * x);
    default: return exp_2pi_i(frac_p(x, v.prime()));
  }
}

cplx psi_real(double x) {
  double f = x - std::floor(x);
  return std::polar(1.0, -2.0 * kPi * f);
}

cplx psi_complex(cplx z) { return psi_real(2.0 * z.real()); }

double haar_ball(const Place& v, double r) {
  if (r < 0) throw ConfigError("haar_ball: negative radius");
  switch (v.kind()) {
    case Place::Kind::Real: return 2.0 * r;
    case Place::Kind::Complex: return 2.0 * kPi * r;
    default: {
      if (r == 0) return 0;
      double k = std::log(r) / std::log(static_cast<double>(v.prime()));
      double kr = std::round(k);
      if (std::fabs(k - kr) > 1e-9) throw ConfigError("haar_ball: radius not in the value group");
      return std::pow(static_cast<double>(v.prime()), kr);
    }
  }
}

Rational haar_coset(std::uint64_t p, int n) {
  Integer pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, static_cast<unsigned long>(std::abs(n)));
  return n >= 0 ? Rational(Integer(1), pk) : Rational(pk);
}

cplx zeta_local(const Place& v, cplx s) {
  switch (v.kind()) {
    case Place::Kind::Real:
      if (s == 0.0) throw PoleError("zeta_local: pole at s = 0");
      return 2.0 / s;
    case Place::Kind::Complex:
      if (s == 0.0) throw PoleError("zeta_local: pole at s = 0");
      return 2.0 * kPi / s;
    default: {
      double p = static_cast<double>(v.prime());
      if (s.imag() == 0.0) {
        if (s.real() == 0.0) throw PoleError("zeta_local: pole at s = 0");
        double ps = std::pow(p, s.real());
        return ps / (ps - 1.0);
      }
      cplx q = std::exp(-s * std::log(p));
      if (std::abs(1.0 - q) < 1e-14) throw PoleError("zeta_local: pole on (2 pi i / log p) Z");
      return 1.0 / (1.0 - q);
    }
  }
}

double residue_c(const Place& v) {
  switch (v.kind()) {
    case Place::Kind::Real: return 2.0;
    case Place::Kind::Complex: return 2.0 * kPi;
    default: return 1.0 / std::log(static_cast<double>(v.prime()));
  }
}

// ---------------------------------------------------------------- StepFunction

StepFunction::StepFunction(std::uint64_t p, int level, int support, std::vector<cplx> table)
    : p_(p), level_(level), support_(support), table_(std::move(table)) {
  if (!is_prime(p)) throw ConfigError("StepFunction: modulus base is not prime");
  if (level + support < 0) throw ConfigError("StepFunction: level + support must be nonnegative");
  if (level + support > 40) throw BudgetExceeded("StepFunction: table too large");
  std::uint64_t n = 1;
  for (int i = 0; i < level + support; ++i) {
    n *= p;
    if (n > (1ull << 26)) throw BudgetExceeded("StepFunction: table too large");
  }
  if (table_.size() != n) throw ConfigError("StepFunction: table size must be p^(level+support)");
}

StepFunction StepFunction::indicator_zp(std::uint64_t p) { return StepFunction(p, 0, 0, {1.0}); }

StepFunction StepFunction::indicator_coset(std::uint64_t p, const Rational& xi, int n) {
  if (n < 0) throw ConfigError("indicator_coset: n must be nonnegative");
  std::uint64_t N = ipow(p, static_cast<unsigned>(n));
  std::vector<cplx> t(N, 0.0);
  t[residue_mod_pk(xi, p, n)] = 1.0;
  return StepFunction(p, n, 0, std::move(t));
}

StepFunction StepFunction::indicator_units(std::uint64_t p) {
  std::vector<cplx> t(p, 1.0);
  t[0] = 0.0;
  return StepFunction(p, 1, 0, std::move(t));
}

cplx StepFunction::operator()(const Rational& x) const {
  if (x == 0) return table_[0];
  int v = valuation(x, p_);
  if (v < -support_) return 0.0;
  int k = level_ + support_;
  if (k == 0) return table_[0];
  Rational y = x * haar_coset(p_, -support_);
  return table_[residue_mod_pk(y, p_, k)];
}

cplx StepFunction::at_integer(std::uint64_t u) const {
  std::uint64_t N = table_.size();
  if (N == 1) return table_[0];
  if (support_ >= 0) {
    std::uint64_t r = mulmod(u % N, powmod(p_, static_cast<std::uint64_t>(support_), N), N);
    return table_[r];
  }
  std::uint64_t shift = ipow(p_, static_cast<unsigned>(-support_));
  if (u % shift != 0) return 0.0;
  return table_[(u / shift) % N];
}

double StepFunction::sup_norm() const {
  double m = 0;
  for (auto& c : table_) m = std::max(m, std::abs(c));
  return m;
}

int StepFunction::minimal_level() const {
  for (int n = -support_; n < level_; ++n) {
    std::uint64_t M = ipow(p_, static_cast<unsigned>(n + support_));
    bool ok = true;
    for (std::uint64_t r = 0; r < table_.size() && ok; ++r) ok = table_[r] == table_[r % M];
    if (ok) return n;
  }
  return level_;
}

StepFunction StepFunction::refine(int new_level) const {
  if (new_level < level_) throw ConfigError("refine: level must not decrease");
  std::uint64_t N = ipow(p_, static_cast<unsigned>(new_level + support_));
  std::vector<cplx> t(N);
  for (std::uint64_t r = 0; r < N; ++r) t[r] = table_[r % table_.size()];
  return StepFunction(p_, new_level, support_, std::move(t));
}

StepFunction StepFunction::coarsen(int new_level) const {
  if (new_level > level_) return refine(new_level);
  if (new_level < minimal_level()) throw ConfigError("coarsen: function is not constant at that level");
  std::uint64_t N = ipow(p_, static_cast<unsigned>(new_level + support_));
  return StepFunction(p_, new_level, support_, std::vector<cplx>(table_.begin(), table_.begin() + N));
}

StepFunction StepFunction::with_support(int new_support) const {
  if (new_support < support_) throw ConfigError("with_support: cannot shrink the domain");
  std::uint64_t N = ipow(p_, static_cast<unsigned>(level_ + new_support));
  std::uint64_t shift = ipow(p_, static_cast<unsigned>(new_support - support_));
  std::vector<cplx> t(N, 0.0);
  for (std::uint64_t r = 0; r < N; r += shift) t[r] = table_[r / shift];
  return StepFunction(p_, level_, new_support, std::move(t));
}

StepFunction StepFunction::dilate(int j) const { return StepFunction(p_, level_ - j, support_ + j, table_); }

json StepFunction::to_json() const {
  json values = json::object();
  for (std::uint64_t r = 0; r < table_.size(); ++r)
    if (table_[r] != 0.0) values[std::to_string(r)] = {table_[r].real(), table_[r].imag()};
  return {{"p", p_}, {"level", level_}, {"support", support_}, {"values", values}};
}

StepFunction StepFunction::from_json(const json& j) {
  try {
    auto p = j.at("p").get<std::uint64_t>();
    int level = j.at("level").get<int>();
    int support = j.at("support").get<int>();
    if (level < 0) throw ConfigError("StepFunction: level must be nonnegative");
    if (level + support < 0 || level + support > 26) throw ConfigError("StepFunction: bad level/support");
    std::uint64_t N = ipow(p, static_cast<unsigned>(level + support));
    std::vector<cplx> t(N, 0.0);
    for (auto& [key, val] : j.at("values").items()) {
      std::uint64_t r = std::stoull(key);
      if (r >= N) throw ConfigError("StepFunction: residue out of range");
      t[r] = {val.at(0).get<double>(), val.at(1).get<double>()};
    }
    return StepFunction(p, level, support, std::move(t));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("StepFunction json: ") + e.what());
  }
}

// ---------------------------------------------------------------- BumpFunction

namespace {

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

Poly poly_deriv(const Poly& a) {
  if (a.size() <= 1) return {0.0};
  Poly r(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = a[i] * static_cast<double>(i);
  return r;
}

double poly_eval(const Poly& a, double t) {
  double r = 0;
  for (std::size_t i = a.size(); i-- > 0;) r = r * t + a[i];
  return r;
}

// phi^{(k)}(t) on |t| < 1 for the unit bump.
double unit_bump_derivative(const std::vector<Poly>& poly, double t, int k) {
  double u = 1.0 - t * t;
  if (u <= 0) return 0.0;
  double e = 1.0 - 1.0 / u;
  if (e < -700) return 0.0;
  return poly_eval(poly[k], t) * std::pow(u, -2.0 * k) * std::exp(e);
}

}  // namespace

BumpFunction::BumpFunction(double center, double radius, double amplitude, int n_derivatives)
    : center_(center), radius_(radius), amplitude_(amplitude), n_derivatives_(n_derivatives) {
  if (!(radius > 0)) throw ConfigError("BumpFunction: radius must be positive");
  if (n_derivatives < 0 || n_derivatives > 12) throw ConfigError("BumpFunction: derivative order out of range");
  // P_{k+1} = P_k' (1-t^2)^2 + 4k t (1-t^2) P_k - 2t P_k
  const Poly one_minus_t2 = {1.0, 0.0, -1.0};
  const Poly sq = poly_mul(one_minus_t2, one_minus_t2);
  poly_.push_back({1.0});
  for (int k = 0; k <= n_derivatives; ++k) {
    const Poly& P = poly_.back();
    Poly a = poly_mul(poly_deriv(P), sq);
    Poly b = poly_mul(poly_mul({0.0, 4.0 * k}, one_minus_t2), P);
    Poly c = poly_mul({0.0, -2.0}, P);
    poly_.push_back(poly_add(poly_add(a, b), c));
  }
  // grid maxima, widened by the next derivative's grid maximum over half a step
  const int n_grid = 8001;
  double h = 2.0 / (n_grid - 1);
  std::vector<double> grid_max(n_derivatives + 2, 0.0);
  for (int i = 0; i < n_grid; ++i) {
    double t = -1.0 + h * i;
    for (int k = 0; k <= n_derivatives + 1; ++k)
      grid_max[k] = std::max(grid_max[k], std::fabs(unit_bump_derivative(poly_, t, k)));
  }
  for (int k = 0; k <= n_derivatives; ++k) {
    double bound = grid_max[k] + 0.5 * h * 1.5 * grid_max[k + 1];
    sup_bounds_.push_back(std::fabs(amplitude_) * bound / std::pow(radius_, k));
  }
}

double BumpFunction::derivative(double x, int k) const {
  if (k < 0 || k + 1 >= static_cast<int>(poly_.size())) throw std::out_of_range("BumpFunction: derivative order");
  double t = (x - center_) / radius_;
  if (std::fabs(t) >= 1.0) return 0.0;
  return amplitude_ * unit_bump_derivative(poly_, t, k) / std::pow(radius_, k);
}

double BumpFunction::at(cplx z) const {
  double t = std::abs(z - center_) / radius_;
  if (t >= 1.0) return 0.0;
  return amplitude_ * unit_bump_derivative(poly_, t, 0);
}

json BumpFunction::to_json() const {
  return {{"center", center_}, {"radius", radius_}, {"amplitude", amplitude_}, {"derivatives", n_derivatives_}};
}

BumpFunction BumpFunction::from_json(const json& j) {
  try {
    return BumpFunction(j.value("center", 0.0), j.value("radius", 1.0), j.value("amplitude", 1.0),
                        j.value("derivatives", 2));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("BumpFunction json: ") + e.what());
  }
}

// ---------------------------------------------------------------- Tate integrals

namespace {

// int_0^R x^{s-1} g(x) dx, g smooth on [0, R], Re s > 0 (or the continuation for g(0) part).
TateResult half_line_mellin(const std::function<double(double)>& g, double R, cplx s) {
  TateResult out;
  if (R <= 0) return out;
  double sigma = s.real();
  double g0 = g(0.0);
  cplx main = g0 * std::exp(s * std::log(R)) / s;
  if (sigma <= 0) out.converged = false;
  double se = sigma > 0 ? sigma : 1.0;
  // x = R t^{1/se}:  x^{s-1} dx = (R^s / se) t^{(s - se)/se} dt
  cplx tau_exp = (s - se) / se;
  auto f = [&](double t) -> cplx {
    if (t <= 0) return 0.0;
    double x = R * std::pow(t, 1.0 / se);
    return (g(x) - g0) * std::exp(tau_exp * std::log(t));
  };
  QuadOptions opt;
  opt.rel_tol = 1e-11;
  auto r = integrate(f, 0.0, 1.0, opt);
  cplx scale = std::exp(s * std::log(R)) / se;
  out.value = main + scale * r.value;
  out.error = std::abs(scale) * r.error;
  out.converged = out.converged && r.ok;
  return out;
}

TateResult tate_step(const StepFunction& phi0, cplx s) {
  StepFunction phi = phi0.canonical();
  const std::uint64_t p = phi.prime();
  const double pd = static_cast<double>(p);
  TateResult out;
  if (s.real() <= 0) out.converged = false;
  int J = std::max(phi.level(), -phi.support());
  CompensatedSum shells;
  for (int j = -phi.support(); j < J; ++j) {
    StepFunction pj = phi.dilate(j);
    int L = std::max(pj.level(), 1);
    std::uint64_t N = ipow(p, static_cast<unsigned>(L));
    CompensatedSum unit;
    for (std::uint64_t u = 1; u < N; ++u)
      if (u % p != 0) unit.add(pj.at_integer(u));
    cplx w = std::exp(-static_cast<double>(j) * s * std::log(pd));
    shells.add(w * unit.value() / static_cast<double>(N));
  }
  cplx tail = 0.0;
  if (phi.at_zero() != 0.0) {
    cplx w = J == 0 ? cplx(1.0) : std::exp(-static_cast<double>(J) * s * std::log(pd));
    tail = phi.at_zero() * w * zeta_local(Place::finite(p), s);
  }
  out.value = shells.value() / (1.0 - 1.0 / pd) + tail;
  return out;
}

}  // namespace

TateResult tate_integral(const Place& v, const TestFunction& phi, cplx s) {
  if (v.is_finite()) {
    auto* step = std::get_if<StepFunction>(&phi);
    if (!step) throw ConfigError("tate_integral: finite place needs a StepFunction");
    if (step->prime() != v.prime()) throw ConfigError("tate_integral: prime mismatch");
    return tate_step(*step, s);
  }
  auto* bump = std::get_if<BumpFunction>(&phi);
  if (!bump) throw ConfigError("tate_integral: archimedean place needs a BumpFunction");
  if (v.kind() == Place::Kind::Real) {
    auto right = [&](double x) { return (*bump)(x); };
    auto left = [&](double x) { return (*bump)(-x); };
    auto a = half_line_mellin(right, std::max(bump->upper(), 0.0), s);
    auto b = half_line_mellin(left, std::max(-bump->lower(), 0.0), s);
    return {a.value + b.value, a.error + b.error, a.converged && b.converged};
  }
  // radial on C: d^x z = dz / |z|_C, dz = 2 dx dy
  double R = std::fabs(bump->center()) + bump->radius();
  auto g = [&](double r) { return bump->at(cplx(r, 0.0)); };
  auto r = half_line_mellin(g, R, 2.0 * s);
  if (bump->center() != 0.0) throw Unsupported("tate_integral: complex bump must be centered at 0");
  return {4.0 * kPi * r.value, 4.0 * kPi * r.error, r.converged};
}

StepFunction fourier_step(const StepFunction& phi) {
  const std::uint64_t p = phi.prime();
  const int m = phi.level(), k = phi.support();
  const std::uint64_t N = phi.modulus();
  const double vol = std::pow(static_cast<double>(p), -m);
  std::vector<cplx> out(N, 0.0);
  // hat(r'/p^m) = p^{-m} sum_r table[r] e^{2 pi i r r' / N}
  for (std::uint64_t rp = 0; rp < N; ++rp) {
    CompensatedSum acc;
    for (std::uint64_t r = 0; r < N; ++r) {
      if (phi.table()[r] == 0.0) continue;
      acc.add(phi.table()[r] * unit_root(static_cast<std::int64_t>(mulmod(r, rp, N)), N));
    }
    out[rp] = vol * acc.value();
  }
  return StepFunction(p, k, m, std::move(out));
}

cplx fourier_bump(const Place& v, const BumpFunction& phi, double a) {
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  if (v.kind() == Place::Kind::Real) {
    double lo = phi.lower(), hi = phi.upper();
    auto f = [&](double x) -> cplx { return phi(x) * psi_real(a * x); };
    auto n = static_cast<std::size_t>(std::max(16.0, std::ceil(4.0 * std::fabs(a) * (hi - lo))));
    return integrate_panels(f, lo, hi, n, opt).value;
  }
  if (v.kind() == Place::Kind::Complex) {
    if (phi.center() != 0.0) throw Unsupported("fourier_bump: complex bump must be centered at 0");
    double R = phi.radius();
    auto f = [&](double r) -> cplx { return phi.at(cplx(r, 0)) * std::cyl_bessel_j(0.0, 4.0 * kPi * std::fabs(a) * r) * r; };
    auto n = static_cast<std::size_t>(std::max(16.0, std::ceil(8.0 * std::fabs(a) * R)));
    return 4.0 * kPi * integrate_panels(f, 0.0, R, n, opt).value;
  }
  throw ConfigError("fourier_bump: archimedean place required");
}

}  // namespace manin
