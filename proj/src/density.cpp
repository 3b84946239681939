#include "manin/density.hpp"

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <algorithm>
#include <cmath>
#include <thread>

#include "manin/errors.hpp"
#include "manin/quadrature.hpp"

namespace manin {

using nlohmann::json;

std::vector<cplx> along_lambda(const CompactificationModel& m, cplx s) {
  std::vector<cplx> out;
  for (int l : m.divisors().lambdas()) out.push_back(s * static_cast<double>(l));
  return out;
}

namespace {

void check_s(const CompactificationModel& m, const std::vector<cplx>& s_alpha) {
  if (s_alpha.size() != m.divisors().size()) throw ConfigError("density: one s per boundary component required");
}

// (p-1)/(p^{s - rho + 1} - 1)
cplx stratum_factor(std::uint64_t p, cplx s, int rho) {
  double lp = std::log(static_cast<double>(p));
  cplx den = std::exp((s - static_cast<double>(rho) + 1.0) * lp) - 1.0;
  if (std::abs(den) < 1e-14) throw PoleError("denef_density: pole at p^{s - rho + 1} = 1");
  return static_cast<double>(p - 1) / den;
}

std::vector<std::vector<int>> subsets(std::size_t r) {
  std::vector<std::vector<int>> out;
  for (std::uint64_t mask = 0; mask < (1ull << r); ++mask) {
    std::vector<int> A;
    for (std::size_t a = 0; a < r; ++a)
      if (mask >> a & 1) A.push_back(static_cast<int>(a));
    out.push_back(A);
  }
  return out;
}

}  // namespace

cplx denef_density(const CompactificationModel& m, std::uint64_t p, const std::vector<cplx>& s_alpha, bool integral) {
  check_s(m, s_alpha);
  if (!is_prime(p)) throw ConfigError("denef_density: p must be prime");
  const auto& ds = m.divisors();
  CompensatedSum sum;
  for (auto& A : subsets(ds.size())) {
    if (integral && std::any_of(A.begin(), A.end(), [&](int a) { return ds.in_D[a]; })) continue;
    cplx term = static_cast<double>(stratum_count(m, p, A));
    for (int a : A) term *= stratum_factor(p, s_alpha[a], ds.rho[a]);
    sum.add(term);
  }
  return sum.value() * std::pow(static_cast<double>(p), -m.dimension());
}

// ---- brute-force oracle

namespace {

struct ShellRep {
  Rational x;
  double weight;
};

// Representatives of the coordinate shell k (k = 0: Z_p, k >= 1: p^{-k} Z_p^*).
std::vector<ShellRep> near_reps(std::uint64_t p, int k, int depth) {
  std::vector<ShellRep> out;
  double w = std::pow(static_cast<double>(p), -depth);
  if (k == 0) {
    for (std::uint64_t r = 0; r < ipow(p, depth); ++r) out.push_back({Rational(static_cast<unsigned long>(r)), w});
  } else {
    for (std::uint64_t u = 1; u < ipow(p, depth + 1); ++u) {
      if (u % p == 0) continue;
      Rational x(static_cast<unsigned long>(u), static_cast<unsigned long>(p));
      x.canonicalize();
      out.push_back({x, w});
    }
  }
  return out;
}

Rational far_rep(std::uint64_t p, int k, int which) {
  Rational unit = which == 0 ? Rational(1) : Rational(static_cast<unsigned long>(p - 1));
  if (k == 0) return which == 0 ? Rational(0) : unit;
  Rational x = unit;
  for (int i = 0; i < k; ++i) x /= static_cast<unsigned long>(p);
  return x;
}

struct OracleIntegrand {
  const CompactificationModel& m;
  std::uint64_t p;
  const std::vector<cplx>& s;
  bool integral;

  // exponents e_alpha with ||f_alpha||_p = p^{-e_alpha}, or empty when delta kills the point
  std::vector<int> exponents(const Point& x) const {
    if (integral && !is_integral(m, p, x)) return {};
    std::vector<int> e;
    for (std::size_t a = 0; a < m.divisors().size(); ++a) {
      Rational nrm = m.norm_finite(a, p, x);
      int v = -valuation(nrm, p);
      Rational check = 1;
      for (int i = 0; i < v; ++i) check /= static_cast<unsigned long>(p);
      if (check != nrm) throw NumericFailure("brute_density_oracle: norm is not a power of p");
      e.push_back(v);
    }
    return e;
  }

  cplx value(const std::vector<int>& e) const {
    if (e.empty()) return 0.0;
    double lp = std::log(static_cast<double>(p));
    cplx acc = 0;
    for (std::size_t a = 0; a < e.size(); ++a) acc -= s[a] * (e[a] * lp);
    return std::exp(acc);
  }
};

}  // namespace

cplx brute_density_oracle(const CompactificationModel& m, std::uint64_t p, const std::vector<cplx>& s_alpha,
                          int depth, bool integral) {
  check_s(m, s_alpha);
  if (depth < 2) throw ConfigError("brute_density_oracle: depth must be >= 2");
  if (!is_prime(p)) throw ConfigError("brute_density_oracle: p must be prime");
  const int n = m.dimension();
  OracleIntegrand f{m, p, s_alpha, integral};
  const double pd = static_cast<double>(p);
  CompensatedSum total;

  // layers 0 and 1: every residue class representative
  std::vector<std::vector<ShellRep>> reps = {near_reps(p, 0, depth), near_reps(p, 1, depth)};
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    std::vector<const std::vector<ShellRep>*> lists;
    for (int i = 0; i < n; ++i) lists.push_back(&reps[mask >> i & 1]);
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      Point x;
      double w = 1;
      for (int i = 0; i < n; ++i) {
        x.push_back((*lists[i])[idx[i]].x);
        w *= (*lists[i])[idx[i]].weight;
      }
      total.add(w * f.value(f.exponents(x)));
      int i = 0;
      for (; i < n; ++i) {
        if (++idx[i] < lists[i]->size()) break;
        idx[i] = 0;
      }
      if (i == n) break;
    }
  }

  // deeper layers: valuation vectors with max = L; constancy certified on two representatives
  constexpr int kMaxLayer = 4000;
  int quiet = 0;
  for (int L = 2;; ++L) {
    if (L > kMaxLayer) throw BudgetExceeded("brute_density_oracle: shell layers did not converge");
    CompensatedSum layer;
    std::vector<int> k(n, 0);
    while (true) {
      if (*std::max_element(k.begin(), k.end()) == L) {
        Point x0, x1;
        double w = 1;
        for (int i = 0; i < n; ++i) {
          x0.push_back(far_rep(p, k[i], 0));
          x1.push_back(far_rep(p, k[i], 1));
          if (k[i] > 0) w *= std::pow(pd, k[i]) * (1 - 1 / pd);
        }
        auto e0 = f.exponents(x0);
        if (e0 != f.exponents(x1)) throw NumericFailure("brute_density_oracle: integrand not constant on a shell");
        layer.add(w * f.value(e0));
      }
      int i = 0;
      for (; i < n; ++i) {
        if (++k[i] <= L) break;
        k[i] = 0;
      }
      if (i == n) break;
    }
    total.add(layer.value());
    if (std::abs(layer.value()) <= 1e-18 * std::abs(total.value())) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return total.value();
}

// ---- archimedean densities

namespace {

double unit_ball_volume(const MetricOptions& metric, int n) {
  if (metric.smooth_k == 0) return std::ldexp(1.0, n);
  double q = 2.0 * metric.smooth_k;
  return std::pow(2 * boost::math::tgamma(1 + 1 / q), n) / boost::math::tgamma(1 + n / q);
}

// F(r) = 1/max(1,r) or (1 + r^{2k})^{-1/2k}
double radial_norm(const MetricOptions& metric, double r) {
  if (metric.smooth_k == 0) return 1.0 / std::max(1.0, r);
  double q = 2.0 * metric.smooth_k;
  if (r > 1) return 1.0 / (r * std::pow(1 + std::pow(r, -q), 1 / q));
  return std::pow(1 + std::pow(r, q), -1 / q);
}

struct Quad {
  cplx value{};
  double error = 0;
  bool ok = true;
};

// int_{R^n} F(|x|)^s dx for the norm of the metric.
Quad group_integral(const MetricOptions& metric, int n, cplx s) {
  if (n == 0) return {1.0, 0, true};
  double sigma = s.real() - n + 1;
  if (!(sigma > 1)) throw PoleError("arch_density: outside the convergence region");
  QuadOptions qo;
  qo.rel_tol = 1e-12;
  auto fpow = [&](double r) -> cplx { return std::exp(s * std::log(radial_norm(metric, r))); };
  auto inner = integrate([&](double r) -> cplx { return std::pow(r, n - 1) * fpow(r); }, 0.0, 1.0, qo);
  // x^{sigma} x^{n-1} F(x)^s is bounded on [1, inf)
  auto g = [&](double x) -> cplx {
    double lx = std::log(x);
    return std::exp(cplx(sigma + n - 1, 0) * lx + s * std::log(radial_norm(metric, x)));
  };
  auto tail = integrate_power_tail(g, 1.0, sigma, qo);
  double c = n * unit_ball_volume(metric, n);
  return {c * (inner.value + tail.value), c * (inner.error + tail.error), inner.ok && tail.ok};
}

}  // namespace

LineTransform line_transform(const MetricOptions& metric, double a, cplx sigma) {
  LineTransform out;
  if (a == 0) {
    auto g = group_integral(metric, 1, sigma);
    out.value = g.value;
    out.error = g.error;
    out.ok = g.ok;
    return out;
  }
  if (!(sigma.real() > 0)) throw PoleError("line_transform: need Re(sigma) > 0");
  const double om = 2 * kPi * std::fabs(a);
  auto h = [&](double x) -> cplx { return std::exp(sigma * std::log(radial_norm(metric, x))); };
  // [0,1]: one breakpoint per half period
  std::vector<double> pts;
  auto nb = static_cast<std::size_t>(std::ceil(2 * std::fabs(a))) + 1;
  for (std::size_t i = 0; i <= nb; ++i) pts.push_back(static_cast<double>(i) / nb);
  QuadOptions qo;
  qo.rel_tol = 1e-12;
  auto head = integrate_breaks([&](double x) { return h(x) * std::cos(om * x); }, pts, qo);
  // [1, inf) shifted to [0, inf): cos(om(1+t)) = cos(om)cos(om t) - sin(om)sin(om t)
  boost::math::quadrature::ooura_fourier_cos<double> fc(1e-12);
  boost::math::quadrature::ooura_fourier_sin<double> fs(1e-12);
  cplx C = 0, S = 0;
  double rel = 0;
  for (bool im : {false, true}) {
    if (im && sigma.imag() == 0) continue;
    auto g = [&](double t) {
      cplx z = h(1 + t);
      return im ? z.imag() : z.real();
    };
    auto [cv, ce] = fc.integrate(g, om);
    auto [sv, se] = fs.integrate(g, om);
    C += im ? cplx(0, cv) : cplx(cv);
    S += im ? cplx(0, sv) : cplx(sv);
    rel = std::max({rel, ce, se});
    if (!std::isfinite(cv) || !std::isfinite(sv) || !std::isfinite(ce) || !std::isfinite(se)) out.ok = false;
  }
  cplx tail = std::cos(om) * C - std::sin(om) * S;
  out.value = 2.0 * (head.value + tail);
  out.error = 2.0 * (head.error + rel * (std::abs(C) + std::abs(S)));
  out.ok = out.ok && head.ok && rel < 1e-8;
  return out;
}

LocalDensity arch_density(const CompactificationModel& m, const Point& a, cplx s) {
  if (static_cast<int>(a.size()) != m.dimension()) throw ConfigError("arch_density: wrong dimension");
  const auto& ds = m.divisors();
  LocalDensity out;
  out.place = Place::real();
  out.a = a;
  out.s = s;
  out.exactness = Exactness::Quadrature;
  cplx val = 1;
  double relerr = 0;
  bool ok = true;
  for (std::size_t al = 0; al < ds.size(); ++al) {
    const auto& g = m.groups()[al];
    cplx sa = s * static_cast<double>(ds.lambda(al));
    bool zero = std::all_of(g.begin(), g.end(), [&](int i) { return a[i] == 0; });
    cplx v;
    double e;
    if (zero) {
      auto r = group_integral(m.metric(), static_cast<int>(g.size()), sa);
      v = r.value, e = r.error, ok = ok && r.ok;
    } else if (g.size() == 1) {
      auto r = line_transform(m.metric(), a[g[0]].get_d(), sa);
      v = r.value, e = r.error, ok = ok && r.ok;
    } else {
      throw Unsupported("arch_density: nonzero character on a multi-dimensional boundary factor");
    }
    val *= v;
    relerr += std::abs(v) > 0 ? e / std::abs(v) : e;
  }
  out.value = val;
  out.error = relerr * std::abs(val);
  out.flagged = !ok;
  return out;
}

json LocalDensity::to_json() const {
  json j;
  j["place"] = place.to_string();
  std::vector<std::string> as;
  for (auto& x : a) as.push_back(manin::to_string(x));
  j["a"] = as;
  j["s"] = {s.real(), s.imag()};
  j["value"] = {value.real(), value.imag()};
  j["exactness"] = exactness == Exactness::Exact ? "exact" : "quadrature";
  j["error"] = error;
  j["flagged"] = flagged;
  return j;
}

LocalDensity LocalDensity::from_json(const json& j) {
  LocalDensity d;
  d.place = Place::parse(j.at("place").get<std::string>());
  for (auto& x : j.at("a")) d.a.push_back(parse_rational(x.get<std::string>()));
  d.s = {j.at("s")[0].get<double>(), j.at("s")[1].get<double>()};
  d.value = {j.at("value")[0].get<double>(), j.at("value")[1].get<double>()};
  d.exactness = j.at("exactness") == "exact" ? Exactness::Exact : Exactness::Quadrature;
  d.error = j.at("error").get<double>();
  d.flagged = j.at("flagged").get<bool>();
  return d;
}

// ---- finite places, nontrivial characters

cplx fourier_finite(const CompactificationModel& m, std::uint64_t p, const Point& a, cplx s, bool integral) {
  if (static_cast<int>(a.size()) != m.dimension()) throw ConfigError("fourier_finite: wrong dimension");
  if (!is_prime(p)) throw ConfigError("fourier_finite: p must be prime");
  const auto& ds = m.divisors();
  const double pd = static_cast<double>(p);
  cplx total = 1;
  for (std::size_t al = 0; al < ds.size(); ++al) {
    const auto& g = m.groups()[al];
    const int n = static_cast<int>(g.size());
    cplx sa = s * static_cast<double>(ds.lambda(al));
    // ball integrals B(k) = int_{(p^{-k} Z_p)^n} psi(<a,x>) = p^{kn} [a in p^k Z_p^n]; a character
    // nontrivial on a ball integrates to zero
    int vmin = kInfiniteValuation;
    for (int i : g)
      if (a[i] != 0) vmin = std::min(vmin, valuation(a[i], p));
    auto ball = [&](int k) -> double { return k <= vmin ? std::pow(pd, k * n) : 0.0; };
    cplx factor;
    if (integral && ds.in_D[al]) {
      factor = ball(0);
    } else if (vmin == kInfiniteValuation) {
      cplx den = std::exp((sa - static_cast<double>(n)) * std::log(pd)) - 1.0;
      if (!(sa.real() > n)) throw PoleError("fourier_finite: outside the convergence region");
      factor = 1.0 + (1 - std::pow(pd, -n)) / den;
    } else {
      CompensatedSum acc;
      acc.add(ball(0));
      for (int k = 1; k <= vmin + 1; ++k)
        acc.add(std::exp(-sa * (k * std::log(pd))) * (ball(k) - ball(k - 1)));
      factor = acc.value();
    }
    total *= factor;
  }
  return total;
}

double character_defect(const CompactificationModel& m, std::uint64_t p, const Point& a, cplx s) {
  const auto& ds = m.divisors();
  auto d = divisor_coefficients(m, a);
  cplx prod = fourier_finite(m, p, a, s, true);
  for (int al : ds.off_D_indices())
    if (d[al] == 0) {
      cplx e = 1.0 + s * static_cast<double>(ds.lambda(al)) - static_cast<double>(ds.rho[al]);
      prod *= 1.0 - std::exp(-e * std::log(static_cast<double>(p)));
    }
  return std::abs(1.0 - prod);
}

// ---- Euler products and Theta

json EulerProductValue::to_json() const {
  return {{"P", P}, {"partial", partial}, {"corrected", corrected}, {"tail_bound", tail}};
}

namespace {

bool in_S(const std::vector<Place>& S, std::uint64_t p) {
  return std::find(S.begin(), S.end(), Place::finite(p)) != S.end();
}

}  // namespace

EulerProductValue euler_product(const CompactificationModel& m, const std::vector<Place>& S, double s,
                                std::uint64_t P, unsigned threads) {
  validate_S(S);
  if (P < 4) throw ConfigError("euler_product: truncation must be >= 4");
  const auto& ds = m.divisors();
  auto sl = along_lambda(m, s);
  std::vector<std::uint64_t> primes;
  for (auto p : primes_up_to(P))
    if (!in_S(S, p)) primes.push_back(p);
  std::vector<double> raw(primes.size()), reg(primes.size());
  threads = std::max(1u, threads);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      double pd = static_cast<double>(primes[i]);
      double f = denef_density(m, primes[i], sl, true).real();
      raw[i] = f;
      for (int al : ds.off_D_indices()) f *= 1 - std::pow(pd, -(s * ds.lambda(al) - ds.rho[al] + 1));
      reg[i] = f;
    }
  };
  std::vector<std::thread> pool;
  std::size_t chunk = (primes.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk, hi = std::min(primes.size(), lo + chunk);
    if (lo < hi) pool.emplace_back(work, lo, hi);
  }
  for (auto& th : pool) th.join();

  // zeta^S(s lambda - rho + 1) for the components off D
  double zfac = 1;
  for (int al : ds.off_D_indices()) {
    double e = s * ds.lambda(al) - ds.rho[al] + 1;
    if (!(e > 1)) throw PoleError("euler_product: at or left of the pole");
    double z = boost::math::zeta(e);
    for (auto& v : S)
      if (v.is_finite()) z *= 1 - std::pow(static_cast<double>(v.prime()), -e);
    zfac *= z;
  }
  EulerProductValue out;
  out.P = P;
  double part = 1, r_full = 1, r_half = 1;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    part *= raw[i];
    r_full *= reg[i];
    if (primes[i] <= P / 2) r_half *= reg[i];
  }
  out.partial = part;
  out.corrected = r_full * zfac;
  out.tail = std::fabs(r_full - r_half) * zfac;
  return out;
}

double global_density(const CompactificationModel& m, const std::vector<Place>& S, double s, std::uint64_t P,
                      unsigned threads) {
  validate_S(S);
  auto arch = arch_density(m, Point(m.dimension(), Rational(0)), s);
  if (arch.flagged) throw NumericFailure("global_density: archimedean quadrature missed its target");
  double v = arch.value.real();
  auto sl = along_lambda(m, s);
  for (auto& pl : S)
    if (pl.is_finite()) v *= denef_density(m, pl.prime(), sl, false).real();
  return v * euler_product(m, S, s, P, threads).corrected;
}

json ThetaResult::to_json() const {
  return {{"theta", theta}, {"b", b},         {"eps", eps},           {"scaled", scaled},
          {"order2", order2}, {"order3", order3}, {"unstable", unstable}, {"euler_tail", euler_tail}};
}

ThetaResult theta_constant(const CompactificationModel& m, const std::vector<Place>& S, unsigned threads,
                           std::uint64_t P) {
  ThetaResult out;
  out.b = exponent_b(m, S);
  double fact = std::tgamma(static_cast<double>(out.b));
  out.eps = {0.1, 0.05, 0.02, 0.01};
  for (double e : out.eps) {
    double s = 1 + e;
    double h = global_density(m, S, s, P, threads);
    out.scaled.push_back(std::pow(e, out.b) * h / fact);
    out.euler_tail = std::max(out.euler_tail, euler_product(m, S, s, P, threads).tail);
  }
  out.order3 = extrapolate_to_zero(out.eps, out.scaled);
  out.order2 = extrapolate_to_zero({out.eps.begin() + 1, out.eps.end()}, {out.scaled.begin() + 1, out.scaled.end()});
  out.theta = out.order2;
  out.unstable = std::fabs(out.order2 - out.order3) > 0.01 * std::fabs(out.order3);
  return out;
}

namespace {

// maximal-size faces of the D-restricted complex; {empty} when D has no v-points
std::vector<std::vector<int>> top_faces(const CompactificationModel& m, const Place& v) {
  auto c = clemens_complex(m, v, true);
  std::vector<std::vector<int>> out;
  int dim = c.dimension();
  if (dim < 0) return {{}};
  for (auto& f : c.maximal_faces)
    if (static_cast<int>(f.size()) == dim + 1) out.push_back(f);
  return out;
}

}  // namespace

double tau_max_boundary(const CompactificationModel& m, const Place& v) {
  const auto& ds = m.divisors();
  if (v.kind() == Place::Kind::Complex) throw Unsupported("tau_max_boundary: no complex place over Q");
  double total = 0;
  if (v.kind() == Place::Kind::Real) {
    if (m.metric().smooth_k != 0) throw Unsupported("tau_max_boundary: max-metric only");
    const double c = residue_c(v);
    for (auto& F : top_faces(m, v)) {
      double term = 1;
      for (std::size_t al = 0; al < ds.size(); ++al) {
        int n = static_cast<int>(m.groups()[al].size());
        bool inF = std::find(F.begin(), F.end(), static_cast<int>(al)) != F.end();
        // residue along D_alpha times the hyperplane-at-infinity integral, or the full factor
        auto g = inF ? group_integral(m.metric(), n - 1, static_cast<double>(ds.lambda(al)))
                     : group_integral(m.metric(), n, static_cast<double>(ds.lambda(al)));
        if (!g.ok) throw NumericFailure("tau_max_boundary: quadrature missed its target");
        term *= g.value.real() * (inF ? c / ds.lambda(al) : 1.0);
      }
      total += term;
    }
    return total;
  }
  const std::uint64_t p = v.prime();
  const double pd = static_cast<double>(p), c = residue_c(v);
  for (auto& F : top_faces(m, v)) {
    for (auto& A : subsets(ds.size())) {
      if (!std::includes(A.begin(), A.end(), F.begin(), F.end())) continue;
      bool extra_in_D = false;
      double term = static_cast<double>(stratum_count(m, p, A));
      for (int al : A) {
        bool inF = std::find(F.begin(), F.end(), al) != F.end();
        if (inF) {
          term *= (pd - 1) * c / ds.lambda(al);
        } else {
          if (ds.in_D[al]) extra_in_D = true;
          term *= stratum_factor(p, static_cast<double>(ds.lambda(al)), ds.rho[al]).real();
        }
      }
      if (!extra_in_D) total += term;
    }
  }
  return total * std::pow(pd, -m.dimension());
}

double theta_from_tau(const CompactificationModel& m, const std::vector<Place>& S, std::uint64_t P) {
  validate_S(S);
  const auto& ds = m.divisors();
  const int rank = ep_rank(m);
  double t = 1;
  for (int al : ds.off_D_indices()) t /= ds.lambda(al);
  auto lam = along_lambda(m, 1.0);
  for (auto p : primes_up_to(P)) {
    double pd = static_cast<double>(p);
    double f = std::pow(1 - 1 / pd, rank);
    if (!in_S(S, p)) f *= denef_density(m, p, lam, true).real();
    t *= f;
  }
  for (auto& v : S) t *= tau_max_boundary(m, v);
  return t / std::tgamma(static_cast<double>(exponent_b(m, S)));
}

}  // namespace manin
