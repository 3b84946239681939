#include "manin/census.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "manin/boundary.hpp"
#include "manin/errors.hpp"

namespace manin {

namespace {

using i128 = __int128;
using u64 = std::uint64_t;

// largest h with h^k <= x
u64 iroot(u64 x, int k) {
  if (k == 1) return x;
  u64 h = static_cast<u64>(std::pow(static_cast<double>(x), 1.0 / k));
  auto pw = [k](u64 h) {
    i128 r = 1;
    for (int i = 0; i < k; ++i) {
      r *= h;
      if (r > static_cast<i128>(std::numeric_limits<u64>::max())) return r;
    }
    return r;
  };
  while (h > 0 && pw(h) > static_cast<i128>(x)) --h;
  while (pw(h + 1) <= static_cast<i128>(x)) ++h;
  return h;
}

i128 ipow128(i128 b, int e) {
  i128 r = 1;
  while (e-- > 0) r *= b;
  return r;
}

u64 floor_B(double B) {
  if (!(B >= 0) || B >= 1.8e19) throw ConfigError("height bound out of range");
  return static_cast<u64>(std::floor(B));
}

std::vector<u64> S_primes(const std::vector<Place>& S) {
  std::vector<u64> ps;
  for (auto& v : S)
    if (v.is_finite()) ps.push_back(v.prime());
  std::sort(ps.begin(), ps.end());
  return ps;
}

// smallest prime factor table, 0 and 1 map to 0
std::vector<std::uint32_t> spf_table(u64 n) {
  std::vector<std::uint32_t> spf(n + 1, 0);
  for (u64 i = 2; i <= n; ++i)
    if (spf[i] == 0)
      for (u64 j = i; j <= n; j += i)
        if (spf[j] == 0) spf[j] = static_cast<std::uint32_t>(i);
  return spf;
}

class Budget {
 public:
  explicit Budget(u64 cap) : cap_(cap) {}
  void spend(u64 n) {
    if (used_.fetch_add(n) + n > cap_) throw BudgetExceeded("point census exceeded its node cap");
  }

 private:
  u64 cap_;
  std::atomic<u64> used_{0};
};

// One projective factor: points of A^n(Q) as primitive (d, m_1..m_n), d > 0, with naive height
// max(d, |m_i|). Factors in D need d to be an S-unit.
struct Factor {
  int n = 1;
  int lambda = 1;
  bool in_D = true;
  std::vector<u64> primes;  // S primes
  std::vector<u64> units;   // S-units up to the limit, sorted
  std::vector<std::uint32_t> spf;

  void prepare(u64 limit) {
    units = {1};
    for (u64 p : primes) {
      std::size_t k = units.size();
      for (std::size_t i = 0; i < k; ++i)
        for (u64 u = units[i]; u <= limit / p;) {
          u *= p;
          units.push_back(u);
        }
    }
    std::sort(units.begin(), units.end());
    if (!in_D) spf = spf_table(limit);
  }

  int mobius(u64 e) const {
    int mu = 1;
    while (e > 1) {
      u64 p = spf[e];
      e /= p;
      if (e % p == 0) return 0;
      mu = -mu;
    }
    return mu;
  }

  // squarefree divisors of h built from S primes, with sign
  template <class F>
  void S_divisors(u64 h, F&& f) const {
    std::vector<u64> ps;
    for (u64 p : primes)
      if (h % p == 0) ps.push_back(p);
    for (u64 mask = 0; mask < (1ull << ps.size()); ++mask) {
      u64 e = 1;
      int sgn = 1;
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (mask >> i & 1) e *= ps[i], sgn = -sgn;
      f(e, sgn);
    }
  }

  // number of points with height <= H
  i128 C(u64 H, Budget& budget) const {
    if (H == 0) return 0;
    i128 total = 0;
    if (in_D) {
      for (u64 d : units) {
        if (d > H) break;
        S_divisors(d, [&](u64 e, int sgn) { total += sgn * ipow128(2 * (H / e) + 1, n); });
      }
      budget.spend(units.size());
      return total;
    }
    if (H >= spf.size()) throw NumericFailure("census: sieve too short");
    for (u64 e = 1; e <= H; ++e) {
      int mu = mobius(e);
      if (mu) total += mu * static_cast<i128>(H / e) * ipow128(2 * (H / e) + 1, n);
    }
    budget.spend(H);
    return total;
  }

  // number of (not necessarily primitive) tuples with height exactly k
  i128 g(u64 k) const {
    if (in_D) {
      auto below = static_cast<i128>(std::lower_bound(units.begin(), units.end(), k) - units.begin());
      bool unit = std::binary_search(units.begin(), units.end(), k);
      return (unit ? ipow128(2 * k + 1, n) : 0) + below * (ipow128(2 * k + 1, n) - ipow128(2 * k - 1, n));
    }
    return static_cast<i128>(k) * ipow128(2 * k + 1, n) - static_cast<i128>(k - 1) * ipow128(2 * k - 1, n);
  }

  // number of points with height exactly h
  i128 c(u64 h) const {
    i128 total = 0;
    if (in_D) {
      S_divisors(h, [&](u64 e, int sgn) { total += sgn * g(h / e); });
      return total;
    }
    // squarefree divisors of h from the sieve
    std::vector<u64> ps;
    for (u64 t = h; t > 1;) {
      u64 p = spf[t];
      ps.push_back(p);
      while (t % p == 0) t /= p;
    }
    for (u64 mask = 0; mask < (1ull << ps.size()); ++mask) {
      u64 e = 1;
      int sgn = 1;
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (mask >> i & 1) e *= ps[i], sgn = -sgn;
      total += sgn * g(h / e);
    }
    return total;
  }
};

std::vector<Factor> factors_of(const CompactificationModel& m, const std::vector<Place>& S) {
  std::vector<Factor> fs;
  auto ps = S_primes(S);
  const auto& ds = m.divisors();
  for (std::size_t a = 0; a < ds.size(); ++a) {
    Factor f;
    f.n = static_cast<int>(m.groups()[a].size());
    f.lambda = ds.lambda(a);
    f.in_D = ds.in_D[a];
    f.primes = ps;
    fs.push_back(std::move(f));
  }
  return fs;
}

// Run body(lo, hi) over contiguous slabs of [1, n]; results are summed in slab order.
template <class F>
i128 slab_sum(u64 n, unsigned threads, F&& body) {
  if (n == 0) return 0;
  threads = std::max(1u, threads);
  const u64 nslabs = std::min<u64>(n, 8ull * threads);
  std::vector<i128> part(nslabs, 0);
  std::vector<std::exception_ptr> err(threads);
  auto worker = [&](unsigned t) {
    try {
      for (u64 s = t; s < nslabs; s += threads) {
        u64 lo = 1 + n * s / nslabs, hi = n * (s + 1) / nslabs;
        part[s] = body(lo, hi);
      }
    } catch (...) {
      err[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  i128 total = 0;
  for (auto v : part) total += v;
  return total;
}

u64 to_u64(i128 v) {
  if (v < 0 || v > static_cast<i128>(std::numeric_limits<u64>::max()))
    throw NumericFailure("census: count outside 64-bit range");
  return static_cast<u64>(v);
}

bool is_integral_model(const CompactificationModel& m) {
  for (bool d : m.divisors().in_D)
    if (!d) return false;
  return true;
}

double real_height(const CompactificationModel& m, const std::vector<double>& x) {
  double h = 1;
  const auto& ds = m.divisors();
  for (std::size_t a = 0; a < ds.size(); ++a) {
    std::vector<double> xs;
    for (int i : m.groups()[a]) xs.push_back(x[i]);
    h *= std::pow(m.norm_real(a, xs), -ds.lambda(a));
  }
  return h;
}

// smoothed real metric: integral points only, slab on x_0 and bisect on |x_1|
u64 enumerate_smooth(const CompactificationModel& m, const std::vector<Place>& S, double B, const EnumOptions& opt,
                     Budget& budget) {
  if (S.size() != 1 || !is_integral_model(m) || m.dimension() > 2)
    throw Unsupported("smoothed-metric census needs an integral model of dimension <= 2 and S = {inf}");
  if (B < 1) return 0;
  // the smoothed norm is below the max norm, so each coordinate is bounded by B
  const u64 X = floor_B(B);
  auto largest = [&](auto&& ok) {  // largest t in [0, X] with ok(t), or -1
    if (!ok(0)) return static_cast<std::int64_t>(-1);
    u64 lo = 0, hi = X;
    while (lo < hi) {
      u64 mid = lo + (hi - lo + 1) / 2;
      if (ok(mid)) lo = mid;
      else hi = mid - 1;
    }
    return static_cast<std::int64_t>(lo);
  };
  if (m.dimension() == 1) {
    auto t = largest([&](u64 x) { return real_height(m, {double(x)}) <= B; });
    return t < 0 ? 0 : 2 * t + 1;
  }
  auto row = [&](u64 x) -> i128 {
    auto t = largest([&](u64 y) { return real_height(m, {double(x), double(y)}) <= B; });
    return t < 0 ? 0 : 2 * t + 1;
  };
  i128 total = row(0);
  total += 2 * slab_sum(X, opt.threads, [&](u64 lo, u64 hi) {
    i128 s = 0;
    for (u64 x = lo; x <= hi; ++x) s += row(x);
    budget.spend(hi - lo + 1);
    return s;
  });
  return to_u64(total);
}

}  // namespace

std::uint64_t enumerate_points(const CompactificationModel& m, const std::vector<Place>& S, double B,
                               const EnumOptions& opt) {
  validate_S(S);
  Budget budget(opt.node_cap);
  if (m.metric().smooth_k != 0) return enumerate_smooth(m, S, B, opt, budget);
  const u64 Bf = floor_B(B);
  if (Bf == 0) return 0;
  auto fs = factors_of(m, S);
  if (fs.size() == 1) {
    u64 H = iroot(Bf, fs[0].lambda);
    fs[0].prepare(H);
    if (fs[0].in_D) return to_u64(fs[0].C(H, budget));
    // Moebius sum over slabs of e
    const Factor& f = fs[0];
    budget.spend(H);
    return to_u64(slab_sum(H, opt.threads, [&](u64 lo, u64 hi) {
      i128 s = 0;
      for (u64 e = lo; e <= hi; ++e) {
        int mu = f.mobius(e);
        if (mu) s += mu * static_cast<i128>(H / e) * ipow128(2 * (H / e) + 1, f.n);
      }
      return s;
    }));
  }
  if (fs.size() != 2) throw Unsupported("census: more than two boundary components");
  // the outer loop runs over the factor off D when there is one
  std::size_t o = fs[0].in_D && !fs[1].in_D ? 1 : 0;
  Factor& outer = fs[o];
  Factor& inner = fs[1 - o];
  const u64 H1 = iroot(Bf, outer.lambda);
  outer.prepare(H1);
  inner.prepare(iroot(Bf, inner.lambda));
  return to_u64(slab_sum(H1, opt.threads, [&](u64 lo, u64 hi) {
    i128 s = 0;
    for (u64 h = lo; h <= hi; ++h) {
      i128 ch = outer.c(h);
      if (ch == 0) continue;
      u64 rest = Bf / static_cast<u64>(ipow128(h, outer.lambda));
      s += ch * inner.C(iroot(rest, inner.lambda), budget);
    }
    budget.spend(hi - lo + 1);
    return s;
  }));
}

CountTable count_table(const CompactificationModel& m, const std::vector<Place>& S, const std::vector<double>& grid,
                       const EnumOptions& opt) {
  if (grid.empty()) throw ConfigError("count_table: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigError("count_table: grid must be increasing");
  CountTable t;
  t.model = m.id();
  t.S = S;
  t.b = exponent_b(m, S);
  for (double B : grid) {
    auto t0 = std::chrono::steady_clock::now();
    CountRow r;
    r.B = B;
    r.N = enumerate_points(m, S, B, opt);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
      r.V = volume_V(m, S, B);
    } catch (const Unsupported&) {
      r.V = std::numeric_limits<double>::quiet_NaN();
    }
    t.rows.push_back(r);
  }
  return t;
}

std::vector<double> geometric_grid(double lo_exp, double hi_exp, int per_decade) {
  if (per_decade < 1 || hi_exp < lo_exp) throw ConfigError("geometric_grid: bad range");
  std::vector<double> g;
  long steps = std::lround((hi_exp - lo_exp) * per_decade);
  for (long i = 0; i <= steps; ++i) g.push_back(std::pow(10.0, lo_exp + static_cast<double>(i) / per_decade));
  return g;
}

double volume_V(const CompactificationModel& m, const std::vector<Place>& S, double B) {
  validate_S(S);
  if (m.metric().smooth_k != 0) throw Unsupported("volume_V: max-metric only");
  if (B < 1) return 0;
  if (m.id() == "E1") {
    // sum over S-unit denominators D <= B of 2B/D times the shell volume D prod (1 - 1/p)
    Factor f;
    f.primes = S_primes(S);
    f.prepare(floor_B(B));
    double total = 0;
    for (u64 D : f.units) {
      double w = 1;
      for (u64 p : f.primes)
        if (D % p == 0) w *= 1 - 1.0 / static_cast<double>(p);
      total += w;
    }
    return 2 * B * total;
  }
  if (S.size() == 1 && m.id() == "E3") return 4 * B;
  if (S.size() == 1 && m.id() == "E5") return 4 * B * std::log(B) + 4 * B;
  throw Unsupported("volume_V: no closed form for " + m.id());
}

bool CountTable::monotone() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].N < rows[i - 1].N) return false;
  return true;
}

namespace {
// shortest text that reads back to the same double
std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}
}  // namespace

std::string CountTable::to_csv(const AsymptoticFit* fit) const {
  std::ostringstream os;
  os << "B,N,V,N_over_BlogB,fit\n";
  for (auto& r : rows) {
    double scale = r.B * std::pow(std::log(r.B), b - 1);
    os << shortest(r.B) << ',' << r.N << ',';
    if (!std::isnan(r.V)) os << shortest(r.V);
    os << ',' << shortest(static_cast<double>(r.N) / scale) << ',';
    if (fit) os << shortest(fit->model_at(r.B) * r.B);
    os << '\n';
  }
  return os.str();
}

nlohmann::json CountTable::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["S"] = nlohmann::json::array();
  for (auto& v : S) j["S"].push_back(v.to_string());
  j["b"] = b;
  j["rows"] = nlohmann::json::array();
  for (auto& r : rows) {
    // wall time stays out so that reruns are byte-identical
    nlohmann::json row = {{"B", r.B}, {"N", r.N}};
    row["V"] = std::isnan(r.V) ? nlohmann::json() : nlohmann::json(r.V);
    j["rows"].push_back(row);
  }
  return j;
}

CountTable CountTable::from_json(const nlohmann::json& j) {
  CountTable t;
  t.model = j.at("model").get<std::string>();
  for (auto& v : j.at("S")) t.S.push_back(Place::parse(v.get<std::string>()));
  t.b = j.at("b").get<int>();
  for (auto& r : j.at("rows")) {
    CountRow row;
    row.B = r.at("B").get<double>();
    row.N = r.at("N").get<std::uint64_t>();
    row.V = r.at("V").is_null() ? std::numeric_limits<double>::quiet_NaN() : r.at("V").get<double>();
    t.rows.push_back(row);
  }
  return t;
}

double AsymptoticFit::model_at(double x) const {
  if (b == 1) return theta_hat;
  double L = std::log(x);
  return theta_hat * std::pow(L, b - 1) + c0 * std::pow(L, b - 2);
}

nlohmann::json AsymptoticFit::to_json() const {
  return {{"b", b},     {"theta_hat", theta_hat}, {"c0", c0},   {"residuals", residuals},
          {"rms", rms}, {"half_width", half_width}, {"B", B}};
}

AsymptoticFit fit_asymptotic(const CountTable& table, int b) {
  const auto& rows = table.rows;
  if (rows.size() < 5) throw ConfigError("fit_asymptotic: need at least 5 grid points");
  if (b < 1) throw ConfigError("fit_asymptotic: b must be positive");
  const std::size_t n = rows.size();
  std::vector<double> y(n), L(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].B <= 1) throw ConfigError("fit_asymptotic: grid must exceed 1");
    y[i] = static_cast<double>(rows[i].N) / rows[i].B;
    L[i] = std::log(rows[i].B);
  }
  AsymptoticFit f;
  f.b = b;
  for (auto& r : rows) f.B.push_back(r.B);
  if (b == 1) {
    std::size_t top = n / 2;
    double mean = 0, all = 0;
    for (std::size_t i = top; i < n; ++i) mean += y[i];
    mean /= static_cast<double>(n - top);
    double var = 0;
    for (std::size_t i = top; i < n; ++i) var += (y[i] - mean) * (y[i] - mean);
    var /= std::max<double>(1, static_cast<double>(n - top - 1));
    f.theta_hat = mean;
    f.half_width = 2 * std::sqrt(var / static_cast<double>(n - top));
    for (double v : y) all += v;
    all /= static_cast<double>(n);
    for (double v : y) f.residuals.push_back(v - all);
  } else {
    // normal equations for y = c1 u + c0 w
    double suu = 0, suw = 0, sww = 0, suy = 0, swy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double u = std::pow(L[i], b - 1), w = std::pow(L[i], b - 2);
      suu += u * u, suw += u * w, sww += w * w, suy += u * y[i], swy += w * y[i];
    }
    double det = suu * sww - suw * suw;
    if (!(std::fabs(det) > 1e-12 * suu * sww)) throw NumericFailure("fit_asymptotic: ill-conditioned grid");
    f.theta_hat = (suy * sww - swy * suw) / det;
    f.c0 = (suu * swy - suw * suy) / det;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - f.model_at(rows[i].B);
      f.residuals.push_back(r);
      rss += r * r;
    }
    double sigma2 = rss / static_cast<double>(n - 2);
    f.half_width = 2 * std::sqrt(sigma2 * sww / det);
  }
  double ss = 0;
  for (double r : f.residuals) ss += r * r;
  f.rms = std::sqrt(ss / static_cast<double>(n));
  return f;
}

nlohmann::json PoissonResult::to_json() const {
  return {{"model", model}, {"s", s},     {"A", A},          {"lhs", lhs},   {"lhs_tail", lhs_tail},
          {"rhs", rhs},     {"rhs_tail", rhs_tail}, {"gap", gap}, {"terms", terms}, {"flagged", flagged}};
}

PoissonResult poisson_crosscheck(const CompactificationModel& m, double s, int A, std::uint64_t P) {
  if (m.id() != "E1" && m.id() != "E2") throw Unsupported("poisson_crosscheck: E1 and E2 only");
  if (A < 0) throw ConfigError("poisson_crosscheck: A must be nonnegative");
  const std::vector<Place> S = {Place::real()};
  PoissonResult out;
  out.model = m.id();
  out.s = s;
  out.A = A;

  // lhs: sum over heights h of c(h) h^{-s lambda}
  auto fs = factors_of(m, S);
  Factor& f = fs[0];
  const double sigma = s * f.lambda;
  const int growth = f.in_D ? f.n - 1 : f.n;  // c(h) <= K h^growth
  if (!(sigma > growth + 1)) throw PoleError("poisson_crosscheck: the height zeta function diverges at s");
  const u64 X = 1'000'000;
  f.prepare(X);
  double lhs = 0;
  for (u64 h = X; h >= 1; --h) lhs += static_cast<double>(f.c(h)) * std::pow(static_cast<double>(h), -sigma);
  double K = f.in_D ? 2.0 * f.n * std::pow(3.0, f.n - 1) : (f.n + 1) * std::pow(3.0, f.n);
  out.lhs = lhs;
  out.lhs_tail = K * std::pow(static_cast<double>(X), growth + 1 - sigma) / (sigma - growth - 1);

  // rhs: arch transform times the finite Euler product of local transforms
  const auto primes = primes_up_to(P);
  std::vector<double> unit_val(primes.size());
  double base = 1, base_half = 1;
  for (std::size_t i = 0; i < primes.size(); ++i) {
    unit_val[i] = fourier_finite(m, primes[i], {Rational(1)}, s).real();
    base *= unit_val[i];
    if (primes[i] <= P / 2) base_half *= unit_val[i];
  }
  double rhs = 0, euler_err = 0;
  for (int a = 0; a <= A; ++a) {
    auto arch = arch_density(m, {Rational(a)}, s);
    if (arch.flagged) out.flagged = true;
    double fin;
    if (a == 0) {
      auto ep = euler_product(m, S, s, P);
      fin = ep.corrected;
      euler_err += ep.tail;
    } else {
      fin = base;
      for (std::size_t i = 0; i < primes.size() && primes[i] <= static_cast<u64>(a); ++i)
        if (a % primes[i] == 0) fin *= fourier_finite(m, primes[i], {Rational(a)}, s).real() / unit_val[i];
      euler_err += std::fabs(base - base_half) / std::fabs(base) * std::fabs(fin);
    }
    double term = arch.value.real() * fin;
    out.terms.push_back(term);
    rhs += a == 0 ? term : 2 * term;
  }
  out.rhs = rhs;
  // |H(a)| ~ K/a^2 beyond A: fit K on the upper half of the computed terms
  double Kt = 0;
  for (int a = std::max(1, A / 2); a <= A; ++a)
    Kt = std::max(Kt, std::fabs(out.terms[a]) * static_cast<double>(a) * a);
  out.rhs_tail = (A > 0 ? 2 * Kt / A : 0) + euler_err;
  out.gap = std::fabs(out.lhs - out.rhs);
  return out;
}

Region Region::parse(const std::string& text) {
  Region r;
  r.name = text;
  std::string signs = text;
  auto colon = text.find(':');
  if (text == "abs_le") {
    r.abs_le = true;
    signs.clear();
  } else if (colon != std::string::npos) {
    if (text.substr(colon + 1) != "abs_le") throw ConfigError("region: unknown condition in '" + text + "'");
    r.abs_le = true;
    signs = text.substr(0, colon);
  }
  for (char c : signs) {
    if (c == '+') r.sign.push_back(1);
    else if (c == '-') r.sign.push_back(-1);
    else if (c == '0' || c == '*') r.sign.push_back(0);
    else throw ConfigError("region: bad sign character in '" + text + "'");
  }
  return r;
}

std::vector<EquiRow> equidistribution_test(const CompactificationModel& m, const std::vector<Place>& S, double B,
                                           const std::vector<Region>& regions, const EnumOptions& opt) {
  validate_S(S);
  if (S.size() != 1 || m.metric().smooth_k != 0 || (m.id() != "E1" && m.id() != "E3" && m.id() != "E5"))
    throw Unsupported("equidistribution_test: E1, E3, E5 with S = {inf} and the max metric");
  const int n = m.dimension();
  const u64 Bf = floor_B(B);
  const u64 total = enumerate_points(m, S, B, opt);
  if (total == 0) throw ConfigError("equidistribution_test: no points below B");
  Budget budget(opt.node_cap);

  // x_1 ranges over [-Y(x_0), Y(x_0)]
  const u64 X = m.id() == "E3" ? iroot(Bf, 2) : Bf;
  auto Y = [&](u64 ax) -> u64 { return m.id() == "E3" ? X : Bf / std::max<u64>(1, ax); };
  // y in [-Y, Y] with the sign condition and |y| >= lo
  auto count_y = [](u64 Yv, int sg, u64 lo) -> i128 {
    i128 side = Yv >= std::max<u64>(1, lo) ? static_cast<i128>(Yv - std::max<u64>(1, lo) + 1) : 0;
    i128 zero = lo == 0 && sg == 0 ? 1 : 0;
    return sg == 0 ? 2 * side + zero : side;
  };
  auto sign_ok = [](std::int64_t x, int sg) { return sg == 0 || (sg > 0 ? x > 0 : x < 0); };

  std::vector<EquiRow> out;
  for (auto& reg : regions) {
    std::vector<int> sg = reg.sign;
    if (sg.empty()) sg.assign(n, 0);
    if (static_cast<int>(sg.size()) != n) throw ConfigError("region '" + reg.name + "' has the wrong dimension");
    if (reg.abs_le && n < 2) throw ConfigError("region '" + reg.name + "': |x1| <= |x2| needs two coordinates");
    i128 count;
    if (n == 1) {
      count = count_y(Bf, sg[0], 0);
    } else {
      auto col = [&](std::int64_t x) -> i128 {
        if (!sign_ok(x, sg[0])) return 0;
        u64 ax = static_cast<u64>(x < 0 ? -x : x);
        return count_y(Y(ax), sg[1], reg.abs_le ? ax : 0);
      };
      count = col(0) + slab_sum(X, opt.threads, [&](u64 lo, u64 hi) {
                i128 s = 0;
                for (u64 x = lo; x <= hi; ++x) s += col(static_cast<std::int64_t>(x)) + col(-static_cast<std::int64_t>(x));
                budget.spend(hi - lo + 1);
                return s;
              });
    }
    EquiRow row;
    row.region = reg.name;
    row.count = to_u64(count);
    row.empirical = static_cast<double>(row.count) / static_cast<double>(total);
    // the limiting measure is invariant under coordinate sign changes and under swapping x_1, x_2
    int fixed = 0;
    for (int v : sg) fixed += v != 0;
    row.predicted = std::ldexp(1.0, -fixed) * (reg.abs_le ? 0.5 : 1.0);
    out.push_back(row);
  }
  return out;
}

nlohmann::json equi_to_json(const std::vector<EquiRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (auto& r : rows)
    j.push_back({{"region", r.region}, {"count", r.count}, {"empirical", r.empirical}, {"predicted", r.predicted}});
  return j;
}

}  // namespace manin
