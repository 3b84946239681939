#include "manin/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "manin/errors.hpp"

namespace manin {

CompactificationModel::CompactificationModel(std::string id, std::string description,
                                             std::vector<std::vector<int>> groups, std::vector<bool> in_D,
                                             std::vector<std::string> labels)
    : id_(std::move(id)), description_(std::move(description)), dim_(0), groups_(std::move(groups)) {
  ds_.labels = std::move(labels);
  ds_.in_D = std::move(in_D);
  for (auto& g : groups_) {
    ds_.rho.push_back(static_cast<int>(g.size()) + 1);  // K_{P^n} = -(n+1)H
    ds_.residue_degree.push_back(1);
    dim_ += static_cast<int>(g.size());
  }
  ds_.validate();
}

CompactificationModel CompactificationModel::with_metric(MetricOptions m) const {
  if (m.smooth_k < 0) throw ConfigError("metric: smoothing exponent must be >= 0");
  CompactificationModel out = *this;
  out.metric_ = m;
  return out;
}

Rational CompactificationModel::norm_finite(std::size_t alpha, std::uint64_t p, const Point& x) const {
  Rational mx = 1;
  for (int i : groups_.at(alpha)) {
    if (x.at(i) == 0) continue;
    Rational a = padic_abs(x[i], p);
    if (a > mx) mx = a;
  }
  return Rational(1) / mx;
}

double CompactificationModel::norm_real(std::size_t alpha, const std::vector<double>& x) const {
  const auto& g = groups_.at(alpha);
  if (metric_.smooth_k == 0) {
    double mx = 1;
    for (int i : g) mx = std::max(mx, std::fabs(x.at(i)));
    return 1.0 / mx;
  }
  // scale by the largest coordinate to keep the power sum finite
  double mx = 1;
  for (int i : g) mx = std::max(mx, std::fabs(x.at(i)));
  double k2 = 2.0 * metric_.smooth_k;
  double sum = std::pow(1.0 / mx, k2);
  for (int i : g) sum += std::pow(std::fabs(x[i]) / mx, k2);
  return 1.0 / (mx * std::pow(sum, 1.0 / k2));
}

double CompactificationModel::norm(const Place& v, std::size_t alpha, const Point& x) const {
  switch (v.kind()) {
    case Place::Kind::Finite:
      return norm_finite(alpha, v.prime(), x).get_d();
    case Place::Kind::Real: {
      std::vector<double> xd;
      for (auto& c : x) xd.push_back(c.get_d());
      return norm_real(alpha, xd);
    }
    default:
      throw Unsupported("catalog models are defined over Q; no complex place");
  }
}

bool CompactificationModel::incidence(const Place& v, const std::vector<int>& A) const {
  // hyperplanes at infinity of distinct factors always meet in a rational point
  if (v.kind() == Place::Kind::Complex) throw Unsupported("catalog incidence: no complex place over Q");
  std::set<int> seen;
  for (int a : A)
    if (a < 0 || a >= static_cast<int>(groups_.size()) || !seen.insert(a).second) return false;
  return true;
}

bool CompactificationModel::good_reduction(std::uint64_t p) const { return is_prime(p); }

std::vector<std::string> catalog_ids() { return {"E1", "E2", "E3", "E4", "E5", "E6"}; }

const CompactificationModel& model_by_id(const std::string& id) {
  static const std::map<std::string, CompactificationModel> models = [] {
    std::map<std::string, CompactificationModel> m;
    m.emplace("E1", CompactificationModel("E1", "P^1 containing G_a, D = {inf}", {{0}}, {true}, {"inf"}));
    m.emplace("E2", CompactificationModel("E2", "P^1, D empty (rational points)", {{0}}, {false}, {"inf"}));
    m.emplace("E3", CompactificationModel("E3", "P^2 containing G_a^2, D = line at infinity", {{0, 1}}, {true},
                                          {"H"}));
    m.emplace("E4", CompactificationModel("E4", "P^1 x P^1, D = {y = inf}", {{0}, {1}}, {false, true},
                                          {"Dx", "Dy"}));
    m.emplace("E5", CompactificationModel("E5", "P^1 x P^1, D = both rulings", {{0}, {1}}, {true, true},
                                          {"D1", "D2"}));
    m.emplace("E6", CompactificationModel("E6", "P^2, D empty (rational points)", {{0, 1}}, {false}, {"H"}));
    return m;
  }();
  auto it = models.find(id);
  if (it == models.end()) throw ConfigError("unknown model '" + id + "'");
  return it->second;
}

double local_height(const CompactificationModel& m, const Place& v, std::size_t alpha, const Point& x) {
  return m.norm(v, alpha, x);
}

Rational local_height_exact(const CompactificationModel& m, std::uint64_t p, std::size_t alpha, const Point& x) {
  return m.norm_finite(alpha, p, x);
}

std::vector<std::uint64_t> height_primes(const Point& x) {
  std::set<std::uint64_t> ps;
  for (auto& c : x) {
    if (c == 0) continue;
    for (auto p : support_primes(Rational(c.get_den()))) ps.insert(p);
  }
  return {ps.begin(), ps.end()};
}

namespace {

double log_height_over(const CompactificationModel& m, const Point& x, const std::vector<Place>& places) {
  const auto& ds = m.divisors();
  double acc = 0;
  for (auto& v : places)
    for (std::size_t a = 0; a < ds.size(); ++a) acc -= ds.lambda(a) * std::log(m.norm(v, a, x));
  return acc;
}

std::vector<Place> all_places(const Point& x) {
  std::vector<Place> out = {Place::real()};
  for (auto p : height_primes(x)) out.push_back(Place::finite(p));
  return out;
}

}  // namespace

double height_over(const CompactificationModel& m, const Point& x, const std::vector<Place>& places) {
  return std::exp(log_height_over(m, x, places));
}

cplx height(const CompactificationModel& m, const Point& x, cplx s) {
  if (static_cast<int>(x.size()) != m.dimension()) throw ConfigError("height: wrong dimension");
  return std::exp(s * log_height_over(m, x, all_places(x)));
}

Rational height_finite(const CompactificationModel& m, const Point& x) {
  const auto& ds = m.divisors();
  Rational h = 1;
  for (auto p : height_primes(x))
    for (std::size_t a = 0; a < ds.size(); ++a) {
      Rational inv = 1 / m.norm_finite(a, p, x);
      for (int k = 0; k < ds.lambda(a); ++k) h *= inv;
    }
  return h;
}

bool is_integral(const CompactificationModel& m, std::uint64_t p, const Point& x) {
  for (int a : m.divisors().D_indices())
    if (m.norm_finite(a, p, x) != 1) return false;
  return true;
}

namespace {
bool is_prime_power(std::uint64_t q) {
  if (q < 2) return false;
  for (std::uint64_t p = 2; p * p <= q; ++p)
    if (q % p == 0) {
      while (q % p == 0) q /= p;
      return q == 1;
    }
  return true;
}
}  // namespace

std::uint64_t stratum_count(const CompactificationModel& m, std::uint64_t q, const std::vector<int>& A) {
  if (!is_prime_power(q)) throw ConfigError("stratum_count: q must be a prime power");
  const auto& g = m.groups();
  std::set<int> in(A.begin(), A.end());
  for (int a : A)
    if (a < 0 || a >= static_cast<int>(g.size())) throw ConfigError("stratum_count: bad component index");
  // D_A^o = prod_{alpha in A} P^{n-1}(hyperplane at infinity) x prod_{alpha not in A} A^n
  std::uint64_t n = 1;
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto k = static_cast<unsigned>(g[a].size());
    n *= in.count(static_cast<int>(a)) ? (ipow(q, k) - 1) / (q - 1) : ipow(q, k);
  }
  return n;
}

std::uint64_t total_count(const CompactificationModel& m, std::uint64_t q) {
  std::uint64_t n = 1;
  for (auto& g : m.groups()) n *= (ipow(q, static_cast<unsigned>(g.size()) + 1) - 1) / (q - 1);
  return n;
}

nlohmann::json describe(const CompactificationModel& m) {
  nlohmann::json j;
  j["id"] = m.id();
  j["description"] = m.description();
  j["dimension"] = m.dimension();
  j["divisors"] = m.divisors().to_json();
  j["coordinate_groups"] = m.groups();
  j["metric"] = m.metric().smooth_k == 0 ? nlohmann::json("max") : nlohmann::json({{"smooth_k", m.metric().smooth_k}});
  j["ep_rank"] = ep_rank(m);
  nlohmann::json strata = nlohmann::json::array();
  for (auto& st : character_strata(m)) strata.push_back({{"label", st.label}, {"d", st.d}});
  j["character_strata"] = strata;
  return j;
}

}  // namespace manin
