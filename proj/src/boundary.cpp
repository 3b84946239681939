#include "manin/boundary.hpp"

#include <algorithm>
#include <set>

#include "manin/catalog.hpp"
#include "manin/errors.hpp"

namespace manin {

std::vector<int> DivisorScheme::lambdas() const {
  std::vector<int> out;
  for (std::size_t a = 0; a < size(); ++a) out.push_back(lambda(a));
  return out;
}

std::vector<int> DivisorScheme::D_indices() const {
  std::vector<int> out;
  for (std::size_t a = 0; a < size(); ++a)
    if (in_D[a]) out.push_back(static_cast<int>(a));
  return out;
}

std::vector<int> DivisorScheme::off_D_indices() const {
  std::vector<int> out;
  for (std::size_t a = 0; a < size(); ++a)
    if (!in_D[a]) out.push_back(static_cast<int>(a));
  return out;
}

int DivisorScheme::index_of(const std::string& label) const {
  for (std::size_t a = 0; a < size(); ++a)
    if (labels[a] == label) return static_cast<int>(a);
  throw ConfigError("unknown boundary component '" + label + "'");
}

void DivisorScheme::validate() const {
  if (rho.size() != size() || in_D.size() != size() || residue_degree.size() != size())
    throw ConfigError("divisor scheme: inconsistent sizes");
  for (std::size_t a = 0; a < size(); ++a) {
    if (rho[a] < 2) throw ConfigError("divisor scheme: rho must be >= 2");
    if (lambda(a) < 1) throw ConfigError("divisor scheme: lambda must be >= 1");
    if (residue_degree[a] < 1) throw ConfigError("divisor scheme: residue degree must be >= 1");
  }
}

nlohmann::json DivisorScheme::to_json() const {
  nlohmann::json j;
  j["labels"] = labels;
  j["rho"] = rho;
  j["lambda"] = lambdas();
  std::vector<std::string> d;
  for (int a : D_indices()) d.push_back(labels[a]);
  j["A_D"] = d;
  j["residue_degree"] = residue_degree;
  return j;
}

DivisorScheme DivisorScheme::from_json(const nlohmann::json& j) {
  DivisorScheme ds;
  ds.labels = j.at("labels").get<std::vector<std::string>>();
  ds.rho = j.at("rho").get<std::vector<int>>();
  ds.in_D.assign(ds.labels.size(), false);
  for (auto& l : j.at("A_D")) ds.in_D[ds.index_of(l.get<std::string>())] = true;
  ds.residue_degree = j.value("residue_degree", std::vector<int>(ds.labels.size(), 1));
  ds.validate();
  return ds;
}

// ---- Clemens complexes

std::vector<std::vector<int>> ClemensComplex::faces() const {
  std::set<std::vector<int>> all;
  for (auto& f : maximal_faces) {
    std::size_t k = f.size();
    for (std::uint64_t mask = 1; mask < (1ull << k); ++mask) {
      std::vector<int> sub;
      for (std::size_t i = 0; i < k; ++i)
        if (mask >> i & 1) sub.push_back(f[i]);
      all.insert(sub);
    }
  }
  std::vector<std::vector<int>> out(all.begin(), all.end());
  std::stable_sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.size() < b.size(); });
  return out;
}

bool ClemensComplex::has_face(const std::vector<int>& face) const {
  if (face.empty()) return true;
  std::vector<int> f = face;
  std::sort(f.begin(), f.end());
  for (auto& m : maximal_faces)
    if (std::includes(m.begin(), m.end(), f.begin(), f.end())) return true;
  return false;
}

int ClemensComplex::dimension() const {
  int d = -1;
  for (auto& f : maximal_faces) d = std::max(d, static_cast<int>(f.size()) - 1);
  return d;
}

bool ClemensComplex::downward_closed() const {
  auto fs = faces();
  std::set<std::vector<int>> all(fs.begin(), fs.end());
  for (auto& f : fs)
    for (std::size_t drop = 0; drop < f.size() && f.size() > 1; ++drop) {
      std::vector<int> sub;
      for (std::size_t i = 0; i < f.size(); ++i)
        if (i != drop) sub.push_back(f[i]);
      if (!all.count(sub)) return false;
    }
  for (int v : vertices)
    if (!all.count({v})) return false;
  return true;
}

nlohmann::json ClemensComplex::to_json(const DivisorScheme& ds) const {
  auto one_based = [](const std::vector<int>& f) {
    std::vector<int> g;
    for (int i : f) g.push_back(i + 1);
    return g;
  };
  nlohmann::json j;
  j["place"] = place.to_string();
  j["labels"] = ds.labels;
  j["vertices"] = one_based(vertices);
  nlohmann::json fs = nlohmann::json::array(), ms = nlohmann::json::array();
  for (auto& f : faces()) fs.push_back(one_based(f));
  for (auto& f : maximal_faces) ms.push_back(one_based(f));
  j["faces"] = fs;
  j["maximal_faces"] = ms;
  j["dimension"] = dimension();
  return j;
}

ClemensComplex ClemensComplex::from_json(const nlohmann::json& j) {
  auto zero_based = [](const std::vector<int>& f) {
    std::vector<int> g;
    for (int i : f) g.push_back(i - 1);
    return g;
  };
  ClemensComplex c;
  c.place = Place::parse(j.at("place").get<std::string>());
  c.vertices = zero_based(j.at("vertices").get<std::vector<int>>());
  for (auto& f : j.at("maximal_faces")) c.maximal_faces.push_back(zero_based(f.get<std::vector<int>>()));
  return c;
}

ClemensComplex clemens_complex(const CompactificationModel& m, const Place& v, bool restrict_to_D) {
  const auto& ds = m.divisors();
  ClemensComplex c;
  c.place = v;
  std::vector<int> verts;
  for (std::size_t a = 0; a < ds.size(); ++a)
    if ((!restrict_to_D || ds.in_D[a]) && m.incidence(v, {static_cast<int>(a)})) verts.push_back(static_cast<int>(a));
  c.vertices = verts;
  if (verts.size() > 20) throw Unsupported("clemens_complex: too many components");
  std::vector<std::vector<int>> faces;
  for (std::uint64_t mask = 1; mask < (1ull << verts.size()); ++mask) {
    std::vector<int> A;
    for (std::size_t i = 0; i < verts.size(); ++i)
      if (mask >> i & 1) A.push_back(verts[i]);
    if (m.incidence(v, A)) faces.push_back(A);
  }
  for (auto& f : faces) {
    bool maximal = true;
    for (auto& g : faces)
      if (g.size() > f.size() && std::includes(g.begin(), g.end(), f.begin(), f.end())) {
        maximal = false;
        break;
      }
    if (maximal) c.maximal_faces.push_back(f);
  }
  return c;
}

int ep_rank(const CompactificationModel& m) { return static_cast<int>(m.divisors().off_D_indices().size()); }

void validate_S(const std::vector<Place>& S) {
  bool real = false;
  std::set<Place> seen;
  for (auto& v : S) {
    if (v.kind() == Place::Kind::Complex) throw ConfigError("S: the base field is Q, no complex place");
    if (!seen.insert(v).second) throw ConfigError("S: repeated place " + v.to_string());
    if (v.kind() == Place::Kind::Real) real = true;
  }
  if (!real) throw ConfigError("S must contain the real place");
}

int exponent_b(const CompactificationModel& m, const std::vector<Place>& S) {
  validate_S(S);
  int b = ep_rank(m);
  for (auto& v : S) b += 1 + clemens_complex(m, v, true).dimension();
  return b;
}

PoleOrders pole_orders(const CompactificationModel& m, const std::vector<Place>& S, const std::vector<int>& d) {
  validate_S(S);
  const auto& ds = m.divisors();
  if (d.size() != ds.size()) throw ConfigError("pole_orders: d-pattern has the wrong length");
  PoleOrders out;
  for (int a : ds.off_D_indices()) {
    out.b0 += 1;
    if (d[a] == 0) out.ba += 1;
  }
  for (auto& v : S) {
    auto c = clemens_complex(m, v, true);
    int best0 = 0, besta = 0;
    for (auto& f : c.faces()) {
      int k = static_cast<int>(f.size());
      best0 = std::max(best0, k);
      if (std::all_of(f.begin(), f.end(), [&](int a) { return d[a] == 0; })) besta = std::max(besta, k);
    }
    out.b0 += best0;
    out.ba += besta;
  }
  return out;
}

PoleOrders pole_orders(const CompactificationModel& m, const std::vector<Place>& S, const Point& a) {
  bool zero = std::all_of(a.begin(), a.end(), [](const Rational& x) { return x == 0; });
  if (zero) {
    auto r = pole_orders(m, S, std::vector<int>(m.divisors().size(), 0));
    r.ba = r.b0;
    return r;
  }
  return pole_orders(m, S, divisor_coefficients(m, a));
}

std::vector<int> divisor_coefficients(const CompactificationModel& m, const Point& a) {
  if (static_cast<int>(a.size()) != m.dimension()) throw ConfigError("divisor_coefficients: wrong dimension");
  if (std::all_of(a.begin(), a.end(), [](const Rational& x) { return x == 0; }))
    throw ConfigError("divisor_coefficients: a must be nonzero");
  // f_a = sum a_i x_i has a simple pole along the hyperplane at infinity of each factor it involves
  std::vector<int> d;
  for (auto& g : m.groups()) {
    bool hit = std::any_of(g.begin(), g.end(), [&](int i) { return a[i] != 0; });
    d.push_back(hit ? 1 : 0);
  }
  return d;
}

std::vector<CharacterStratum> character_strata(const CompactificationModel& m) {
  const auto& groups = m.groups();
  std::size_t r = groups.size();
  std::vector<CharacterStratum> out;
  for (std::uint64_t mask = 1; mask < (1ull << r); ++mask) {
    CharacterStratum st;
    std::string label;
    for (std::size_t g = 0; g < r; ++g) {
      bool on = mask >> g & 1;
      st.d.push_back(on ? 1 : 0);
      if (!label.empty()) label += ",";
      std::string coords;
      for (int i : groups[g]) coords += (coords.empty() ? "" : "|") + ("a" + std::to_string(i + 1));
      label += coords + (on ? "!=0" : "=0");
    }
    st.label = label;
    st.contains = [groups, mask](const Point& a) {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        bool hit = std::any_of(groups[g].begin(), groups[g].end(), [&](int i) { return a[i] != 0; });
        if (hit != static_cast<bool>(mask >> g & 1)) return false;
      }
      return true;
    };
    out.push_back(std::move(st));
  }
  return out;
}

}  // namespace manin
