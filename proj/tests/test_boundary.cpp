#include <algorithm>
#include <random>

#include "doctest.h"
#include "manin/boundary.hpp"
#include "manin/catalog.hpp"
#include "manin/errors.hpp"

using namespace manin;

namespace {

const Place R = Place::real();

std::vector<std::vector<Place>> all_S() {
  // S subset of {inf,2,3,5} containing inf
  std::vector<std::vector<Place>> out;
  std::vector<std::uint64_t> ps = {2, 3, 5};
  for (unsigned mask = 0; mask < 8; ++mask) {
    std::vector<Place> S = {R};
    for (unsigned i = 0; i < 3; ++i)
      if (mask >> i & 1) S.push_back(Place::finite(ps[i]));
    out.push_back(S);
  }
  return out;
}

Point pt(std::initializer_list<long> xs) {
  Point p;
  for (long x : xs) p.emplace_back(x);
  return p;
}

}  // namespace

TEST_CASE("clemens complexes of catalog models") {
  auto c3 = clemens_complex(model_by_id("E3"), R, true);
  CHECK(c3.vertices.size() == 1);
  CHECK(c3.dimension() == 0);

  auto c5 = clemens_complex(model_by_id("E5"), R, true);
  auto faces = c5.faces();
  CHECK(faces == std::vector<std::vector<int>>{{0}, {1}, {0, 1}});
  CHECK(c5.dimension() == 1);
  auto j = c5.to_json(model_by_id("E5").divisors());
  CHECK(j["faces"] == nlohmann::json::parse("[[1],[2],[1,2]]"));
  auto back = ClemensComplex::from_json(j);
  CHECK(back.faces() == faces);

  auto c1 = clemens_complex(model_by_id("E1"), Place::finite(5), true);
  CHECK(c1.vertices.size() == 1);
  CHECK(c1.dimension() == 0);

  // D empty: the restricted complex is empty
  auto c2 = clemens_complex(model_by_id("E2"), R, true);
  CHECK(c2.dimension() == -1);
  CHECK(clemens_complex(model_by_id("E2"), R, false).dimension() == 0);

  // E4 restricted to D keeps only Dy
  auto c4 = clemens_complex(model_by_id("E4"), R, true);
  CHECK(c4.vertices == std::vector<int>{1});
  CHECK(clemens_complex(model_by_id("E4"), R, false).dimension() == 1);

  for (auto& id : catalog_ids())
    for (auto& v : {R, Place::finite(2), Place::finite(7)})
      for (bool r : {true, false}) CHECK(clemens_complex(model_by_id(id), v, r).downward_closed());
}

TEST_CASE("downward closure detects a broken complex") {
  ClemensComplex c;
  c.vertices = {0, 1, 2};
  c.maximal_faces = {{0, 1}};
  CHECK_FALSE(c.downward_closed());  // vertex 2 missing
  c.maximal_faces = {{0, 1}, {2}};
  CHECK(c.downward_closed());
}

TEST_CASE("ep rank") {
  CHECK(ep_rank(model_by_id("E3")) == 0);
  CHECK(ep_rank(model_by_id("E4")) == 1);
  CHECK(ep_rank(model_by_id("E2")) == 1);
  CHECK(ep_rank(model_by_id("E6")) == 1);
  CHECK(ep_rank(model_by_id("E5")) == 0);
}

TEST_CASE("exponent b") {
  CHECK(exponent_b(model_by_id("E1"), {R}) == 1);
  CHECK(exponent_b(model_by_id("E5"), {R}) == 2);
  CHECK(exponent_b(model_by_id("E1"), {R, Place::finite(5)}) == 2);
  CHECK(exponent_b(model_by_id("E4"), {R}) == 2);
  CHECK(exponent_b(model_by_id("E3"), {R}) == 1);
  // D empty: b = rank Pic
  CHECK(exponent_b(model_by_id("E2"), {R, Place::finite(3)}) == 1);
  CHECK_THROWS_AS(exponent_b(model_by_id("E1"), {Place::finite(5)}), ConfigError);
}

TEST_CASE("exponent b is additive in S") {
  for (auto& id : catalog_ids()) {
    const auto& m = model_by_id(id);
    for (auto& S : all_S())
      for (std::uint64_t p : {7ull}) {
        auto S2 = S;
        S2.push_back(Place::finite(p));
        int dim = clemens_complex(m, Place::finite(p), true).dimension();
        CHECK(exponent_b(m, S2) == exponent_b(m, S) + 1 + dim);
      }
  }
}

TEST_CASE("pole orders") {
  auto e3 = pole_orders(model_by_id("E3"), {R}, pt({0, 0}));
  CHECK(e3.b0 == 1);
  auto a10 = pole_orders(model_by_id("E5"), {R}, pt({1, 0}));
  CHECK(a10.b0 == 2);
  CHECK(a10.ba <= 1);
  auto a11 = pole_orders(model_by_id("E5"), {R}, pt({1, 1}));
  CHECK(a11.ba == 0);
  CHECK(a11.b0 == 2);
}

TEST_CASE("b_a < b_0 over every stratum and S") {
  int cases = 0;
  for (auto& id : catalog_ids()) {
    const auto& m = model_by_id(id);
    for (auto& S : all_S())
      for (auto& st : character_strata(m)) {
        auto po = pole_orders(m, S, st.d);
        CHECK(po.ba < po.b0);
        CHECK(po.b0 == exponent_b(m, S));
        ++cases;
      }
  }
  CHECK(cases == 8 * (1 + 1 + 1 + 3 + 3 + 1));
}

TEST_CASE("divisor coefficients") {
  CHECK(divisor_coefficients(model_by_id("E3"), pt({1, 1})) == std::vector<int>{1});
  CHECK(divisor_coefficients(model_by_id("E5"), pt({1, 0})) == std::vector<int>{1, 0});
  CHECK(divisor_coefficients(model_by_id("E1"), pt({1})) == std::vector<int>{1});
  CHECK_THROWS_AS(divisor_coefficients(model_by_id("E5"), pt({0, 0})), ConfigError);

  // homogeneity under rational scalars
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> coef(-3, 3), sc(1, 9);
  for (auto& id : catalog_ids()) {
    const auto& m = model_by_id(id);
    for (int t = 0; t < 50; ++t) {
      Point a;
      for (int i = 0; i < m.dimension(); ++i) a.emplace_back(coef(rng));
      if (std::all_of(a.begin(), a.end(), [](auto& x) { return x == 0; })) continue;
      Rational lam(sc(rng), sc(rng));
      lam.canonicalize();
      if (t % 2) lam = -lam;
      Point b = a;
      for (auto& x : b) x *= lam;
      CHECK(divisor_coefficients(m, a) == divisor_coefficients(m, b));
    }
  }
}

TEST_CASE("character strata partition nonzero characters") {
  CHECK(character_strata(model_by_id("E5")).size() == 3);
  CHECK(character_strata(model_by_id("E3")).size() == 1);
  CHECK(character_strata(model_by_id("E1")).size() == 1);
  for (auto& id : catalog_ids()) {
    const auto& m = model_by_id(id);
    auto strata = character_strata(m);
    // every nonzero a in a small box lies in exactly one stratum, with the matching d-pattern
    int n = m.dimension();
    std::vector<long> a(n, -2);
    while (true) {
      Point p;
      for (long x : a) p.emplace_back(x);
      bool zero = std::all_of(a.begin(), a.end(), [](long x) { return x == 0; });
      if (!zero) {
        int hits = 0;
        for (auto& st : strata)
          if (st.contains(p)) {
            ++hits;
            CHECK(st.d == divisor_coefficients(m, p));
          }
        CHECK(hits == 1);
      }
      int i = 0;
      for (; i < n; ++i) {
        if (++a[i] <= 2) break;
        a[i] = -2;
      }
      if (i == n) break;
    }
  }
}

TEST_CASE("divisor scheme json round trip") {
  for (auto& id : catalog_ids()) {
    const auto& ds = model_by_id(id).divisors();
    auto back = DivisorScheme::from_json(ds.to_json());
    CHECK(back.labels == ds.labels);
    CHECK(back.rho == ds.rho);
    CHECK(back.in_D == ds.in_D);
    for (std::size_t a = 0; a < ds.size(); ++a) {
      CHECK(ds.rho[a] >= 2);
      CHECK(ds.lambda(a) >= 1);
    }
  }
  CHECK(model_by_id("E4").divisors().lambdas() == std::vector<int>{2, 1});
  CHECK(model_by_id("E3").divisors().lambdas() == std::vector<int>{2});
  CHECK(model_by_id("E6").divisors().lambdas() == std::vector<int>{3});
}
