// Acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "manin/boundary.hpp"
#include "manin/catalog.hpp"
#include "manin/census.hpp"
#include "manin/density.hpp"
#include "manin/localfield.hpp"
#include "manin/oscillatory.hpp"

using namespace manin;

namespace {

const double kPiD = 3.14159265358979323846;

struct Check {
  bool ok = true;
  std::ostringstream note;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) note << "first failure: " << what << "; ";
      ok = false;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
  Check c;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.note << " exception: " << e.what();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    c.ok = false;
    c.note << " over budget";
  }
  if (!c.ok) ++failures;
  std::printf("%s %2d %-28s %8.2fs (budget %.0fs)  %s\n", c.ok ? "PASS" : "FAIL", id, name.c_str(), secs, budget_s,
              c.note.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

Rational pinv(std::uint64_t p, int m) { return haar_coset(p, m); }

std::uint64_t ipow(std::uint64_t p, int k) {
  std::uint64_t r = 1;
  while (k-- > 0) r *= p;
  return r;
}

const Place R = Place::real();

}  // namespace

int main() {
  criterion(1, "local zeta closed forms", 1, [](Check& c) {
    int n = 0;
    for (double s : {1.0, 2.0, 4.0, 0.5, 0.25, 8.0}) {
      c.require(zeta_local(R, s) == cplx(2.0 / s, 0), "real s=" + fmt(s));
      ++n;
    }
    c.require(zeta_local(Place::complex(), 2 * kPiD) == cplx(1, 0), "complex 2pi");
    c.require(zeta_local(Place::complex(), kPiD) == cplx(2, 0), "complex pi");
    n += 2;
    std::vector<std::pair<std::uint64_t, int>> fin = {{2, 1}, {2, 2}, {3, 1}, {3, 2}, {5, 1}, {5, 3}, {7, 2}, {2, 10}};
    for (auto [p, k] : fin) {
      std::uint64_t q = ipow(p, k);
      // p^k / (p^k - 1) from exact integers, one rounding
      double want = static_cast<double>(q) / static_cast<double>(q - 1);
      c.require(zeta_local(Place::finite(p), static_cast<double>(k)) == cplx(want, 0),
                "p=" + std::to_string(p) + " s=" + std::to_string(k));
      ++n;
    }
    c.require(residue_c(R) == 2.0, "c_R");
    c.require(residue_c(Place::complex()) == 2 * kPiD, "c_C");
    c.require(residue_c(Place::finite(2)) == 1.0 / std::log(2.0), "c_2");
    c.require(residue_c(Place::finite(3)) == 1.0 / std::log(3.0), "c_3");
    n += 4;
    c.note << n << " points ";
  });

  criterion(2, "coset vanishing", 30, [](Check& c) {
    int cases = 0;
    double worst = 0;
    for (std::uint64_t p : {2ull, 3ull, 5ull})
      for (int n = 1; n <= 2; ++n) {
        std::uint64_t pn = ipow(p, n);
        for (std::uint64_t xi = 1; xi < pn; ++xi) {
          if (xi % p == 0) continue;
          auto f = StepFunction::indicator_coset(p, Rational(static_cast<long>(xi)), n);
          for (int d = 1; d <= 3; ++d) {
            int e = vanishing_exponent(p, d, f);
            for (int m = e; m <= e + 2; ++m)
              for (long u = 1; u < static_cast<long>(p); ++u) {
                Rational a = Rational(u) * pinv(p, m);
                double v = std::abs(coset_phase_integral(p, Rational(static_cast<long>(xi)), n, a, d));
                worst = std::max(worst, v);
                c.require(v < 1e-10, "p=" + std::to_string(p) + " xi=" + std::to_string(xi));
                ++cases;
              }
          }
        }
      }
    c.require(cases >= 200, "fewer than 200 cases");
    c.note << cases << " cases, max |I| " << fmt(worst) << ' ';
  });

  criterion(3, "oscillatory decay", 300, [](Check& c) {
    struct Combo {
      std::uint64_t p;  // 0 = real
      int d;
      cplx s;
      bool units;
    };
    std::vector<Combo> combos = {{0, 1, 1.0, false},  {0, 2, 1.0, false},  {0, 3, 1.0, false},
                                 {0, 1, 0.5, false},  {0, 2, 2.0, false},  {0, 1, cplx(1, 2), false},
                                 {2, 1, 1.0, false},  {3, 2, 1.0, false},  {5, 3, 0.5, false},
                                 {3, 1, 2.0, true},   {2, 2, 1.0, true},   {7, 1, cplx(1, 1), false}};
    for (auto& k : combos) {
      Place v = k.p ? Place::finite(k.p) : R;
      TestFunction phi = BumpFunction();
      std::vector<Rational> grid;
      if (k.p) {
        phi = k.units ? StepFunction::indicator_units(k.p) : StepFunction::indicator_zp(k.p);
        for (std::uint64_t q = k.p; q <= 1000000; q *= k.p)
          if (q >= 10) grid.push_back(Rational(1) / Rational(static_cast<long>(q)));
      } else {
        for (long q = 10; q <= 1000000; q *= 10) grid.push_back(Rational(q));
      }
      auto rep = decay_report(v, phi, k.d, k.s, grid, 1);
      std::string tag = v.to_string() + " d=" + std::to_string(k.d);
      c.require(rep.fitted_exponent >= rep.kappa - 0.05, tag + " exponent " + fmt(rep.fitted_exponent));
      c.require(rep.envelope_ratio <= 10, tag + " envelope " + fmt(rep.envelope_ratio));
    }
    c.note << combos.size() << " combinations ";
  });

  std::vector<cplx> svals = {1.3, 2.0, 3.5, cplx(1.5, 1.0), cplx(2.0, -2.5), cplx(4.0, 0.7)};

  criterion(4, "Denef vs residue-class oracle", 120, [&](Check& c) {
    int cases = 0;
    double worst = 0;
    for (auto& id : catalog_ids()) {
      const auto& m = model_by_id(id);
      for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull})
        for (cplx s : svals) {
          auto sa = along_lambda(m, s);
          double diff = std::abs(denef_density(m, p, sa) - brute_density_oracle(m, p, sa));
          worst = std::max(worst, diff);
          c.require(diff < 1e-12, id + " p=" + std::to_string(p));
          ++cases;
        }
    }
    c.note << cases << " cases, max diff " << fmt(worst) << ' ';
  });

  criterion(5, "pole order domination", 1, [](Check& c) {
    int cases = 0;
    std::vector<std::uint64_t> ps = {2, 3, 5};
    for (auto& id : catalog_ids()) {
      const auto& m = model_by_id(id);
      for (unsigned mask = 0; mask < 8; ++mask) {
        std::vector<Place> S = {R};
        for (unsigned i = 0; i < 3; ++i)
          if (mask >> i & 1) S.push_back(Place::finite(ps[i]));
        for (auto& st : character_strata(m)) {
          auto po = pole_orders(m, S, st.d);
          c.require(po.ba < po.b0, id);
          ++cases;
        }
      }
    }
    c.note << cases << " cases ";
  });

  // counts reused by the determinism check
  struct Census {
    std::string id;
    std::vector<Place> S;
    std::vector<double> grid;
  };
  std::vector<Census> censuses = {{"E1", {R}, geometric_grid(2, 6, 2)},
                                  {"E3", {R}, geometric_grid(2, 6, 2)},
                                  {"E5", {R}, geometric_grid(2, 6, 2)},
                                  {"E4", {R}, geometric_grid(2, 6, 2)},
                                  {"E1", {R, Place::finite(5)}, geometric_grid(1, 9, 2)}};
  std::vector<CountTable> tables;

  criterion(6, "main-term constants", 1800, [&](Check& c) {
    for (auto& cs : censuses) tables.push_back(count_table(model_by_id(cs.id), cs.S, cs.grid));
    auto near = [](double x, double want, double rel) { return std::fabs(x / want - 1) <= rel; };
    const double e4 = 24 / (kPiD * kPiD);

    c.require(enumerate_points(model_by_id("E1"), {R}, 1e6) == 2000001, "E1 N(1e6)");
    double t1 = fit_asymptotic(tables[0], 1).theta_hat;
    double d1 = theta_constant(model_by_id("E1"), {R}).theta;
    c.require(near(t1, 2, 0.01), "E1 fit " + fmt(t1));
    c.require(near(d1, 2, 0.001), "E1 density " + fmt(d1));

    std::uint64_t r = 1000;
    c.require(enumerate_points(model_by_id("E3"), {R}, 1e6) == (2 * r + 1) * (2 * r + 1), "E3 N(1e6)");
    double t3 = fit_asymptotic(tables[1], 1).theta_hat;
    double d3 = theta_constant(model_by_id("E3"), {R}).theta;
    c.require(near(t3, 4, 0.01), "E3 fit " + fmt(t3));
    c.require(near(d3, 4, 0.005), "E3 density " + fmt(d3));

    const auto& m5 = model_by_id("E5");
    c.require(exponent_b(m5, {R}) == 2, "E5 b");
    c.require(clemens_complex(m5, R, true).dimension() == 1, "E5 Clemens dimension");
    double t5 = fit_asymptotic(tables[2], 2).theta_hat;
    double d5 = theta_constant(m5, {R}).theta;
    c.require(near(t5, 4, 0.10), "E5 fit " + fmt(t5));
    c.require(near(d5, 4, 0.01), "E5 density " + fmt(d5));

    double t4 = fit_asymptotic(tables[3], 2).theta_hat;
    double d4 = theta_constant(model_by_id("E4"), {R}).theta;
    c.require(near(t4, e4, 0.10), "E4 fit " + fmt(t4));
    c.require(near(d4, e4, 0.01), "E4 density " + fmt(d4));

    double ratio = fit_asymptotic(tables[4], 1).rms / fit_asymptotic(tables[4], 2).rms;
    c.require(exponent_b(model_by_id("E1"), {R, Place::finite(5)}) == 2, "E1{inf,5} b");
    c.require(ratio >= 5, "E1{inf,5} rms ratio " + fmt(ratio));

    c.note << "E1 " << fmt(t1) << '/' << fmt(d1) << ", E3 " << fmt(t3) << '/' << fmt(d3) << ", E5 " << fmt(t5)
           << '/' << fmt(d5) << ", E4 " << fmt(t4) << '/' << fmt(d4) << ", E1{inf,5} b=1/b=2 rms " << fmt(ratio)
           << ' ';
  });

  criterion(7, "N(B) against V(B)", 600, [](Check& c) {
    std::vector<double> grid = {1e5, 1e6, 1e7};
    for (std::string id : {"E1", "E3"}) {
      const auto& m = model_by_id(id);
      std::vector<double> dev;
      for (double B : grid) {
        double N = static_cast<double>(enumerate_points(m, {R}, B));
        dev.push_back(std::fabs(N / volume_V(m, {R}, B) - 1));
      }
      c.require(dev[0] <= 0.05, id + " at 1e5 " + fmt(dev[0]));
      for (std::size_t i = 1; i < dev.size(); ++i) c.require(dev[i] < dev[i - 1], id + " not decreasing");
      c.note << id << ' ' << fmt(dev[0]) << ',' << fmt(dev[1]) << ',' << fmt(dev[2]) << "  ";
    }
  });

  criterion(8, "Poisson identity", 120, [](Check& c) {
    const auto& m = model_by_id("E1");
    std::vector<PoissonResult> res;
    for (int A : {10, 20, 50, 100}) res.push_back(poisson_crosscheck(m, 3.0, A));
    for (std::size_t i = 1; i < res.size(); ++i) {
      double slack = res[i].rhs_tail + res[i].lhs_tail;
      c.require(res[i].gap <= res[i - 1].gap + slack, "gap grows at A=" + std::to_string(res[i].A));
    }
    double rel = res.back().gap / std::fabs(res.back().lhs);
    c.require(rel < 1e-3, "relative gap " + fmt(rel));
    c.require(!res.back().flagged, "flagged");
    c.note << "gaps";
    for (auto& r : res) c.note << ' ' << fmt(r.gap);
    c.note << ", relative " << fmt(rel) << ' ';
  });

  criterion(9, "equidistribution", 600, [](Check& c) {
    std::vector<Region> quads;
    for (auto t : {"++", "+-", "-+", "--"}) quads.push_back(Region::parse(t));
    for (auto& row : equidistribution_test(model_by_id("E3"), {R}, 1e6, quads))
      c.require(std::fabs(row.empirical - 0.25) <= 0.01, "E3 " + row.region + " " + fmt(row.empirical));
    auto regions = quads;
    regions.push_back(Region::parse("abs_le"));
    double worst = 0, quads_total = 0;
    for (auto& row : equidistribution_test(model_by_id("E5"), {R}, 1e6, regions)) {
      double rel = std::fabs(row.empirical / row.predicted - 1);
      worst = std::max(worst, rel);
      if (row.region != "abs_le") quads_total += row.empirical;
      c.require(rel <= 0.02, "E5 " + row.region + " " + fmt(row.empirical) + " vs " + fmt(row.predicted));
    }
    // points on the axes carry mass ~ 1/log B and belong to no open quadrant
    c.note << "E5 worst relative deviation " << fmt(worst) << ", axis share " << fmt(1 - quads_total) << ' ';
  });

  criterion(10, "thread determinism", 1800, [&](Check& c) {
    for (unsigned th : {1u, 4u, 8u}) {
      EnumOptions opt;
      opt.threads = th;
      for (std::size_t i = 0; i < censuses.size(); ++i) {
        auto t = count_table(model_by_id(censuses[i].id), censuses[i].S, censuses[i].grid, opt);
        c.require(i < tables.size() && t.to_json() == tables[i].to_json(), censuses[i].id + " threads " +
                                                                                std::to_string(th));
      }
      for (auto& id : catalog_ids()) {
        const auto& m = model_by_id(id);
        auto a = euler_product(m, {R}, 2.5, 10000, 1), b = euler_product(m, {R}, 2.5, 10000, th);
        c.require(a.partial == b.partial && a.corrected == b.corrected, id + " euler product");
      }
    }
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
