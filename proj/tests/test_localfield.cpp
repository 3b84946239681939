#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "manin/errors.hpp"
#include "manin/localfield.hpp"

using namespace manin;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

// Independent Tate oracle on Q_p: classes mod p^M away from 0 plus the exact zero-class term.
cplx tate_oracle(const StepFunction& phi, double s, int M) {
  const std::uint64_t p = phi.prime();
  int k = std::max(phi.support(), 0);
  std::uint64_t N = ipow(p, static_cast<unsigned>(M + k));
  double pd = static_cast<double>(p);
  cplx acc = 0;
  for (std::uint64_t r = 1; r < N; ++r) {
    Rational x(Integer(static_cast<unsigned long>(r)), Integer(static_cast<unsigned long>(ipow(p, k))));
    x.canonicalize();
    double absx = padic_abs(x, p).get_d();
    acc += phi(x) * std::pow(absx, s - 1) * std::pow(pd, -M);
  }
  acc += phi.at_zero() * (1 - 1 / pd) * std::pow(pd, -M * s) / (1 - std::pow(pd, -s));
  return acc / (1 - 1 / pd);
}

}  // namespace

TEST_CASE("absolute values") {
  CHECK(abs_value(q(1, 2), Place::finite(2)) == 2.0);
  CHECK(abs_value(cplx(1, 1), Place::complex()) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(abs_value(q(-3), Place::real()) == 3.0);
  CHECK(abs_value(q(0), Place::finite(7)) == 0.0);
  CHECK(abs_exact(q(50, 3), 5) == q(1, 25));
  CHECK(abs_value(q(5, 2), Place::complex()) == 6.25);
}

TEST_CASE("place parsing") {
  CHECK(Place::parse("inf") == Place::real());
  CHECK(Place::parse("complex") == Place::complex());
  CHECK(Place::parse("5") == Place::finite(5));
  CHECK_THROWS_AS(Place::parse("6"), ConfigError);
  CHECK_THROWS_AS(Place::parse("x"), ConfigError);
  CHECK_THROWS_AS(Place::finite(1), ConfigError);
}

TEST_CASE("additive characters") {
  CHECK(std::abs(psi(Place::finite(2), q(1, 2)) - cplx(-1, 0)) < 1e-15);
  CHECK(std::abs(psi(Place::real(), q(1, 4)) - cplx(0, -1)) < 1e-15);
  for (long n : {0L, 1L, -7L, 35L}) CHECK(psi(Place::finite(5), q(n, 3)) == cplx(1, 0));
  CHECK(std::abs(psi(Place::complex(), q(1, 8)) - cplx(0, -1)) < 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long> num(-500, 500);
  std::uniform_int_distribution<int> ex(0, 5);
  for (std::uint64_t p : {2ull, 3ull, 7ull}) {
    Place v = Place::finite(p);
    for (int i = 0; i < 200; ++i) {
      Rational x = q(num(rng), static_cast<long>(ipow(p, ex(rng))) * (1 + (i % 3)));
      Rational y = q(num(rng), static_cast<long>(ipow(p, ex(rng))));
      CHECK(std::abs(psi(v, x + y) - psi(v, x) * psi(v, y)) < 1e-12);
      CHECK(std::abs(std::abs(psi(v, x)) - 1.0) < 1e-14);
    }
  }
  for (int i = 0; i < 200; ++i) {
    Rational x = q(num(rng), 1 + ex(rng)), y = q(num(rng), 7);
    CHECK(std::abs(psi(Place::real(), x + y) - psi(Place::real(), x) * psi(Place::real(), y)) < 1e-12);
  }
}

TEST_CASE("haar normalization") {
  CHECK(haar_ball(Place::real(), 1) == 2.0);
  CHECK(haar_ball(Place::complex(), 1) == doctest::Approx(2 * kPi));
  CHECK(haar_ball(Place::finite(3), 1) == 1.0);
  CHECK(haar_ball(Place::finite(3), 9) == 9.0);
  CHECK(haar_coset(3, 2) == q(1, 9));
  CHECK_THROWS_AS(haar_ball(Place::finite(3), 2), ConfigError);
}

TEST_CASE("local zeta and residues") {
  CHECK(zeta_local(Place::real(), 2.0) == cplx(1, 0));
  CHECK(zeta_local(Place::finite(2), 1.0) == cplx(2, 0));
  CHECK(zeta_local(Place::complex(), 2 * kPi) == cplx(1, 0));
  CHECK_THROWS_AS(zeta_local(Place::real(), 0.0), PoleError);
  CHECK_THROWS_AS(zeta_local(Place::finite(3), cplx(0, 2 * kPi / std::log(3.0))), PoleError);
  CHECK(residue_c(Place::real()) == 2.0);
  CHECK(residue_c(Place::finite(5)) == 1.0 / std::log(5.0));
}

TEST_CASE("product formula on random rationals") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> dist(1, 1'000'000);
  for (int i = 0; i < 1000; ++i) {
    Rational x = q(dist(rng) * (i % 2 ? -1 : 1), dist(rng));
    Rational prod = abs(x);
    for (auto p : support_primes(x)) prod *= padic_abs(x, p);
    CHECK(prod == 1);
  }
}

TEST_CASE("step function basics") {
  auto f = StepFunction::indicator_coset(2, q(1), 2);  // 1 + 4 Z_2
  CHECK(f(q(5)) == cplx(1));
  CHECK(f(q(3)) == cplx(0));
  CHECK(f(q(1, 3)) == cplx(0));  // 1/3 = 3 mod 4
  CHECK(f(q(-3)) == cplx(1));
  CHECK(f(q(1, 2)) == cplx(0));
  CHECK(f.minimal_level() == 2);
  auto g = StepFunction::indicator_zp(3).refine(3);
  CHECK(g.minimal_level() == 0);
  CHECK(g.canonical().modulus() == 1);
  auto round = StepFunction::from_json(f.to_json());
  CHECK(round.table() == f.table());
  auto w = f.with_support(1);
  CHECK(w(q(5)) == cplx(1));
  CHECK(w(q(1, 2)) == cplx(0));
  CHECK(w(q(9, 2)) == cplx(0));
}

TEST_CASE("bump function derivative bounds hold on a fine grid") {
  BumpFunction b(0.3, 0.7, 2.0, 3);
  for (int k = 0; k <= 3; ++k) {
    double m = 0;
    for (int i = 0; i <= 200000; ++i) m = std::max(m, std::fabs(b.derivative(-0.4 + 1.4 * i / 200000.0, k)));
    CHECK(m <= b.sup_bounds()[k]);
    CHECK(m >= 0.9 * b.sup_bounds()[k]);
  }
  // derivative against central differences
  for (double x : {0.0, 0.2, 0.5, 0.8}) {
    double h = 1e-5;
    CHECK(b.derivative(x, 1) == doctest::Approx((b(x + h) - b(x - h)) / (2 * h)).epsilon(1e-6));
  }
  CHECK(b(-0.5) == 0.0);
}

TEST_CASE("finite tate integrals") {
  for (double s : {0.5, 1.0, 2.0, 3.7}) {
    auto r = tate_integral(Place::finite(3), StepFunction::indicator_zp(3), s);
    CHECK(std::abs(r.value - 1.0 / (1 - std::pow(3.0, -s))) < 1e-14);
    auto u = tate_integral(Place::finite(5), StepFunction::indicator_units(5), s);
    CHECK(std::abs(u.value - 1.0) < 1e-14);
  }
  std::vector<cplx> t = {0.5, 1.0, cplx(0, 2), -1.0, 3.0, 0.0, 0.25, 1.0, 1.0};
  StepFunction phi(3, 1, 1, t);  // support 3^{-1} Z_3, level 1
  for (double s : {0.7, 1.5, 2.5}) {
    auto r = tate_integral(Place::finite(3), phi, s);
    CHECK(std::abs(r.value - tate_oracle(phi, s, 6)) < 1e-12);
    auto r2 = tate_integral(Place::finite(3), phi.refine(3), s);
    CHECK(std::abs(r.value - r2.value) < 1e-12);
  }
  CHECK_FALSE(tate_integral(Place::finite(3), phi, -0.5).converged);
}

TEST_CASE("archimedean residue law") {
  std::vector<BumpFunction> fns = {BumpFunction(0, 1, 1), BumpFunction(0.2, 1, 1), BumpFunction(-0.3, 0.8, 2),
                                   BumpFunction(0.1, 2, 0.5), BumpFunction(0, 0.5, 3)};
  for (auto& f : fns) {
    std::vector<double> h, v;
    for (double s : {0.02, 0.01, 0.005}) {
      auto r = tate_integral(Place::real(), f, s);
      h.push_back(s);
      v.push_back((r.value / zeta_local(Place::real(), s)).real());
    }
    CHECK(extrapolate_to_zero(h, v) == doctest::Approx(f(0.0)).epsilon(1e-4));
  }
  // complex place: radial bump, limit also Phi(0)
  BumpFunction c(0, 1, 1);
  std::vector<double> h, v;
  for (double s : {0.02, 0.01, 0.005}) {
    h.push_back(s);
    v.push_back((tate_integral(Place::complex(), c, s).value / zeta_local(Place::complex(), s)).real());
  }
  CHECK(extrapolate_to_zero(h, v) == doctest::Approx(c.at(0)).epsilon(1e-4));
}

TEST_CASE("real tate integral matches direct quadrature") {
  BumpFunction f(0.2, 1, 1);
  for (double s : {1.0, 2.5}) {
    auto g = [&](double x) { return f(x) * std::pow(std::fabs(x), s - 1); };
    double direct = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -0.8, 0.0, 15, 1e-13) +
                    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.2, 15, 1e-13);
    CHECK(std::abs(tate_integral(Place::real(), f, s).value - direct) < 1e-10);
  }
}

TEST_CASE("finite fourier transforms") {
  auto one = StepFunction::indicator_zp(7);
  auto hat = fourier_step(one);
  CHECK(hat.canonical().table() == one.table());
  auto f = StepFunction::indicator_coset(2, q(1), 1);  // 1 + 2 Z_2
  auto fh = fourier_step(f);
  for (long k = -3; k <= 8; ++k) {
    for (long den : {1L, 2L, 4L}) {
      Rational a = q(k, den);
      cplx expect = padic_abs(a, 2) <= 2 ? 0.5 * psi(Place::finite(2), a) : cplx(0);
      CHECK(std::abs(fh(a) - expect) < 1e-14);
    }
  }
  // inversion: hat(hat(f))(x) = f(-x)
  StepFunction g(3, 2, 1, std::vector<cplx>{1, 2, 0, cplx(0, 1), 0, 0, 5, 0, 0, 1, 0, 0, 0, 0, 0, 0, 3, 0,
                                          0, 0, 0, 0, 0, 0, 0, 0, 7});
  auto gg = fourier_step(fourier_step(g));
  for (long r = -20; r <= 20; ++r) {
    Rational x = q(r, 3);
    CHECK(std::abs(gg(x) - g(-x)) < 1e-12);
  }
}

TEST_CASE("real fourier transform matches adaptive quadrature") {
  BumpFunction f(0.25, 0.9, 1.5);
  for (int i = 0; i < 10; ++i) {
    double a = -3.0 + 1.37 * i;
    auto re = [&](double x) { return f(x) * std::cos(2 * kPi * a * x); };
    auto im = [&](double x) { return -f(x) * std::sin(2 * kPi * a * x); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    cplx direct(GK::integrate(re, f.lower(), f.upper(), 20, 1e-13), GK::integrate(im, f.lower(), f.upper(), 20, 1e-13));
    CHECK(std::abs(fourier_bump(Place::real(), f, a) - direct) < 1e-10);
  }
}
