#include <cmath>

#include "doctest.h"
#include "manin/density.hpp"
#include "manin/errors.hpp"

using namespace manin;

namespace {

const Place R = Place::real();

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

// int_{|x| <= p^k} psi_p(a x) dx from residue classes, psi evaluated directly
cplx ball_by_residues(std::uint64_t p, const Rational& a, int k) {
  int M = std::max(k, k - valuation(a, p)) + 1;
  std::uint64_t n = ipow(p, M);
  cplx sum = 0;
  for (std::uint64_t r = 0; r < n; ++r) sum += psi(Place::finite(p), a * Rational(r) / Rational(ipow(p, k)));
  return std::pow(double(p), k) * sum / double(n);
}

// E2-type factor: int_{Q_p} max(1,|x|)^{-sigma} psi(a x) dx by shells
cplx shell_sum(std::uint64_t p, const Rational& a, double sigma, int K) {
  cplx total = ball_by_residues(p, a, 0);
  for (int k = 1; k <= K; ++k)
    total += std::pow(double(p), -sigma * k) * (ball_by_residues(p, a, k) - ball_by_residues(p, a, k - 1));
  return total;
}

// 2 int_1^inf x^{-3} cos(2 pi x) dx by composite Simpson plus a bounded tail
double line_oracle() {
  double X = 1000, h = 1.0 / 256;
  long n = static_cast<long>((X - 1) / h);
  auto f = [](double x) { return std::cos(2 * kPi * x) / (x * x * x); };
  double s = f(1) + f(X);
  for (long i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(1 + i * h);
  return 2 * s * h / 3;
}

}  // namespace

TEST_CASE("denef density closed forms") {
  const auto& e4 = model_by_id("E4");
  for (std::uint64_t p : {2, 3, 5, 7})
    for (double s0 : {1.2, 1.7, 3.0}) {
      auto val = denef_density(e4, p, along_lambda(e4, s0));
      double expect = (1 - std::pow(p, -2 * s0)) / (1 - std::pow(p, 1 - 2 * s0));
      CHECK(std::abs(val - expect) < 1e-13);
    }
  // integral points of A^1: the local factor is the volume of Z_p
  for (std::uint64_t p : {2, 3, 5})
    CHECK(std::abs(denef_density(model_by_id("E1"), p, along_lambda(model_by_id("E1"), 1.5)) - 1.0) < 1e-15);
  // without the integrality condition: 1 + (1-1/p)/(p^{s-1}-1)
  double p = 3, s = 2.5;
  auto v = denef_density(model_by_id("E1"), 3, {s}, false);
  CHECK(std::abs(v - (1 + (1 - 1 / p) / (std::pow(p, s - 1) - 1))) < 1e-14);
  CHECK_THROWS_AS(denef_density(model_by_id("E1"), 3, {1.0}, false), PoleError);
}

TEST_CASE("denef density agrees with residue-class oracle") {
  for (auto& id : catalog_ids()) {
    const auto& m = model_by_id(id);
    for (std::uint64_t p : {2, 3})
      for (cplx s : {cplx(1.3, 0), cplx(2.0, 1.5)})
        for (bool integral : {true, false}) {
          auto sa = along_lambda(m, s);
          CHECK(std::abs(denef_density(m, p, sa, integral) - brute_density_oracle(m, p, sa, 2, integral)) < 1e-12);
        }
  }
}

TEST_CASE("real density at the trivial character") {
  for (double s : {1.5, 2.0, 4.0}) {
    auto g = [](double t) { return 2 + 2 / (t - 1); };
    CHECK(arch_density(model_by_id("E1"), {q(0)}, s).value.real() == doctest::Approx(g(s)).epsilon(1e-9));
    CHECK(arch_density(model_by_id("E3"), {q(0), q(0)}, s).value.real() ==
          doctest::Approx(4 + 4 / (s - 1)).epsilon(1e-9));
    CHECK(arch_density(model_by_id("E4"), {q(0), q(0)}, s).value.real() ==
          doctest::Approx(g(2 * s) * g(s)).epsilon(1e-9));
    CHECK(arch_density(model_by_id("E5"), {q(0), q(0)}, s).value.real() == doctest::Approx(g(s) * g(s)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(arch_density(model_by_id("E1"), {q(0)}, 1.0), PoleError);
  CHECK_THROWS_AS(arch_density(model_by_id("E3"), {q(1), q(0)}, 2.0), Unsupported);
}

TEST_CASE("line transform") {
  auto lt = line_transform({}, 1.0, 3.0);
  CHECK(lt.ok);
  CHECK(std::abs(lt.value.imag()) < 1e-12);
  CHECK(lt.value.real() == doctest::Approx(line_oracle()).epsilon(1e-8));
  // E5 at a = (1, 0) factors as line transform times the trivial factor
  auto d = arch_density(model_by_id("E5"), {q(1), q(0)}, 3.0);
  CHECK(std::abs(d.value - lt.value * (2 + 2 / 2.0)) < 1e-9);
  // even in a
  auto m = line_transform({}, -1.0, 3.0);
  CHECK(std::abs(m.value - lt.value) < 1e-12);
}

TEST_CASE("finite fourier transform") {
  const auto& e2 = model_by_id("E2");
  double s = 1.3;
  for (std::uint64_t p : {2, 3, 5})
    for (Rational a : {q(1), q(long(p)), q(long(p * p) * 2), q(7)}) {
      cplx got = fourier_finite(e2, p, {a}, s);
      cplx want = shell_sum(p, a, 2 * s, 6);
      CHECK(std::abs(got - want) < 1e-12);
    }
  // outside Z_p the transform vanishes
  CHECK(std::abs(fourier_finite(e2, 3, {q(1, 3)}, s)) < 1e-15);
  CHECK(std::abs(fourier_finite(model_by_id("E1"), 5, {q(2, 5)}, s)) < 1e-15);
  CHECK(std::abs(fourier_finite(model_by_id("E1"), 5, {q(2, 3)}, s) - 1.0) < 1e-15);

  // E4 splits into an E2-type factor and the indicator of Z_p
  const auto& e4 = model_by_id("E4");
  for (Rational ay : {q(0), q(4), q(1, 2)}) {
    cplx got = fourier_finite(e4, 2, {q(6), ay}, s);
    cplx want = fourier_finite(e2, 2, {q(6)}, s) * (valuation(ay, 2) >= 0 || ay == 0 ? 1.0 : 0.0);
    CHECK(std::abs(got - want) < 1e-14);
  }
  // a = 0 reproduces the Denef value
  for (auto& id : catalog_ids()) {
    const auto& m = model_by_id(id);
    Point zero(m.dimension(), q(0));
    CHECK(std::abs(fourier_finite(m, 3, zero, 1.6) - denef_density(m, 3, along_lambda(m, 1.6))) < 1e-13);
  }
}

TEST_CASE("character defect is summable") {
  const auto& e4 = model_by_id("E4");
  auto C = [&](std::uint64_t P) {
    double c = 0;
    for (auto p : primes_up_to(P)) c += character_defect(e4, p, {q(0), q(1)}, 1.0);
    return c;
  };
  CHECK(C(100) <= 2 * C(10));
  CHECK(C(1000) <= 2 * C(10));
  for (auto p : primes_up_to(50)) CHECK(character_defect(e4, p, {q(0), q(1)}, 1.0) == doctest::Approx(1.0 / (p * p)));
}

TEST_CASE("euler product tail") {
  const auto& e2 = model_by_id("E2");
  auto a = euler_product(e2, {R}, 1.5, 10000);
  auto b = euler_product(e2, {R}, 1.5, 40000);
  CHECK(a.tail > 0);
  CHECK(std::fabs(a.corrected - b.corrected) <= 2 * a.tail + 1e-14);
  // H(0; 3/2 lambda) off S for E2 is zeta(2)/zeta(3)
  CHECK(a.corrected == doctest::Approx(1.6449340668482264 / 1.2020569031595942).epsilon(1e-6));
  // threads do not change the product
  auto c = euler_product(e2, {R}, 1.5, 10000, 4);
  CHECK(c.corrected == a.corrected);
}

TEST_CASE("theta constants") {
  struct Case {
    const char* id;
    std::vector<Place> S;
    double expect;
    double tol;
  };
  std::vector<Case> cases = {
      {"E1", {R}, 2.0, 1e-6},
      {"E3", {R}, 4.0, 1e-6},
      {"E5", {R}, 4.0, 1e-4},
      {"E2", {R}, 12 / (kPi * kPi), 1e-4},
      {"E4", {R}, 24 / (kPi * kPi), 1e-4},
      {"E1", {R, Place::finite(5)}, 1.6 / std::log(5.0), 1e-4},
  };
  for (auto& c : cases) {
    const auto& m = model_by_id(c.id);
    auto t = theta_constant(m, c.S);
    CHECK(t.theta > 0);
    CHECK(t.theta == doctest::Approx(c.expect).epsilon(c.tol));
    CHECK(t.b == exponent_b(m, c.S));
    CHECK_FALSE(t.unstable);
    CHECK(theta_from_tau(m, c.S) == doctest::Approx(t.theta).epsilon(0.01));
  }
}

TEST_CASE("tau at a finite place") {
  // E1 at p: one vertex with lambda 1, residue 1/log p weighted by p^{-1}(p-1)
  double p = 5;
  double expect = (p - 1) / p / std::log(p);
  CHECK(tau_max_boundary(model_by_id("E1"), Place::finite(5)) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("local density json round trip") {
  auto d = arch_density(model_by_id("E5"), {q(2), q(0)}, cplx(2.5, 0.5));
  auto back = LocalDensity::from_json(d.to_json());
  CHECK(std::abs(back.value - d.value) < 1e-15);
  CHECK(back.a == d.a);
  CHECK(back.s == d.s);
  CHECK(back.place == d.place);
}
