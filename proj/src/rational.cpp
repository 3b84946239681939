#include "manin/rational.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "manin/errors.hpp"

namespace manin {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  Integer z;
  mpz_import(z.get_mpz_t(), 1, 1, sizeof(n), 0, 0, &n);
  return mpz_probab_prime_p(z.get_mpz_t(), 40) > 0;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t n) {
  std::vector<bool> composite(n + 1, false);
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 2; i <= n; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
  }
  return out;
}

int valuation(const Integer& x, std::uint64_t p) {
  if (x == 0) return kInfiniteValuation;
  Integer rest;
  Integer pz(static_cast<unsigned long>(p));
  return static_cast<int>(mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), pz.get_mpz_t()));
}

int valuation(const Rational& x, std::uint64_t p) {
  if (x == 0) return kInfiniteValuation;
  return valuation(Integer(x.get_num()), p) - valuation(Integer(x.get_den()), p);
}

int valuation(std::int64_t x, std::uint64_t p) {
  if (x == 0) return kInfiniteValuation;
  std::uint64_t u = x < 0 ? static_cast<std::uint64_t>(-(x + 1)) + 1 : static_cast<std::uint64_t>(x);
  int v = 0;
  while (u % p == 0) {
    u /= p;
    ++v;
  }
  return v;
}

Rational padic_abs(const Rational& x, std::uint64_t p) {
  if (x == 0) return 0;
  int v = valuation(x, p);
  Integer pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, static_cast<unsigned long>(v < 0 ? -v : v));
  return v <= 0 ? Rational(pk) : Rational(Integer(1), pk);
}

Rational frac_p(const Rational& x, std::uint64_t p) {
  if (x == 0) return 0;
  Integer den = x.get_den();
  Integer rest;
  Integer pz(static_cast<unsigned long>(p));
  auto k = mpz_remove(rest.get_mpz_t(), den.get_mpz_t(), pz.get_mpz_t());
  if (k == 0) return 0;
  Integer pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, k);
  // x = u / (p^k w); frac = (u w^{-1} mod p^k) / p^k
  Integer winv;
  mpz_invert(winv.get_mpz_t(), rest.get_mpz_t(), pk.get_mpz_t());
  Integer r = Integer(x.get_num()) * winv;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), pk.get_mpz_t());
  Rational out(r, pk);
  out.canonicalize();
  return out;
}

std::uint64_t residue_mod_pk(const Rational& x, std::uint64_t p, int k) {
  if (k <= 0 || x == 0) return 0;
  if (valuation(x, p) < 0) throw std::invalid_argument("residue_mod_pk: not a p-adic integer");
  Integer pk;
  mpz_ui_pow_ui(pk.get_mpz_t(), p, static_cast<unsigned long>(k));
  Integer dinv;
  Integer den = x.get_den();
  mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), pk.get_mpz_t());
  Integer r = Integer(x.get_num()) * dinv;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), pk.get_mpz_t());
  return r.get_ui();
}

std::vector<std::uint64_t> support_primes(const Rational& x) {
  std::vector<std::uint64_t> out;
  for (Integer n : {Integer(abs(x.get_num())), Integer(x.get_den())}) {
    for (std::uint64_t q = 2; n > 1; ++q) {
      if (Integer(static_cast<unsigned long>(q)) * q > n) {
        out.push_back(n.get_ui());
        break;
      }
      if (mpz_divisible_ui_p(n.get_mpz_t(), q)) {
        out.push_back(q);
        while (mpz_divisible_ui_p(n.get_mpz_t(), q)) n /= static_cast<unsigned long>(q);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Rational parse_rational(const std::string& text) {
  Rational q;
  if (q.set_str(text, 10) != 0 || q.get_den() == 0) throw ConfigError("not a rational number: " + text);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& x) { return x.get_str(); }

std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  while (exp--) {
    if (r > UINT64_MAX / base) throw std::overflow_error("ipow overflow");
    r *= base;
  }
  return r;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::uint64_t invmod(std::uint64_t a, std::uint64_t m) {
  __int128 t = 0, nt = 1, r = m, nr = a % m;
  while (nr != 0) {
    __int128 q = r / nr;
    __int128 tmp = t - q * nt;
    t = nt;
    nt = tmp;
    tmp = r - q * nr;
    r = nr;
    nr = tmp;
  }
  if (r != 1) throw std::invalid_argument("invmod: not invertible");
  if (t < 0) t += m;
  return static_cast<std::uint64_t>(t);
}

}  // namespace manin
