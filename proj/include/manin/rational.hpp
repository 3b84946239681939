#pragma once

#include <gmpxx.h>

#include <climits>
#include <cstdint>
#include <string>
#include <vector>

namespace manin {

using Rational = mpq_class;
using Integer = mpz_class;

inline constexpr int kInfiniteValuation = INT_MAX;

bool is_prime(std::uint64_t n);
std::vector<std::uint64_t> primes_up_to(std::uint64_t n);

// v_p(x); kInfiniteValuation for x = 0.
int valuation(const Rational& x, std::uint64_t p);
int valuation(const Integer& x, std::uint64_t p);
int valuation(std::int64_t x, std::uint64_t p);

// |x|_p as an exact rational.
Rational padic_abs(const Rational& x, std::uint64_t p);

// p-power-denominator fractional part of x, an exact rational in [0,1).
Rational frac_p(const Rational& x, std::uint64_t p);

// Reduce the p-adic integer x modulo p^k (requires v_p(x) >= 0).
std::uint64_t residue_mod_pk(const Rational& x, std::uint64_t p, int k);

// Distinct primes dividing numerator or denominator.
std::vector<std::uint64_t> support_primes(const Rational& x);

Rational parse_rational(const std::string& text);
std::string to_string(const Rational& x);

// Small modular helpers (moduli below 2^63).
std::uint64_t ipow(std::uint64_t base, unsigned exp);
std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m);
std::uint64_t invmod(std::uint64_t a, std::uint64_t m);
std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b);

}  // namespace manin
