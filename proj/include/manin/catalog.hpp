#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "manin/boundary.hpp"
#include "manin/localfield.hpp"
#include "manin/rational.hpp"

namespace manin {

// Archimedean metric: k = 0 is the max-metric 1/max(1,|x_i|); k >= 1 is the smoothed
// norm (1 + sum |x_i|^{2k})^{-1/2k}. Finite places always use the max-metric.
struct MetricOptions {
  int smooth_k = 0;
};

// Product of projective spaces P^{n_1} x ... x P^{n_r} containing G_a^n, with boundary the
// hyperplanes at infinity. Component alpha owns the coordinate group groups[alpha].
class CompactificationModel {
 public:
  CompactificationModel(std::string id, std::string description, std::vector<std::vector<int>> groups,
                        std::vector<bool> in_D, std::vector<std::string> labels);

  const std::string& id() const { return id_; }
  const std::string& description() const { return description_; }
  int dimension() const { return dim_; }
  const DivisorScheme& divisors() const { return ds_; }
  const std::vector<std::vector<int>>& groups() const { return groups_; }
  const MetricOptions& metric() const { return metric_; }
  CompactificationModel with_metric(MetricOptions m) const;

  // ||f_alpha||_p(x), exact.
  Rational norm_finite(std::size_t alpha, std::uint64_t p, const Point& x) const;
  // ||f_alpha||_v(x) at any place; real coordinates for the archimedean evaluation.
  double norm(const Place& v, std::size_t alpha, const Point& x) const;
  double norm_real(std::size_t alpha, const std::vector<double>& x) const;

  // Faces A (sorted) with D_A(F_v) nonempty; every subset qualifies for these models.
  bool incidence(const Place& v, const std::vector<int>& A) const;
  bool good_reduction(std::uint64_t p) const;

 private:
  std::string id_, description_;
  int dim_;
  DivisorScheme ds_;
  std::vector<std::vector<int>> groups_;
  MetricOptions metric_;
};

std::vector<std::string> catalog_ids();
const CompactificationModel& model_by_id(const std::string& id);  // ConfigError if unknown

// ||f_alpha||_v(x).
double local_height(const CompactificationModel& m, const Place& v, std::size_t alpha, const Point& x);
Rational local_height_exact(const CompactificationModel& m, std::uint64_t p, std::size_t alpha, const Point& x);

// Primes where some coordinate has a denominator; all other finite factors are 1.
std::vector<std::uint64_t> height_primes(const Point& x);

// H(x; lambda) restricted to the given places.
double height_over(const CompactificationModel& m, const Point& x, const std::vector<Place>& places);
// H(x; s lambda) = prod_alpha prod_v ||f_alpha||_v^{-s lambda_alpha} over all places.
cplx height(const CompactificationModel& m, const Point& x, cplx s);
// Finite part of H(x; lambda), exact.
Rational height_finite(const CompactificationModel& m, const Point& x);

// delta_p(x): ||f_alpha||_p(x) = 1 for all alpha in A_D.
bool is_integral(const CompactificationModel& m, std::uint64_t p, const Point& x);

// #D_A^o(F_q) for a prime power q.
std::uint64_t stratum_count(const CompactificationModel& m, std::uint64_t q, const std::vector<int>& A);
// #X(F_q).
std::uint64_t total_count(const CompactificationModel& m, std::uint64_t q);

nlohmann::json describe(const CompactificationModel& m);

}  // namespace manin
