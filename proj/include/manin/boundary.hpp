#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "manin/localfield.hpp"
#include "manin/rational.hpp"

namespace manin {

class CompactificationModel;

using Point = std::vector<Rational>;

struct DivisorScheme {
  std::vector<std::string> labels;
  std::vector<int> rho;
  std::vector<bool> in_D;
  std::vector<int> residue_degree;  // f_alpha, 1 throughout the catalog

  std::size_t size() const { return labels.size(); }
  int lambda(std::size_t alpha) const { return rho[alpha] - (in_D[alpha] ? 1 : 0); }
  std::vector<int> lambdas() const;
  std::vector<int> D_indices() const;
  std::vector<int> off_D_indices() const;
  int index_of(const std::string& label) const;  // throws ConfigError
  void validate() const;

  nlohmann::json to_json() const;
  static DivisorScheme from_json(const nlohmann::json& j);
};

// Faces are sorted index lists; the empty face is implicit.
struct ClemensComplex {
  Place place = Place::real();
  std::vector<int> vertices;
  std::vector<std::vector<int>> maximal_faces;

  std::vector<std::vector<int>> faces() const;  // all nonempty faces
  bool has_face(const std::vector<int>& face) const;
  int dimension() const;  // -1 when empty
  bool downward_closed() const;

  // Vertices and faces are written 1-based.
  nlohmann::json to_json(const DivisorScheme& ds) const;
  static ClemensComplex from_json(const nlohmann::json& j);
};

struct CharacterStratum {
  std::string label;
  std::vector<int> d;  // d_alpha(a) on the stratum
  std::function<bool(const Point&)> contains;
};

ClemensComplex clemens_complex(const CompactificationModel& m, const Place& v, bool restrict_to_D);

int ep_rank(const CompactificationModel& m);

// S must contain the real place (ConfigError otherwise).
void validate_S(const std::vector<Place>& S);
int exponent_b(const CompactificationModel& m, const std::vector<Place>& S);

struct PoleOrders {
  int b0 = 0;
  int ba = 0;
};
// a = 0 gives b_a = b_0.
PoleOrders pole_orders(const CompactificationModel& m, const std::vector<Place>& S, const Point& a);
// Same, from a d-pattern directly.
PoleOrders pole_orders(const CompactificationModel& m, const std::vector<Place>& S, const std::vector<int>& d);

std::vector<int> divisor_coefficients(const CompactificationModel& m, const Point& a);

std::vector<CharacterStratum> character_strata(const CompactificationModel& m);

}  // namespace manin
