#include "manin/config.hpp"

#include <charconv>
#include <cmath>
#include <cctype>
#include <sstream>

#include "manin/boundary.hpp"
#include "manin/catalog.hpp"
#include "manin/errors.hpp"

namespace manin {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T x{};
  auto t = trim(v);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return x;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(trim(v), &used);
    if (used != trim(v).size() || !std::isfinite(x)) throw ConfigError("");
    return x;
  } catch (...) {
    throw ConfigError("bad value for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad value for " + key + ": '" + v + "'");
}

}  // namespace

cplx parse_complex(const std::string& text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  if (t.empty()) throw ConfigError("empty complex number");
  if (t.back() != 'i') return {parse_double("s", t), 0};
  t.pop_back();
  // split at the last sign that is not an exponent sign
  std::size_t cut = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;)
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      cut = k;
      break;
    }
  std::string re = cut == std::string::npos ? "0" : t.substr(0, cut);
  std::string im = cut == std::string::npos ? t : t.substr(cut);
  if (im.empty() || im == "+") im = "1";
  if (im == "-") im = "-1";
  return {parse_double("s", re), parse_double("s", im)};
}

std::string format_complex(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real();
  if (z.imag() != 0) os << (z.imag() > 0 ? "+" : "-") << std::fabs(z.imag()) << "i";
  return os.str();
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "command", "model",  "S",        "place",   "s",        "a",       "B",       "grid_lo", "grid_hi",
      "per_decade", "A",   "P",        "poisson_P", "d",      "phi",     "a_max_exp", "restrict", "regions",
      "smooth_k", "rel_tol", "node_cap", "input",  "threads", "seed",    "out"};
  return keys;
}

void set_key(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  std::string v = trim(raw);
  if (key == "command") c.command = v;
  else if (key == "model") c.model = v;
  else if (key == "S") {
    c.S.clear();
    for (auto& t : split(v, ',')) c.S.push_back(Place::parse(t));
  } else if (key == "place") c.place = v;
  else if (key == "s") {
    parse_complex(v);
    c.s = v;
  } else if (key == "a") c.a = v;
  else if (key == "B") {
    c.B.clear();
    for (auto& t : split(v, ',')) c.B.push_back(parse_double(key, t));
  } else if (key == "grid_lo") c.grid_lo = parse_double(key, v);
  else if (key == "grid_hi") c.grid_hi = parse_double(key, v);
  else if (key == "per_decade") c.per_decade = parse_number<int>(key, v);
  else if (key == "A") c.A = parse_number<int>(key, v);
  else if (key == "P") c.P = parse_number<std::uint64_t>(key, v);
  else if (key == "poisson_P") c.poisson_P = parse_number<std::uint64_t>(key, v);
  else if (key == "d") c.d = parse_number<int>(key, v);
  else if (key == "phi") c.phi = v;
  else if (key == "a_max_exp") c.a_max_exp = parse_number<int>(key, v);
  else if (key == "restrict") c.restrict_to_D = parse_bool(key, v);
  else if (key == "regions") c.regions = split(v, ',');
  else if (key == "smooth_k") c.smooth_k = parse_number<int>(key, v);
  else if (key == "rel_tol") c.rel_tol = parse_double(key, v);
  else if (key == "node_cap") c.node_cap = parse_number<std::uint64_t>(key, v);
  else if (key == "input") c.input = v;
  else if (key == "threads") c.threads = parse_number<unsigned>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "out") c.out = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

void apply_key_values(ExperimentConfig& c, const std::map<std::string, std::string>& kv) {
  for (auto& [k, v] : kv) set_key(c, k, v);
}

std::vector<double> ExperimentConfig::grid() const {
  if (!B.empty()) return B;
  std::vector<double> g;
  long steps = std::lround((grid_hi - grid_lo) * per_decade);
  for (long i = 0; i <= steps; ++i) g.push_back(std::pow(10.0, grid_lo + static_cast<double>(i) / per_decade));
  return g;
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> commands = {"zeta-local", "osc",     "clemens", "density", "theta",
                                                    "count",      "fit",     "poisson", "equi",    "model"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw ConfigError("unknown command '" + command + "'");
  model_by_id(model);
  validate_S(S);
  if (place != "global") Place::parse(place);
  if (per_decade < 1 || grid_hi < grid_lo) throw ConfigError("grid_lo..grid_hi must be a nonempty range");
  for (std::size_t i = 1; i < B.size(); ++i)
    if (!(B[i] > B[i - 1])) throw ConfigError("B grid must be increasing");
  if (A < 0) throw ConfigError("A must be nonnegative");
  if (P < 2 || poisson_P < 2) throw ConfigError("prime cutoffs must be at least 2");
  if (d < 1) throw ConfigError("d must be positive");
  if (phi != "auto" && phi != "indicator" && phi != "units" && phi != "bump")
    throw ConfigError("phi must be auto, indicator, units or bump");
  if (a_max_exp < 1 || a_max_exp > 12) throw ConfigError("a_max_exp must lie in 1..12");
  if (smooth_k < 0) throw ConfigError("smooth_k must be nonnegative");
  if (!(rel_tol > 0 && rel_tol < 1)) throw ConfigError("rel_tol must lie in (0,1)");
  if (threads < 1 || threads > 1024) throw ConfigError("threads must lie in 1..1024");
  if (regions.empty()) throw ConfigError("regions must be nonempty");
}

nlohmann::json ExperimentConfig::to_json() const {
  std::vector<std::string> Ss;
  for (auto& v : S) Ss.push_back(v.to_string());
  return {{"command", command},     {"model", model},       {"S", Ss},           {"place", place},
          {"s", s},                 {"a", a},               {"B", B},            {"grid_lo", grid_lo},
          {"grid_hi", grid_hi},     {"per_decade", per_decade}, {"A", A},       {"P", P},
          {"poisson_P", poisson_P}, {"d", d},               {"phi", phi},        {"a_max_exp", a_max_exp},
          {"restrict", restrict_to_D}, {"regions", regions}, {"smooth_k", smooth_k}, {"rel_tol", rel_tol},
          {"node_cap", node_cap},   {"input", input},       {"threads", threads}, {"seed", seed},
          {"out", out}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.command = j.at("command").get<std::string>();
  c.model = j.at("model").get<std::string>();
  c.S.clear();
  for (auto& v : j.at("S")) c.S.push_back(Place::parse(v.get<std::string>()));
  c.place = j.at("place").get<std::string>();
  c.s = j.at("s").get<std::string>();
  c.a = j.at("a").get<std::string>();
  c.B = j.at("B").get<std::vector<double>>();
  c.grid_lo = j.at("grid_lo").get<double>();
  c.grid_hi = j.at("grid_hi").get<double>();
  c.per_decade = j.at("per_decade").get<int>();
  c.A = j.at("A").get<int>();
  c.P = j.at("P").get<std::uint64_t>();
  c.poisson_P = j.at("poisson_P").get<std::uint64_t>();
  c.d = j.at("d").get<int>();
  c.phi = j.at("phi").get<std::string>();
  c.a_max_exp = j.at("a_max_exp").get<int>();
  c.restrict_to_D = j.at("restrict").get<bool>();
  c.regions = j.at("regions").get<std::vector<std::string>>();
  c.smooth_k = j.at("smooth_k").get<int>();
  c.rel_tol = j.at("rel_tol").get<double>();
  c.node_cap = j.at("node_cap").get<std::uint64_t>();
  c.input = j.at("input").get<std::string>();
  c.threads = j.value("threads", 1u);
  c.seed = j.at("seed").get<std::uint64_t>();
  c.out = j.value("out", std::string());
  return c;
}

}  // namespace manin
