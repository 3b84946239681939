#include "manin/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "manin/boundary.hpp"
#include "manin/catalog.hpp"
#include "manin/census.hpp"
#include "manin/density.hpp"
#include "manin/errors.hpp"
#include "manin/oscillatory.hpp"

namespace manin {

namespace {

using json = nlohmann::json;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

CompactificationModel load_model(const ExperimentConfig& c) {
  const auto& m = model_by_id(c.model);
  return c.smooth_k > 0 ? m.with_metric({c.smooth_k}) : m;
}

Point parse_point(const std::string& text, int dim) {
  Point a;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) a.push_back(parse_rational(item));
  if (a.empty()) a.assign(dim, Rational(0));
  if (static_cast<int>(a.size()) != dim) throw ConfigError("a must have " + std::to_string(dim) + " coordinates");
  return a;
}

std::vector<std::string> place_names(const std::vector<Place>& S) {
  std::vector<std::string> out;
  for (auto& v : S) out.push_back(v.to_string());
  return out;
}

RunResult zeta_cmd(const ExperimentConfig& c) {
  Place v = Place::parse(c.place);
  cplx s = parse_complex(c.s);
  cplx z = zeta_local(v, s);
  json j = {{"place", v.to_string()}, {"s", {s.real(), s.imag()}}, {"zeta", {z.real(), z.imag()}},
            {"residue_c", residue_c(v)}};
  return {j.dump(2), "zeta_" + v.to_string() + "(" + format_complex(s) + ") = " + format_complex(z), {}};
}

RunResult osc_cmd(const ExperimentConfig& c) {
  Place v = Place::parse(c.place);
  cplx s = parse_complex(c.s);
  std::string phi = c.phi;
  if (phi == "auto") phi = v.is_finite() ? "indicator" : "bump";
  TestFunction f = BumpFunction();
  std::vector<Rational> grid;
  if (v.is_finite()) {
    if (phi == "indicator") f = StepFunction::indicator_zp(v.prime());
    else if (phi == "units") f = StepFunction::indicator_units(v.prime());
    else throw ConfigError("osc: a bump test function lives at the real place");
    for (int k = 1; k <= c.a_max_exp; ++k) grid.push_back(Rational(1) / Rational(ipow(v.prime(), k)));
  } else {
    if (phi != "bump") throw ConfigError("osc: the real place takes phi = bump");
    for (int k = 1; k <= c.a_max_exp; ++k) grid.push_back(Rational(ipow(10, k)));
  }
  OscOptions opt;
  opt.rel_tol = c.rel_tol;
  auto rep = decay_report(v, f, c.d, s, grid, c.threads, opt);
  if (rep.flagged) throw NumericFailure("osc: an integral missed its error target");
  std::string summary = "kappa = " + fmt(rep.kappa) + ", fitted exponent = " + fmt(rep.fitted_exponent) +
                        ", envelope ratio = " + fmt(rep.envelope_ratio);
  return {rep.to_json().dump(2), summary, {{"osc.csv", rep.to_csv()}}};
}

RunResult clemens_cmd(const ExperimentConfig& c) {
  auto m = load_model(c);
  Place v = Place::parse(c.place);
  auto cc = clemens_complex(m, v, c.restrict_to_D);
  json j = cc.to_json(m.divisors());
  j["model"] = m.id();
  return {j.dump(2), m.id() + " at " + v.to_string() + ": dimension " + std::to_string(cc.dimension()), {}};
}

RunResult density_cmd(const ExperimentConfig& c) {
  auto m = load_model(c);
  cplx s = parse_complex(c.s);
  json j;
  j["model"] = m.id();
  if (c.place == "global") {
    if (s.imag() != 0) throw ConfigError("density: the global value needs real s");
    double v = global_density(m, c.S, s.real(), c.P, c.threads);
    auto ep = euler_product(m, c.S, s.real(), c.P, c.threads);
    j["place"] = place_names(c.S);
    j["s"] = {s.real(), 0.0};
    j["value"] = {v, 0.0};
    j["exactness"] = "quadrature";
    j["tail_bound"] = ep.tail * std::fabs(v / ep.corrected);
    return {j.dump(2), "H(0; s lambda) = " + fmt(v), {}};
  }
  Place v = Place::parse(c.place);
  Point a = parse_point(c.a, m.dimension());
  if (v.is_finite()) {
    bool integral = std::find(c.S.begin(), c.S.end(), v) == c.S.end();
    cplx val = fourier_finite(m, v.prime(), a, s, integral);
    std::vector<std::string> as;
    for (auto& x : a) as.push_back(to_string(x));
    j["place"] = v.to_string();
    j["a"] = as;
    j["s"] = {s.real(), s.imag()};
    j["value"] = {val.real(), val.imag()};
    j["exactness"] = "exact";
    j["tail_bound"] = 0.0;
    return {j.dump(2), "H_" + v.to_string() + " = " + format_complex(val), {}};
  }
  auto d = arch_density(m, a, s);
  if (d.flagged) throw NumericFailure("density: quadrature missed its target");
  j.update(d.to_json());
  j["tail_bound"] = d.error;
  return {j.dump(2), "H_inf = " + format_complex(d.value), {}};
}

RunResult theta_cmd(const ExperimentConfig& c) {
  auto m = load_model(c);
  auto t = theta_constant(m, c.S, c.threads, c.P);
  json j = t.to_json();
  j["model"] = m.id();
  j["S"] = place_names(c.S);
  std::string summary = m.id() + ": theta = " + fmt(t.theta) + ", b = " + std::to_string(t.b);
  try {
    double tau = theta_from_tau(m, c.S, c.P);
    j["theta_tau"] = tau;
    summary += ", boundary-volume value " + fmt(tau);
  } catch (const Unsupported&) {
  }
  if (t.unstable) summary += " (extrapolation unstable)";
  return {j.dump(2), summary, {}};
}

EnumOptions enum_options(const ExperimentConfig& c) {
  EnumOptions o;
  o.threads = c.threads;
  o.node_cap = c.node_cap;
  return o;
}

RunResult count_cmd(const ExperimentConfig& c) {
  auto m = load_model(c);
  auto t = count_table(m, c.S, c.grid(), enum_options(c));
  std::string summary = m.id() + ": N(" + fmt(t.rows.back().B) + ") = " + std::to_string(t.rows.back().N);
  return {t.to_csv(), summary, {{"count.json", t.to_json().dump(2)}}};
}

RunResult fit_cmd(const ExperimentConfig& c) {
  CountTable t;
  if (!c.input.empty()) {
    std::ifstream in(c.input);
    if (!in) throw ConfigError("fit: cannot read " + c.input);
    try {
      t = CountTable::from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("fit: bad count table: ") + e.what());
    }
  } else {
    t = count_table(load_model(c), c.S, c.grid(), enum_options(c));
  }
  auto f = fit_asymptotic(t, t.b);
  json j = {{"model", t.model}, {"S", place_names(t.S)}, {"fit", f.to_json()}};
  std::string summary = t.model + ": theta_hat = " + fmt(f.theta_hat) + " +- " + fmt(f.half_width);
  try {
    auto th = theta_constant(model_by_id(t.model), t.S, c.threads, c.P);
    j["theta"] = th.theta;
    j["relative_error"] = std::fabs(f.theta_hat / th.theta - 1);
    summary += ", theta = " + fmt(th.theta);
  } catch (const Unsupported&) {
  }
  return {j.dump(2), summary, {{"fit.csv", t.to_csv(&f)}, {"count.json", t.to_json().dump(2)}}};
}

RunResult poisson_cmd(const ExperimentConfig& c) {
  auto m = load_model(c);
  cplx s = parse_complex(c.s);
  if (s.imag() != 0) throw ConfigError("poisson: s must be real");
  auto r = poisson_crosscheck(m, s.real(), c.A, c.poisson_P);
  if (r.flagged) throw NumericFailure("poisson: a transform missed its error target");
  std::string summary = "lhs = " + fmt(r.lhs) + ", rhs = " + fmt(r.rhs) + ", gap = " + fmt(r.gap) +
                        " (tail bounds " + fmt(r.lhs_tail) + ", " + fmt(r.rhs_tail) + ")";
  return {r.to_json().dump(2), summary, {}};
}

RunResult equi_cmd(const ExperimentConfig& c) {
  auto m = load_model(c);
  std::vector<Region> regs;
  for (auto& r : c.regions) regs.push_back(Region::parse(r));
  double B = c.grid().back();
  auto rows = equidistribution_test(m, c.S, B, regs, enum_options(c));
  std::string summary;
  for (auto& r : rows)
    summary += r.region + ": " + fmt(r.empirical) + " (predicted " + fmt(r.predicted) + ")\n";
  if (!summary.empty()) summary.pop_back();
  json j = {{"model", m.id()}, {"B", B}, {"regions", equi_to_json(rows)}};
  return {j.dump(2), summary, {}};
}

RunResult model_cmd(const ExperimentConfig& c) {
  auto j = describe(load_model(c));
  return {j.dump(2), c.model + ": " + model_by_id(c.model).description(), {}};
}

bool is_csv(const std::string& command) { return command == "count"; }

}  // namespace

RunResult execute(const ExperimentConfig& c) {
  c.validate();
  if (c.command == "zeta-local") return zeta_cmd(c);
  if (c.command == "osc") return osc_cmd(c);
  if (c.command == "clemens") return clemens_cmd(c);
  if (c.command == "density") return density_cmd(c);
  if (c.command == "theta") return theta_cmd(c);
  if (c.command == "count") return count_cmd(c);
  if (c.command == "fit") return fit_cmd(c);
  if (c.command == "poisson") return poisson_cmd(c);
  if (c.command == "equi") return equi_cmd(c);
  return model_cmd(c);
}

int run(const ExperimentConfig& c, std::ostream& out, std::ostream& log) {
  try {
    RunResult r = execute(c);
    out << r.primary;
    if (r.primary.empty() || r.primary.back() != '\n') out << '\n';
    log << r.summary << '\n';
    if (!c.out.empty()) {
      namespace fs = std::filesystem;
      fs::create_directories(c.out);
      auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream f(fs::path(c.out) / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (fs::path(c.out) / name).string());
        f << text;
      };
      write(c.command + (is_csv(c.command) ? ".csv" : ".json"), r.primary);
      write(c.command + ".txt", r.summary + "\n");
      for (auto& a : r.files) write(a.name, a.content);
      // the thread count and output path do not change results
      auto cfg = c.to_json();
      cfg.erase("threads");
      cfg.erase("out");
      write("config.json", cfg.dump(2));
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Unsupported& e) {
    log << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetExceeded& e) {
    log << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const NumericFailure& e) {
    log << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const PoleError& e) {
    log << "pole: " << e.what() << '\n';
    return kExitNumeric;
  }
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
  CLI::App app{"Heights, local densities and point counts on equivariant compactifications of G_a^n"};
  std::vector<std::string> positional;
  std::string config_file;
  std::map<std::string, std::string> flags;
  app.add_option("command", positional,
                 "zeta-local | osc | clemens | density | theta | count | fit | poisson | equi | model describe ID")
      ->required();
  app.add_option("--config", config_file, "flat key = value file; flags override it");
  for (auto& key : config_keys()) {
    if (key == "command") continue;
    app.add_option_function<std::string>("--" + key, [&flags, key](const std::string& v) { flags[key] = v; },
                                         "config key " + key);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  ExperimentConfig c;
  c.threads = std::max(1u, std::thread::hardware_concurrency());
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("cannot read config file " + config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      apply_key_values(c, parse_key_values(ss.str()));
    }
    c.command = positional[0];
    std::size_t used = 1;
    if (c.command == "model") {
      if (positional.size() < 2 || positional[1] != "describe") throw ConfigError("usage: model describe ID");
      if (positional.size() >= 3) c.model = positional[2];
      used = std::min<std::size_t>(positional.size(), 3);
    }
    if (positional.size() > used) throw ConfigError("unexpected argument '" + positional[used] + "'");
    apply_key_values(c, flags);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return run(c, out, log);
}

}  // namespace manin
