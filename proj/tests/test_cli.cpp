#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "manin/census.hpp"
#include "manin/cli.hpp"
#include "manin/errors.hpp"

using namespace manin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, log;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "manin");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, log;
  int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, log);
  return {code, out.str(), log.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("manin_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("command examples") {
  auto t = cli({"theta", "--model", "E4", "--S", "inf", "--threads", "1"});
  REQUIRE(t.code == 0);
  auto j = nlohmann::json::parse(t.out);
  CHECK(j["theta"].get<double>() == doctest::Approx(2.4317).epsilon(1e-4));
  CHECK(j["b"] == 2);

  auto c = cli({"count", "--model", "E1", "--S", "inf", "--B", "10"});
  REQUIRE(c.code == 0);
  CHECK(c.out == "B,N,V,N_over_BlogB,fit\n10,21,20,2.1,\n");

  auto k = cli({"clemens", "--model", "E5", "--place", "real"});
  REQUIRE(k.code == 0);
  CHECK(nlohmann::json::parse(k.out)["faces"] == nlohmann::json::parse("[[1],[2],[1,2]]"));

  auto d = cli({"model", "describe", "E4"});
  REQUIRE(d.code == 0);
  CHECK(nlohmann::json::parse(d.out)["id"] == "E4");
}

TEST_CASE("other commands run") {
  auto z = cli({"zeta-local", "--place", "3", "--s", "2"});
  REQUIRE(z.code == 0);
  CHECK(nlohmann::json::parse(z.out)["zeta"][0].get<double>() == doctest::Approx(1 / (1 - 1.0 / 9)));

  auto den = cli({"density", "--model", "E1", "--place", "inf", "--s", "3", "--a", "0"});
  REQUIRE(den.code == 0);
  auto dj = nlohmann::json::parse(den.out);
  CHECK(dj["value"][0].get<double>() == doctest::Approx(3.0));
  CHECK(dj.contains("tail_bound"));
  CHECK(dj["exactness"] == "quadrature");
  auto back = LocalDensity::from_json(dj);
  CHECK(back.value.real() == doctest::Approx(3.0));

  auto fin = cli({"density", "--model", "E4", "--place", "2", "--s", "1.5"});
  REQUIRE(fin.code == 0);
  CHECK(nlohmann::json::parse(fin.out)["exactness"] == "exact");

  auto osc = cli({"osc", "--place", "3", "--d", "2", "--s", "1", "--a_max_exp", "4", "--threads", "1"});
  REQUIRE(osc.code == 0);
  CHECK(nlohmann::json::parse(osc.out)["rows"].size() == 4);

  auto po = cli({"poisson", "--model", "E1", "--s", "3", "--A", "10", "--poisson_P", "1000"});
  REQUIRE(po.code == 0);
  CHECK(nlohmann::json::parse(po.out)["gap"].get<double>() < 0.05);

  auto eq = cli({"equi", "--model", "E3", "--B", "10000", "--regions", "++,abs_le"});
  REQUIRE(eq.code == 0);
  CHECK(nlohmann::json::parse(eq.out)["regions"][0]["count"] == 10000);

  auto fit = cli({"fit", "--model", "E3", "--grid_lo", "2", "--grid_hi", "6", "--threads", "1"});
  REQUIRE(fit.code == 0);
  CHECK(nlohmann::json::parse(fit.out)["fit"]["theta_hat"].get<double>() == doctest::Approx(4).epsilon(0.01));
}

TEST_CASE("exit codes") {
  CHECK(cli({"theta", "--model", "E9"}).code == kExitConfig);
  CHECK(cli({"count", "--S", "5"}).code == kExitConfig);
  CHECK(cli({"count", "--S", "inf,inf"}).code == kExitConfig);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"count", "--bogus", "1"}).code == kExitConfig);
  CHECK(cli({"count", "--B", "ten"}).code == kExitConfig);
  CHECK(cli({"density", "--model", "E3", "--a", "1,0"}).code == kExitConfig);  // unsupported
  CHECK(cli({"count", "--model", "E5", "--B", "1e6", "--node_cap", "10"}).code == kExitBudget);
  CHECK(cli({"density", "--model", "E1", "--s", "1"}).code == kExitNumeric);
  auto bad = cli({"count", "--model", "E9"});
  CHECK(bad.log.find("E9") != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
  auto dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "# census run\nmodel = E3\nB = 100, 400\nthreads = 2\n";
  auto a = cli({"count", "--config", (dir / "run.cfg").string()});
  REQUIRE(a.code == 0);
  CHECK(a.out.find("400,1681,") != std::string::npos);
  auto b = cli({"count", "--config", (dir / "run.cfg").string(), "--model", "E1"});
  REQUIRE(b.code == 0);
  CHECK(b.out.find("400,801,") != std::string::npos);
  std::ofstream(dir / "bad.cfg") << "model E3\n";
  CHECK(cli({"count", "--config", (dir / "bad.cfg").string()}).code == kExitConfig);
  CHECK(cli({"count", "--config", (dir / "missing.cfg").string()}).code == kExitConfig);
  fs::remove_all(dir);
}

TEST_CASE("outputs are identical across runs and thread counts") {
  auto d1 = scratch("t1"), d4 = scratch("t4");
  auto r1 = cli({"fit", "--model", "E5", "--grid_lo", "2", "--grid_hi", "5", "--threads", "1", "--out", d1.string()});
  auto r4 = cli({"fit", "--model", "E5", "--grid_lo", "2", "--grid_hi", "5", "--threads", "4", "--out", d4.string()});
  REQUIRE(r1.code == 0);
  REQUIRE(r4.code == 0);
  CHECK(r1.out == r4.out);
  for (auto name : {"fit.json", "fit.csv", "count.json", "config.json", "fit.txt"}) {
    CHECK(fs::exists(d1 / name));
    CHECK(slurp(d1 / name) == slurp(d4 / name));
  }
  // emitted JSON parses back into the originating types
  auto table = CountTable::from_json(nlohmann::json::parse(slurp(d1 / "count.json")));
  CHECK(table.model == "E5");
  CHECK(table.rows.size() == 7);
  auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(slurp(d1 / "config.json")));
  CHECK(cfg.command == "fit");
  CHECK(cfg.grid().size() == 7);

  // fitting a saved table reproduces the fit
  auto re = cli({"fit", "--input", (d1 / "count.json").string(), "--threads", "1"});
  REQUIRE(re.code == 0);
  CHECK(nlohmann::json::parse(re.out)["fit"] == nlohmann::json::parse(r1.out)["fit"]);
  fs::remove_all(d1);
  fs::remove_all(d4);
}

TEST_CASE("config parsing") {
  CHECK(parse_complex("2") == cplx(2, 0));
  CHECK(parse_complex("1.5+0.5i") == cplx(1.5, 0.5));
  CHECK(parse_complex("1e-1-2i") == cplx(0.1, -2));
  CHECK(parse_complex("-i") == cplx(0, -1));
  CHECK_THROWS_AS(parse_complex("x"), ConfigError);
  ExperimentConfig c;
  c.command = "count";
  set_key(c, "S", "inf, 5");
  CHECK(c.S.size() == 2);
  CHECK_THROWS_AS(set_key(c, "nope", "1"), ConfigError);
  auto back = ExperimentConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());
  c.B = {10, 5};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
