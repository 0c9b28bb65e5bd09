#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mapflux/cli.hpp"
#include "mapflux/errors.hpp"
#include "mapflux/io.hpp"
#include "mapflux/models.hpp"

using namespace mapflux;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mapflux_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "mapflux");
  return cli::run(args);
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("MAP csv round trip is exact") {
  SimulationConfig c;
  c.dt = 1e-3;
  c.t_max = 0.3;
  c.master_seed = 1;
  const auto p = models::simulate_map_path(c, UnitVector::from_angle(0.4), 0);
  const fs::path f = scratch("csv") / "p.csv";
  io::write_map_csv(f, p);
  CHECK(slurp(f).rfind("t,xi,theta_0,theta_1\n", 0) == 0);
  const auto q = io::read_map_csv(f);
  CHECK(q.xi == p.xi);
  CHECK(q.theta == p.theta);
  for (std::size_t i = 0; i < p.grid.size(); ++i) CHECK(q.grid[i] == p.grid[i]);
}

TEST_CASE("ssMp csv and sidecar round trip") {
  SimulationConfig c;
  c.dt = 0.1;
  c.t_max = 1.0;
  const auto s = models::simulate_free_bessel_ssmp(c, {1.0, 2.0}, 3);
  const fs::path dir = scratch("ssmp");
  io::write_ssmp_csv(dir / "x.csv", s);
  CHECK(io::read_ssmp_csv(dir / "x.csv").x == s.x);

  io::Sidecar meta{"dunkl-a1", 2.0, 0.1, 1.0, 42, 7};
  io::write_sidecar(io::sidecar_path(dir / "x.csv"), meta);
  CHECK(io::sidecar_path(dir / "x.csv").filename() == "x.csv.json");
  const auto back = io::read_sidecar(dir / "x.csv.json");
  CHECK(back.model == "dunkl-a1");
  CHECK(back.seed == 42);
  CHECK(*back.kill_index == 7);
}

TEST_CASE("malformed csv is a validation error") {
  const fs::path f = scratch("bad") / "bad.csv";
  std::ofstream(f) << "t,xi,theta_0,theta_1\n0,0,1\n";
  CHECK_THROWS_AS(io::read_map_csv(f), ValidationError);
  CHECK_THROWS_AS(io::read_map_csv(f.parent_path() / "missing.csv"), ValidationError);
}

TEST_CASE("number formatting keeps full precision") {
  CHECK(io::format_double(0.0) == "0");
  CHECK(std::stod(io::format_double(0.1)) == 0.1);
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  CHECK(cli_run({}) == cli::kUsage);
  CHECK(cli_run({"simulate", "--bogus"}) == cli::kUsage);
  CHECK(cli_run({"frobnicate"}) == cli::kUsage);
  const auto d = scratch("usage");
  CHECK(cli_run({"simulate", "--dt", "-1", "--out", d.string()}) == cli::kUsage);
  CHECK(cli_run({"simulate", "--model", "nope", "--out", d.string()}) == cli::kUsage);
}

TEST_CASE("simulate writes paths, sidecars and a manifest") {
  const auto d = scratch("simulate");
  REQUIRE(cli_run({"simulate", "--model", "free-bessel", "--dt", "1e-3", "--t-max", "0.5",
                   "--paths", "3", "--seed", "7", "--out", d.string()}) == cli::kOk);
  CHECK(fs::exists(d / "paths/path_000002.csv"));
  CHECK(fs::exists(d / "paths/path_000002.csv.json"));
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m["subcommand"] == "simulate");
  CHECK(m["config"]["master_seed"] == 7);
  CHECK(m["config"]["n_paths"] == 3);
  CHECK(m["config"]["epsilon_zero"].get<double>() == doctest::Approx(10.0 * std::sqrt(1e-3)));
  CHECK(m["outputs"].size() == 6);
  CHECK(m["wall_rejections"]["per_path"].size() == 3);
}

TEST_CASE("flags override the config file") {
  const auto d = scratch("precedence");
  std::ofstream(d / "cfg.json") << R"({"model": "dunkl-a1", "k": 1.0, "dt": 0.01, "t_max": 0.2, "n_paths": 2, "master_seed": 5})";
  REQUIRE(cli_run({"simulate", "--config", (d / "cfg.json").string(), "--paths", "1", "--out",
                   (d / "run").string()}) == cli::kOk);
  const auto m = nlohmann::json::parse(slurp(d / "run/manifest.json"));
  CHECK(m["config"]["model"] == "dunkl-a1");
  CHECK(m["config"]["n_paths"] == 1);
  CHECK(m["config"]["dt"] == 0.01);

  std::ofstream(d / "bad.json") << R"({"not_a_key": 1})";
  CHECK(cli_run({"simulate", "--config", (d / "bad.json").string(), "--out", d.string()}) ==
        cli::kUsage);
}

TEST_CASE("rerunning from the manifest reproduces the outputs") {
  const auto d = scratch("rerun");
  REQUIRE(cli_run({"fluctuation", "--model", "free-bessel", "--dt", "1e-2", "--t-max", "20",
                   "--paths", "6", "--seed", "3", "--q", "0.5", "--out", (d / "a").string()}) ==
          cli::kOk);
  REQUIRE(cli_run({"fluctuation", "--config", (d / "a/manifest.json").string(), "--out",
                   (d / "b").string()}) == cli::kOk);
  for (const char* f : {"fluctuation_summary.csv", "fluctuation.json"}) {
    CHECK(slurp(d / "a" / f) == slurp(d / "b" / f));
  }
}

TEST_CASE("transform round trips a simulated path") {
  const auto d = scratch("transform");
  REQUIRE(cli_run({"simulate", "--dt", "1e-3", "--t-max", "1", "--seed", "2", "--out",
                   (d / "sim").string()}) == cli::kOk);
  REQUIRE(cli_run({"transform", "--input", (d / "sim/paths/path_000000.csv").string(),
                   "--direction", "map-to-ssmp", "--out", (d / "x").string()}) == cli::kOk);
  const auto x = io::read_ssmp_csv(d / "x/transformed.csv");
  CHECK(x.size() > 100);
  CHECK(cli_run({"transform", "--input", (d / "sim/paths/path_000000.csv").string(),
                 "--direction", "sideways", "--out", (d / "y").string()}) == cli::kUsage);
}

TEST_CASE("verification subcommands report through the exit code") {
  const auto d = scratch("verify");
  CHECK(cli_run({"oracle", "--horizon", "8", "--samples", "20000", "--out", (d / "o").string()}) ==
        cli::kOk);
  const auto o = nlohmann::json::parse(slurp(d / "o/oracle.json"));
  CHECK(o["pass"] == true);
  CHECK(cli_run({"oracle", "--horizon", "30", "--out", (d / "o2").string()}) == cli::kUsage);

  // The printed Bessel expression disagrees with the generator, so the check must fail.
  CHECK(cli_run({"verify-lyapunov", "--model", "free-bessel", "--points", "10", "--out",
                 (d / "l").string()}) == cli::kVerificationFailed);
  CHECK(fs::exists(d / "l/lyapunov.csv"));
  CHECK(fs::exists(d / "l/manifest.json"));
}

TEST_CASE("numerical failures exit 2") {
  const auto d = scratch("numerical");
  REQUIRE(cli_run({"simulate", "--dt", "1e-3", "--t-max", "1", "--out", (d / "sim").string()}) ==
          cli::kOk);
  // alpha = 5000 overflows the exponential time change.
  CHECK(cli_run({"transform", "--input", (d / "sim/paths/path_000000.csv").string(), "--alpha",
                 "5000", "--out", (d / "t").string()}) == cli::kNumerical);
}

}  // TEST_SUITE
