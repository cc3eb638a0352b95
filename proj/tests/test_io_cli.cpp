#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "roughstep/cli.hpp"
#include "roughstep/drivers.hpp"
#include "roughstep/io.hpp"

using namespace roughstep;
using io::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("roughstep_io_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROUGHSTEP_CLI) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t file_count(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  return static_cast<std::size_t>(std::distance(fs::directory_iterator(dir), fs::directory_iterator()));
}

json gbm_convergence_config() {
  return json{{"seed", 42},
              {"driver", {{"type", "brownian"}, {"levels", 12}}},
              {"scheme", {{"kind", "corrected"}, {"y0", {1.0}}}},
              {"analysis", {{"oracle", "gbm_ito"}}}};
}

}  // namespace

TEST_CASE("content hash matches git blob ids") {
  CHECK(io::content_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(io::content_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("non-finite numbers serialise as strings") {
  CHECK(io::number(1.5) == json(1.5));
  CHECK(io::number(INFINITY) == json("inf"));
  CHECK(io::number(-INFINITY) == json("-inf"));
  CHECK(io::number(NAN) == json("nan"));
  CHECK(std::isinf(io::number_from_json(json("inf"))));
  CHECK(std::isnan(io::number_from_json(json("nan"))));
  CHECK(io::number_from_json(json(2.25)) == 2.25);
  CHECK(io::dump(json{{"b", 1}, {"a", 2}}) == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}

TEST_CASE("path json round trip is bitwise") {
  BrownianConfig cfg;
  cfg.d = 2;
  cfg.levels = 6;
  cfg.seed = 42;
  const DriverPath x = brownian_path(cfg);
  const AreaProcess a = stratonovich_area(ito_area(x, cfg));
  const json j = json::parse(io::dump(io::path_to_json(x, &a, 42)));
  const io::LoadedPath back = io::path_from_json(j);
  REQUIRE(back.area.has_value());
  CHECK(back.seed == 42u);
  CHECK(back.area->kind() == AreaKind::Stratonovich);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(back.path.grid()[k] == x.grid()[k]);
    CHECK((back.path[k].array() == x[k].array()).all());
  }
  for (std::size_t k = 0; k < a.intervals(); ++k) CHECK((back.area->fine(k).array() == a.fine(k).array()).all());
  const io::LoadedPath bare = io::path_from_json(io::path_to_json(x));
  CHECK_FALSE(bare.area.has_value());
  CHECK_FALSE(bare.seed.has_value());
  json broken = j;
  broken.erase("times");
  CHECK_THROWS_AS(io::path_from_json(broken), ContractError);
}

TEST_CASE("trajectory csv layout") {
  const Trajectory t{Partition({0.0, 0.5, 1.0}), {Vec::Constant(2, 1.0), Vec::Constant(2, 0.1)}, std::size_t{1},
                     SchemeKind::Euler};
  CHECK(io::trajectory_csv(t) == "t,y_1,y_2\n0,1,1\n0.5,0.10000000000000001,0.10000000000000001\n");
}

TEST_CASE("matrix json round trip") {
  Mat m(2, 3);
  m << 1, 2, 3, 4, 5, 6.125;
  CHECK(io::mat_to_json(m) == json::parse("[[1,2,3],[4,5,6.125]]"));
  CHECK(io::mat_from_json(io::mat_to_json(m)) == m);
  CHECK_THROWS(io::mat_from_json(json::parse("[[1,2],[3]]")));
}

TEST_CASE("execute: solve with a zero field gives constant rows") {
  const json cfg{{"driver", {{"type", "polynomial"}, {"coeffs", {{0.0, 1.0}, {0.0, 0.0, 1.0}}}, {"steps", 16}}},
                 {"scheme", {{"field", {{"type", "zero"}, {"n", 2}}}, {"y0", {0.25, -3.0}}}},
                 {"analysis", {{"defect_window", 4}, {"gamma", 1.5}}}};
  const cli::Artifacts out = cli::execute("solve", cfg);
  REQUIRE(out.count("trajectory.csv"));
  REQUIRE(out.count("defect.json"));
  REQUIRE(out.count("manifest.json"));
  std::istringstream csv(out.at("trajectory.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "t,y_1,y_2");
  int rows = 0;
  while (std::getline(csv, line)) {
    CHECK(line.substr(line.find(',')) == ",0.25,-3");
    ++rows;
  }
  CHECK(rows == 17);
  const json defect = json::parse(out.at("defect.json"));
  CHECK(defect.at("fitted_M") == 0.0);
  const json manifest = json::parse(out.at("manifest.json"));
  CHECK(manifest.at("command") == "solve");
  CHECK(manifest.at("config").at("scheme").at("kind") == "euler");
  CHECK(manifest.at("config").at("scheme").at("threshold") == 1e6);
  CHECK(manifest.at("artifacts").at("trajectory.csv") == io::content_hash(out.at("trajectory.csv")));
  CHECK(defect.at("input_hash") == manifest.at("input_hash"));
}

TEST_CASE("execute: convergence report for GBM") {
  const cli::Artifacts out = cli::execute("convergence", gbm_convergence_config());
  const json rate = json::parse(out.at("rate.json"));
  CHECK(rate.at("slope").is_number());
  CHECK(rate.at("slope").get<double>() < -0.5);
  CHECK(rate.at("K").size() == 9);
  CHECK(rate.at("dropped") == 2);
  CHECK(rate.at("seed") == 42);
}

TEST_CASE("execute: config validation") {
  json cfg = gbm_convergence_config();
  cfg["driver"]["colour"] = "blue";
  CHECK_THROWS_AS(cli::execute("convergence", cfg), ContractError);
  cfg = gbm_convergence_config();
  cfg.erase("seed");
  CHECK_THROWS_AS(cli::execute("convergence", cfg), ContractError);
  CHECK_NOTHROW(cli::execute("chen-check", json{{"driver", {{"type", "brownian"}, {"levels", 6}}}}, 7));
  cfg = gbm_convergence_config();
  cfg["scheme"]["field"] = json{{"type", "zero"}, {"n", 1}};
  CHECK_THROWS_AS(cli::execute("convergence", cfg), ContractError);
  CHECK_THROWS_AS(cli::execute("fly", json::object()), ContractError);
  CHECK_THROWS_AS(cli::execute("curve", json{{"driver", {{"alpha", 0.7}, {"depth", 3}}}}), ContractError);
  CHECK_NOTHROW(cli::execute("curve", json{{"driver", {{"alpha", 0.7}, {"depth", 3}}}, {"analysis", {{"pairs", 0}}}}));
}

TEST_CASE("execute: seed override replaces the config seed") {
  const json cfg{{"seed", 1}, {"driver", {{"type", "brownian"}, {"levels", 6}}}};
  const auto a = cli::execute("chen-check", cfg, 5);
  const auto b = cli::execute("chen-check", json{{"seed", 5}, {"driver", {{"type", "brownian"}, {"levels", 6}}}});
  CHECK(a == b);
  CHECK(json::parse(a.at("manifest.json")).at("seed") == 5);
}

TEST_CASE("execute: explosion report") {
  const cli::Artifacts out = cli::execute("explosion", json{{"driver", json::object()}});
  const json rep = json::parse(out.at("explosion.json"));
  CHECK(rep.at("exploded") == true);
  CHECK(rep.at("explosion_time").get<double>() < rep.at("t_star").get<double>());
  CHECK(rep.at("criterion").at("converges") == true);
  CHECK(rep.at("control_constant").is_number());
  CHECK(rep.at("euler").contains("peak_state"));
}

TEST_CASE("cli binary: exit codes and artifacts") {
  const fs::path dir = scratch("codes");
  write(dir / "zero.json",
        json{{"driver", {{"type", "polynomial"}, {"coeffs", {{0.0, 1.0}}}, {"steps", 8}}},
             {"scheme", {{"field", {{"type", "zero"}, {"n", 1}}}, {"y0", {2.0}}}}}
            .dump());
  CHECK(run_cli("solve --config " + (dir / "zero.json").string() + " --out " + (dir / "ok").string()) == 0);
  CHECK(fs::exists(dir / "ok" / "trajectory.csv"));
  CHECK(fs::exists(dir / "ok" / "manifest.json"));

  write(dir / "bad.json", "{\"driver\": {\"type\": ");
  CHECK(run_cli("solve --config " + (dir / "bad.json").string() + " --out " + (dir / "bad").string()) == 2);
  CHECK(file_count(dir / "bad") == 0);

  write(dir / "unknown.json",
        json{{"driver", {{"type", "polynomial"}, {"coeffs", {{0.0, 1.0}}}, {"step", 8}}},
             {"scheme", {{"field", {{"type", "zero"}, {"n", 1}}}, {"y0", {2.0}}}}}
            .dump());
  CHECK(run_cli("solve --config " + (dir / "unknown.json").string() + " --out " + (dir / "unknown").string()) == 2);
  CHECK(file_count(dir / "unknown") == 0);

  write(dir / "noseed.json", json{{"driver", {{"type", "brownian"}, {"levels", 4}}}}.dump());
  CHECK(run_cli("chen-check --config " + (dir / "noseed.json").string() + " --out " + (dir / "noseed").string()) == 2);
  CHECK(run_cli("chen-check --config " + (dir / "noseed.json").string() + " --out " + (dir / "seeded").string() +
                " --seed 3") == 0);

  // dy = y dx on x(t) = 20t leaves the threshold well before t = 1.
  write(dir / "blow.json",
        json{{"driver", {{"type", "polynomial"}, {"coeffs", {{0.0, 20.0}}}, {"steps", 64}}},
             {"scheme", {{"field", {{"type", "linear"}, {"matrices", {{{1.0}}}}}}, {"y0", {1.0}}}}}
            .dump());
  CHECK(run_cli("solve --config " + (dir / "blow.json").string() + " --out " + (dir / "blow").string()) == 3);
  CHECK(file_count(dir / "blow") == 0);
  CHECK(run_cli("solve --config " + (dir / "missing.json").string() + " --out " + (dir / "m").string()) == 2);
  CHECK(run_cli("solve --out " + (dir / "m").string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("cli binary: identical config and seed give identical bytes") {
  const fs::path dir = scratch("determinism");
  write(dir / "conv.json", gbm_convergence_config().dump());
  for (const char* out : {"a", "b"})
    REQUIRE(run_cli("convergence --config " + (dir / "conv.json").string() + " --out " + (dir / out).string()) == 0);
  for (const auto& entry : fs::directory_iterator(dir / "a"))
    CHECK(slurp(entry.path()) == slurp(dir / "b" / entry.path().filename()));
  CHECK(file_count(dir / "a") == file_count(dir / "b"));
  REQUIRE(run_cli("convergence --config " + (dir / "conv.json").string() + " --out " + (dir / "c").string() +
                  " --seed 43") == 0);
  CHECK(slurp(dir / "a" / "rate.json") != slurp(dir / "c" / "rate.json"));
  fs::remove_all(dir);
}
