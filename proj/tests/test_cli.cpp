#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "entlyap/cli.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace entlyap;
using namespace entlyap::cli;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("entlyap_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string error_of(const std::string& config, Command cmd = Command::Run) {
  try {
    parse_config(config, cmd);
  } catch (const ParameterError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("minimal config fills the documented defaults") {
  const RunConfig cfg = parse_config(R"({"scenario": "pureBipartite", "measure": "concurrence"})", Command::Run);
  CHECK(cfg.coupling_j == 0.5);
  CHECK(cfg.gain == 5.0);
  CHECK(cfg.propagation.dt == 0.001);
  CHECK(cfg.propagation.t_max == 20.0);
  CHECK(cfg.convergence.window == 100);
  CHECK(cfg.preset == harness::Preset::PureBipartite);
  CHECK(cfg.initial_kind == InitialKind::Table1);

  const json echo = json::parse(effective_config_json(cfg));
  CHECK(echo["hamiltonian.J"] == 0.5);
  CHECK(echo["control.r"] == 5.0);
  CHECK(echo["propagation.dt"] == 0.001);
  // The echo is itself a valid config that reproduces the same parameters.
  const RunConfig again = parse_config(echo.dump(), Command::Run);
  CHECK(effective_config_json(again) == effective_config_json(cfg));
}

TEST_CASE("scenario-dependent defaults") {
  const RunConfig mems = parse_config("{}", Command::Mems);
  CHECK(mems.scenario == harness::Scenario::MixedBipartite);
  CHECK(mems.measure == "mixedConcurrence");
  CHECK(mems.propagation.t_max == 200.0);
  CHECK(mems.convergence.window == 20);
  CHECK(mems.mems_modes.size() == 3);

  const RunConfig multi = parse_config("{}", Command::Multi);
  CHECK(multi.multi_scenarios.size() == 2);
  CHECK(multi.preset == harness::Preset::TripartiteFull);
  CHECK(parse_config(R"({"scenario": "tripartiteGC"})", Command::Multi).multi_scenarios.size() == 1);
}

TEST_CASE("config errors name the offending input") {
  CHECK(error_of(R"({"scenario": "pureBipartite", "propagation.DT": 0.01})").find("propagation.DT") !=
        std::string::npos);
  CHECK(error_of(R"({"scenario": "mixedBipartite", "initial.spectrum": [0.5, 0.3, 0.15, 0.04]})").find("0.99") !=
        std::string::npos);
  CHECK(error_of(R"({"measure": "renyi", "measure.alpha": 1})").find("entropy") != std::string::npos);
  const std::string mismatch = error_of(R"({"scenario": "mixedBipartite", "measure": "entropy"})");
  CHECK(mismatch.find("entropy") != std::string::npos);
  CHECK(mismatch.find("mixedBipartite") != std::string::npos);
  CHECK(error_of(R"({"propagation.dt": "fast"})").find("propagation.dt") != std::string::npos);
  CHECK(error_of(R"({"propagation.recordEvery": 2.5})").find("propagation.recordEvery") != std::string::npos);
  CHECK(error_of(R"({"initial.kind": "perturbedProduct"})").find("perturbedProduct") != std::string::npos);
  CHECK(error_of(R"({"initial.kind": "bellPerturbed", "initial.primary": "b02"})").find("b02") != std::string::npos);
  CHECK(error_of("[1, 2]").find("object") != std::string::npos);
  CHECK(error_of("{").find("JSON") != std::string::npos);
  CHECK(error_of("{}", Command::Validate).empty());
  CHECK_FALSE(error_of(R"({"measure": "mixedConcurrence"})", Command::Validate).empty());
  CHECK_FALSE(error_of(R"({"measure": "entropy"})", Command::Basin).empty());
}

TEST_CASE("command-line overrides win over the file") {
  Overrides o;
  o.seed = 99;
  o.threads = 3;
  o.out_dir = "elsewhere";
  o.format = "json";
  const RunConfig cfg = parse_config(R"({"seed": 1, "threads": 2, "output.dir": "here"})", Command::Run, o);
  CHECK(cfg.seed == 99);
  CHECK(cfg.threads == 3);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.format == OutputFormat::Json);
  o.format = "xml";
  CHECK_THROWS_AS(parse_config("{}", Command::Run, o), ParameterError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
}

TEST_CASE("trajectory CSV") {
  const RunConfig cfg = parse_config("{}", Command::Run);
  SUBCASE("zero-control run has a constant E column") {
    const harness::ExperimentSpec spec =
        build_experiment(cfg, harness::Scenario::PureBipartite, testsupport::pure(qmat::bell_state(0, 0)));
    const harness::RunResult r = harness::run_trajectory(spec);
    const auto rows = csv_rows(trajectory_csv(r.trajectory));
    CHECK(rows[0] == std::vector<std::string>{"t", "V", "E", "u_1", "u_2", "u_3", "pop_00", "pop_01", "pop_10",
                                              "pop_11"});
    REQUIRE(rows.size() == r.trajectory.samples.size() + 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i][2] == "1");
      CHECK(rows[i][3] == "0");
    }
  }
  SUBCASE("pure run ends near the Bell populations") {
    const harness::RunResult r = harness::run_trajectory(
        build_experiment(cfg, cfg.scenario, initial_state(cfg, cfg.scenario)));
    const auto last = csv_rows(trajectory_csv(r.trajectory)).back();
    CHECK(std::stod(last[6]) == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(std::abs(std::stod(last[7])) < 1e-3);
    CHECK(std::abs(std::stod(last[8])) < 1e-3);
    CHECK(std::stod(last[9]) == doctest::Approx(0.5).epsilon(2e-3));
  }
  SUBCASE("mixed run E column equals the recomputed concurrence") {
    RunConfig mixed = parse_config(R"({"propagation.tMax": 5, "propagation.recordEvery": 50})", Command::Mems);
    mixed.mems_mode = harness::MemsMode::Haar;
    const harness::RunResult r = harness::run_trajectory(
        build_experiment(mixed, harness::Scenario::MixedBipartite,
                         initial_state(mixed, harness::Scenario::MixedBipartite)));
    const auto rows = csv_rows(trajectory_csv(r.trajectory));
    REQUIRE(rows.size() == r.trajectory.samples.size() + 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(std::abs(std::stod(rows[i][2]) - measures::concurrence_mixed(r.trajectory.samples[i - 1].rho)) < 1e-9);
    }
  }
  SUBCASE("three-qubit columns") {
    const RunConfig c3 = parse_config(R"({"propagation.tMax": 0.01})", Command::Multi);
    const harness::RunResult r = harness::run_trajectory(
        build_experiment(c3, harness::Scenario::TripartiteGC, initial_state(c3, harness::Scenario::TripartiteGC)));
    const auto header = csv_rows(trajectory_csv(r.trajectory)).front();
    CHECK(header.size() == 3 + 34 + 8);
    CHECK(header.back() == "pop_111");
  }
}

TEST_CASE("basin CSV round trip") {
  harness::BasinConfig bc;
  bc.resolution = 2;
  bc.random_points = 2;
  const auto points = harness::basin_scan(bc);
  const std::string text = basin_csv(points);
  CHECK(text.rfind("b_alpha,b_beta,b_gamma,b_delta,class\n1,0,0,0,Bell_b00\n", 0) == 0);
  CHECK(text.find("0,0,0,1,Bell_b11\n") != std::string::npos);
  const auto back = parse_basin_csv(text);
  REQUIRE(back.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(back[i].weights[k] - points[i].weights[k]) < 1e-11);
    CHECK(back[i].terminal_class == points[i].terminal_class);
  }
  CHECK(parse_basin_csv(text.substr(0, text.find('\n') + 1)).empty());
  CHECK_THROWS_AS(parse_basin_csv("a,b\n"), ParameterError);
  CHECK_THROWS_AS(parse_basin_csv("b_alpha,b_beta,b_gamma,b_delta,class\n1,0,0,Bell_b00\n"), ParameterError);
  CHECK_THROWS_AS(parse_basin_csv("b_alpha,b_beta,b_gamma,b_delta,class\n1,0,0,0,Blue\n"), ParameterError);

  const fs::path dir = scratch("basin");
  fs::create_directories(dir);
  write_basin_csv(points, dir / "basin.csv");
  CHECK(read_basin_csv(dir / "basin.csv").size() == points.size());
  fs::remove_all(dir);
}

TEST_CASE("atomic writes and exit codes") {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  write_atomic(dir / "a.txt", "first");
  write_atomic(dir / "a.txt", "second");
  CHECK(slurp(dir / "a.txt") == "second");
  CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
  CHECK_THROWS_AS(write_atomic(dir / "missing" / "a.txt", "x"), IoError);
  fs::remove_all(dir);

  CHECK(exit_code_for(ParameterError("x")) == kExitConfig);
  CHECK(exit_code_for(DimensionError("x")) == kExitConfig);
  CHECK(exit_code_for(NumericalIntegrityError("x")) == kExitNumerical);
  CHECK(exit_code_for(IoError("x")) == kExitIo);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitInternal);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/entlyap.json", Command::Run), IoError);
}

TEST_CASE("commands write their artifacts") {
  SUBCASE("run on the first two-Bell row") {
    const fs::path dir = scratch("run");
    Overrides o;
    o.out_dir = dir.string();
    const RunConfig cfg = parse_config(R"({"initial.kind": "table1", "initial.row": 1})", Command::Run, o);
    cmd_run(cfg);
    const json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["result"]["terminalClass"] == "Bell_b00");
    CHECK(summary["config"]["initial.row"] == 1);
    CHECK(summary["files"][0] == "trajectory.csv");
    const std::string first = slurp(dir / "trajectory.csv");

    cmd_run(cfg);
    CHECK(slurp(dir / "trajectory.csv") == first);
    fs::remove_all(dir);
  }
  SUBCASE("validate on concurrence") {
    const fs::path dir = scratch("validate");
    Overrides o;
    o.out_dir = dir.string();
    cmd_validate(parse_config(R"({"measure": "concurrence"})", Command::Validate, o));
    const json result = json::parse(slurp(dir / "summary.json"))["result"];
    CHECK(result["allPassed"] == true);
    REQUIRE(result["conditions"].size() == 5);
    for (const auto& c : result["conditions"]) CHECK(c["passed"] == true);
    CHECK(result["concavityAtHalf"].get<double>() == doctest::Approx(-4.0).epsilon(1e-4));
    fs::remove_all(dir);
  }
  SUBCASE("mems on the Fig. 6 spectrum") {
    const fs::path dir = scratch("mems");
    Overrides o;
    o.out_dir = dir.string();
    o.format = "json";
    cmd_mems(parse_config(R"({"mems.modes": ["kernel", "separable"]})", Command::Mems, o));
    const json summary = json::parse(slurp(dir / "summary.json"));
    CHECK(summary["result"]["theoreticalMax"].get<double>() == doctest::Approx(0.1648).epsilon(1e-3));
    for (const auto& run : summary["result"]["runs"]) {
      CHECK(std::abs(run["steadyConcurrence"].get<double>() - 0.1648) < 5e-3);
      CHECK(fs::exists(dir / run["file"].get<std::string>()));
    }
    CHECK(json::parse(slurp(dir / "mems_kernel.json"))["columns"][2] == "E");
    fs::remove_all(dir);
  }
  SUBCASE("multi writes one trajectory per scenario") {
    const fs::path dir = scratch("multi");
    Overrides o;
    o.out_dir = dir.string();
    cmd_multi(parse_config("{}", Command::Multi, o));
    const json runs = json::parse(slurp(dir / "summary.json"))["result"]["runs"];
    REQUIRE(runs.size() == 2);
    CHECK(runs[1]["scenario"] == "tripartiteGME");
    CHECK(std::abs(runs[1]["finalE"].get<double>() - 1.0) < 1e-2);
    CHECK(fs::exists(dir / "trajectory_tripartiteGC.csv"));
    fs::remove_all(dir);
  }
}
