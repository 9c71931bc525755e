#pragma once

// Configuration parsing, command drivers and artifact writers behind the
// entlyap command-line tool.
//
// Config files are JSON objects with flat dotted keys ("propagation.dt").
// Unknown keys are rejected. Every effective parameter, defaults included,
// is echoed into summary.json.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "entlyap/error.hpp"
#include "entlyap/harness.hpp"

namespace entlyap::cli {

class IoError : public Error {
 public:
  using Error::Error;
};

enum class Command { Run, Basin, Mems, Multi, Validate };
std::string to_string(Command c);
Command parse_command(std::string_view name);

enum class OutputFormat { Csv, Json };
std::string to_string(OutputFormat f);
OutputFormat parse_format(std::string_view name);

enum class InitialKind {
  Table1,            // initial.row of the two-Bell combinations
  BellPerturbed,     // (1 + eps) primary + secondary
  Basis,             // computational basis state initial.bits
  Weights,           // basin-style sum_k sqrt(w_k) b_k
  Random,            // seeded Haar-random pure state
  Spectrum,          // mixed state with initial.spectrum, built per initial.mode
  PerturbedProduct,  // three qubits, |000> with a small |111> admixture
};
std::string to_string(InitialKind k);
InitialKind parse_initial_kind(std::string_view name);

struct RunConfig {
  Command command = Command::Run;
  harness::Scenario scenario = harness::Scenario::PureBipartite;
  std::string measure = "concurrence";
  double renyi_alpha = 1.5;
  harness::Preset preset = harness::Preset::PureBipartite;
  double coupling_j = harness::kDefaultCoupling;
  std::string shape = "linear";  // linear | tanh
  double gain = 5.0;
  double epsilon = 1e-3;
  dynamics::PropagationConfig propagation{};
  harness::ConvergenceCriteria convergence{};
  bool stop_on_convergence = true;

  InitialKind initial_kind = InitialKind::Table1;
  int table_row = 1;
  std::string primary = "b00";  // optional leading '-'
  std::string secondary = "b01";
  std::string bits = "00";
  std::array<double, 4> weights{0.25, 0.25, 0.25, 0.25};
  std::array<double, 4> spectrum{0.4932, 0.3485, 0.1301, 0.0282};
  harness::MemsMode mems_mode = harness::MemsMode::Random;

  std::vector<harness::MemsMode> mems_modes{harness::MemsMode::Kernel, harness::MemsMode::Separable,
                                            harness::MemsMode::Random};
  std::vector<harness::Scenario> multi_scenarios{harness::Scenario::TripartiteGC, harness::Scenario::TripartiteGME};
  int basin_resolution = 20;
  int basin_random_points = 0;
  int validate_samples = 1001;

  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::Csv;
};

/// Values given on the command line; they take precedence over the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
};

/// Parses JSON text for `command`, fills defaults and validates.
/// ParameterError names the offending key (unknown key, wrong type, bad value,
/// scenario/measure mismatch).
RunConfig parse_config(std::string_view json_text, Command command, const Overrides& overrides = {});
/// IoError if the file cannot be read.
RunConfig parse_config_file(const std::filesystem::path& path, Command command, const Overrides& overrides = {});

/// Effective parameters as a flat JSON object (pretty-printed).
std::string effective_config_json(const RunConfig& cfg);

/// Measure named by cfg.measure (with cfg.renyi_alpha).
measures::MeasureKind measure_kind(const RunConfig& cfg);
/// Initial state for scenario `scenario` per cfg.initial_*.
qmat::DensityMatrix initial_state(const RunConfig& cfg, harness::Scenario scenario);
/// Hamiltonians, controller and propagation for one run of `scenario`.
harness::ExperimentSpec build_experiment(const RunConfig& cfg, harness::Scenario scenario, qmat::DensityMatrix initial);

/// 12 significant digits, locale independent.
std::string format_number(double v);

/// Header t,V,E,u_1..u_m,pop_<bits>...; one row per recorded sample.
std::string trajectory_csv(const dynamics::TrajectoryRecord& trajectory);
std::string trajectory_json(const dynamics::TrajectoryRecord& trajectory);

/// Header b_alpha,b_beta,b_gamma,b_delta,class.
std::string basin_csv(const std::vector<harness::BasinPoint>& points);
std::string basin_json(const std::vector<harness::BasinPoint>& points);
/// Inverse of basin_csv for the weights and classes. ParameterError on malformed input.
std::vector<harness::BasinPoint> parse_basin_csv(std::string_view text);

/// Writes to a sibling temporary file and renames it over `path`. IoError on failure.
void write_atomic(const std::filesystem::path& path, std::string_view content);
void write_trajectory_csv(const dynamics::TrajectoryRecord& trajectory, const std::filesystem::path& path);
void write_basin_csv(const std::vector<harness::BasinPoint>& points, const std::filesystem::path& path);
std::vector<harness::BasinPoint> read_basin_csv(const std::filesystem::path& path);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;
/// Anything that is not a library error (a bug).
inline constexpr int kExitInternal = 1;

/// Run the command and write its artifacts into cfg.out_dir. Exceptions propagate.
void cmd_run(const RunConfig& cfg);
void cmd_basin(const RunConfig& cfg);
void cmd_mems(const RunConfig& cfg);
void cmd_multi(const RunConfig& cfg);
void cmd_validate(const RunConfig& cfg);
void dispatch(const RunConfig& cfg);

/// Exit code for an exception escaping parse_config or a command.
int exit_code_for(const std::exception& e);

}  // namespace entlyap::cli
