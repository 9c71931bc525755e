#include "entlyap/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "names.hpp"

namespace entlyap::cli {

using harness::MemsMode;
using harness::Preset;
using harness::Scenario;
using json = nlohmann::ordered_json;
using qmat::DensityMatrix;
using qmat::Ket;

namespace {

using detail::name_of;
using detail::parse_name;

constexpr detail::NameTable<Command, 5> kCommandNames{{
    {Command::Run, "run"},
    {Command::Basin, "basin"},
    {Command::Mems, "mems"},
    {Command::Multi, "multi"},
    {Command::Validate, "validate"},
}};

constexpr detail::NameTable<OutputFormat, 2> kFormatNames{{
    {OutputFormat::Csv, "csv"},
    {OutputFormat::Json, "json"},
}};

constexpr detail::NameTable<InitialKind, 7> kInitialNames{{
    {InitialKind::Table1, "table1"},
    {InitialKind::BellPerturbed, "bellPerturbed"},
    {InitialKind::Basis, "basis"},
    {InitialKind::Weights, "weights"},
    {InitialKind::Random, "random"},
    {InitialKind::Spectrum, "spectrum"},
    {InitialKind::PerturbedProduct, "perturbedProduct"},
}};

std::string default_measure(Scenario s) {
  switch (s) {
    case Scenario::PureBipartite: return "concurrence";
    case Scenario::MixedBipartite: return "mixedConcurrence";
    case Scenario::TripartiteGC: return "generalizedConcurrence";
    case Scenario::TripartiteGME: return "gmeConcurrence";
  }
  throw ParameterError("unknown scenario");
}

InitialKind default_initial(Scenario s) {
  switch (s) {
    case Scenario::PureBipartite: return InitialKind::Table1;
    case Scenario::MixedBipartite: return InitialKind::Spectrum;
    case Scenario::TripartiteGC:
    case Scenario::TripartiteGME: return InitialKind::PerturbedProduct;
  }
  throw ParameterError("unknown scenario");
}

bool is_tripartite(Scenario s) { return s == Scenario::TripartiteGC || s == Scenario::TripartiteGME; }

// Reads keys from a flat JSON object and remembers which ones were consumed,
// so that anything left over can be reported as unknown.
class KeyReader {
 public:
  explicit KeyReader(const json& obj) : obj_(obj) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <class T>
  T get(const std::string& key, T fallback, const char* type_name) {
    if (!has(key)) return fallback;
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ParameterError("config key '" + key + "': expected " + type_name + ", got " + obj_.at(key).dump());
    }
  }

  double number(const std::string& key, double fallback) {
    const double v = get<double>(key, fallback, "a number");
    if (!std::isfinite(v)) throw ParameterError("config key '" + key + "' must be finite");
    return v;
  }
  int integer(const std::string& key, int fallback) {
    if (has(key) && !obj_.at(key).is_number_integer()) {
      throw ParameterError("config key '" + key + "': expected an integer, got " + obj_.at(key).dump());
    }
    return get<int>(key, fallback, "an integer");
  }
  std::string text(const std::string& key, std::string fallback) {
    return get<std::string>(key, std::move(fallback), "a string");
  }
  std::array<double, 4> quad(const std::string& key, std::array<double, 4> fallback) {
    if (has(key) && !(obj_.at(key).is_array() && obj_.at(key).size() == 4)) {
      throw ParameterError("config key '" + key + "': expected an array of 4 numbers");
    }
    return get<std::array<double, 4>>(key, fallback, "an array of 4 numbers");
  }
  std::vector<std::string> names(const std::string& key, std::vector<std::string> fallback) {
    return get<std::vector<std::string>>(key, std::move(fallback), "an array of strings");
  }

  void reject_unknown() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ParameterError("unknown config key '" + k + "'");
    }
  }

 private:
  const json& obj_;
  std::set<std::string> seen_;
};

// "b01" or "-b01"
Ket parse_bell(const std::string& name) {
  const bool minus = !name.empty() && name[0] == '-';
  const std::string_view body = std::string_view(name).substr(minus ? 1 : 0);
  if (body.size() != 3 || body[0] != 'b' || (body[1] != '0' && body[1] != '1') || (body[2] != '0' && body[2] != '1')) {
    throw ParameterError("Bell state name '" + name + "' must be b00, b01, b10 or b11 with an optional '-'");
  }
  const Ket b = qmat::bell_state(body[1] - '0', body[2] - '0');
  return minus ? Ket(-b.amplitudes()) : b;
}

void check_measure_fits(const std::string& measure, Scenario s) {
  const bool gf = measure == "concurrence" || measure == "entropy" || measure == "renyi";
  const bool ok = s == Scenario::PureBipartite ? gf : measure == default_measure(s);
  if (!ok) {
    throw ParameterError("measure '" + measure + "' does not fit scenario '" + harness::to_string(s) + "'");
  }
}

json quad_json(const std::array<double, 4>& a) { return json::array({a[0], a[1], a[2], a[3]}); }

std::string population_label(int index, int nqubits) {
  std::string bits(static_cast<std::size_t>(nqubits), '0');
  for (int q = 0; q < nqubits; ++q) {
    if ((index >> (nqubits - 1 - q)) & 1) bits[static_cast<std::size_t>(q)] = '1';
  }
  return "pop_" + bits;
}

std::vector<std::string> trajectory_columns(const dynamics::TrajectoryRecord& tr) {
  std::vector<std::string> cols{"t", "V", "E"};
  const auto& first = tr.samples.front();
  for (std::size_t k = 0; k < first.u.size(); ++k) cols.push_back("u_" + std::to_string(k + 1));
  const int n = first.rho.nqubits();
  for (int i = 0; i < (1 << n); ++i) cols.push_back(population_label(i, n));
  return cols;
}

std::vector<double> trajectory_row(const dynamics::TrajectorySample& s) {
  std::vector<double> row{s.t, s.V, s.E};
  row.insert(row.end(), s.u.begin(), s.u.end());
  for (Eigen::Index i = 0; i < s.rho.dim(); ++i) row.push_back(s.rho.matrix()(i, i).real());
  return row;
}

json tilde_json(const harness::TildeReport& t) {
  return json{{"p", quad_json(t.p)},
              {"c", quad_json(t.c)},
              {"expectedP", quad_json(t.expected_p)},
              {"expectedC", quad_json(t.expected_c)},
              {"cDeviation", t.c_deviation},
              {"pDeviation", t.p_deviation},
              {"kernelPattern", t.c_deviation <= harness::kKernelPatternTolerance}};
}

json run_json(const harness::RunResult& r) {
  json out{{"converged", r.converged},
           {"terminalClass", harness::to_string(r.terminal_class)},
           {"finalE", r.final_E},
           {"finalV", r.final_V},
           {"finalMaxX", r.final_max_x},
           {"finalTime", r.trajectory.final_time},
           {"steps", r.trajectory.steps},
           {"stoppedEarly", r.trajectory.stopped_early},
           {"samples", r.trajectory.samples.size()},
           {"maxLyapunovIncrease", harness::max_lyapunov_increase(r.trajectory, r.partition_switches)}};
  if (r.steady_concurrence) out["steadyConcurrence"] = *r.steady_concurrence;
  if (r.theoretical_max) out["theoreticalMax"] = *r.theoretical_max;
  if (r.tilde) out["tilde"] = tilde_json(*r.tilde);
  if (!r.partitions.empty()) {
    out["partitionSwitches"] = r.partition_switches.size();
    out["finalPartition"] = r.partitions.back();
  }
  return out;
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

// Writes the trajectory in the selected format and returns the file name.
std::string write_trajectory(const RunConfig& cfg, const dynamics::TrajectoryRecord& tr, const std::string& stem) {
  const bool csv = cfg.format == OutputFormat::Csv;
  const std::string name = stem + (csv ? ".csv" : ".json");
  write_atomic(out_path(cfg, name), csv ? trajectory_csv(tr) : trajectory_json(tr));
  return name;
}

void write_summary(const RunConfig& cfg, json result, const std::vector<std::string>& files) {
  json summary{{"command", to_string(cfg.command)},
               {"config", json::parse(effective_config_json(cfg))},
               {"result", std::move(result)},
               {"files", files}};
  write_atomic(out_path(cfg, "summary.json"), summary.dump(2) + "\n");
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
}

// Checks that everything a command will build can be built, before any
// expensive work starts.
void dry_build(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Run:
      build_experiment(cfg, cfg.scenario, initial_state(cfg, cfg.scenario)).validate();
      break;
    case Command::Mems:
      for (MemsMode m : cfg.mems_modes) {
        RunConfig c = cfg;
        c.mems_mode = m;
        build_experiment(c, Scenario::MixedBipartite, initial_state(c, Scenario::MixedBipartite)).validate();
      }
      break;
    case Command::Multi:
      for (Scenario s : cfg.multi_scenarios) {
        RunConfig c = cfg;
        c.measure = default_measure(s);
        build_experiment(c, s, initial_state(c, s)).validate();
      }
      break;
    case Command::Basin:
      harness::simplex_grid(cfg.basin_resolution);
      break;
    case Command::Validate:
      measure_kind(cfg);
      break;
  }
}

}  // namespace

std::string to_string(Command c) { return name_of(c, kCommandNames); }
Command parse_command(std::string_view name) { return parse_name(name, kCommandNames, "command"); }
std::string to_string(OutputFormat f) { return name_of(f, kFormatNames); }
OutputFormat parse_format(std::string_view name) { return parse_name(name, kFormatNames, "output format"); }
std::string to_string(InitialKind k) { return name_of(k, kInitialNames); }
InitialKind parse_initial_kind(std::string_view name) { return parse_name(name, kInitialNames, "initial state kind"); }

RunConfig parse_config(std::string_view json_text, Command command, const Overrides& overrides) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParameterError("config must be a JSON object with flat keys");

  KeyReader in(obj);
  RunConfig cfg;
  cfg.command = command;

  const Scenario command_default = command == Command::Mems    ? Scenario::MixedBipartite
                                   : command == Command::Multi ? Scenario::TripartiteGME
                                                               : Scenario::PureBipartite;
  const bool scenario_given = in.has("scenario");
  cfg.scenario = harness::parse_scenario(in.text("scenario", harness::to_string(command_default)));
  if (command == Command::Mems && cfg.scenario != Scenario::MixedBipartite) {
    throw ParameterError("command mems needs scenario mixedBipartite, got " + harness::to_string(cfg.scenario));
  }
  if (command == Command::Basin && cfg.scenario != Scenario::PureBipartite) {
    throw ParameterError("command basin needs scenario pureBipartite, got " + harness::to_string(cfg.scenario));
  }
  if (command == Command::Multi) {
    if (!is_tripartite(cfg.scenario)) {
      throw ParameterError("command multi needs a tripartite scenario, got " + harness::to_string(cfg.scenario));
    }
    std::vector<std::string> fallback;
    if (scenario_given) {
      fallback = {harness::to_string(cfg.scenario)};
    } else {
      for (Scenario s : cfg.multi_scenarios) fallback.push_back(harness::to_string(s));
    }
    cfg.multi_scenarios.clear();
    for (const auto& n : in.names("multi.scenarios", fallback)) {
      const Scenario s = harness::parse_scenario(n);
      if (!is_tripartite(s)) throw ParameterError("multi.scenarios entry '" + n + "' is not a tripartite scenario");
      cfg.multi_scenarios.push_back(s);
    }
    if (cfg.multi_scenarios.empty()) throw ParameterError("multi.scenarios must not be empty");
    cfg.scenario = cfg.multi_scenarios.front();
  } else {
    cfg.multi_scenarios = {};
    in.has("multi.scenarios");
  }

  const bool measure_given = in.has("measure");
  cfg.measure = in.text("measure", command == Command::Basin ? "concurrence" : default_measure(cfg.scenario));
  cfg.renyi_alpha = in.number("measure.alpha", cfg.renyi_alpha);
  if (command == Command::Multi && measure_given && cfg.multi_scenarios.size() > 1) {
    throw ParameterError("measure '" + cfg.measure + "' cannot be set when multi.scenarios lists several scenarios");
  }
  if (command == Command::Basin && cfg.measure != "concurrence") {
    throw ParameterError("command basin runs the concurrence law, got measure '" + cfg.measure + "'");
  }
  measure_kind(cfg);
  if (command != Command::Validate) check_measure_fits(cfg.measure, cfg.scenario);
  if (command == Command::Validate && !measure_kind(cfg).is_gf()) {
    throw ParameterError("command validate needs a (G, f) measure, got '" + cfg.measure + "'");
  }

  cfg.preset = harness::parse_preset(in.text("hamiltonian.preset", harness::to_string(harness::default_preset(cfg.scenario))));
  cfg.coupling_j = in.number("hamiltonian.J", cfg.coupling_j);
  cfg.shape = in.text("control.shape", cfg.shape);
  if (cfg.shape != "linear" && cfg.shape != "tanh") {
    throw ParameterError("control.shape must be 'linear' or 'tanh', got '" + cfg.shape + "'");
  }
  cfg.gain = in.number("control.r", cfg.gain);
  if (!(cfg.gain > 0.0)) throw ParameterError("control.r must be positive");
  cfg.epsilon = in.number("control.epsilon", cfg.epsilon);
  if (cfg.epsilon < 0.0) throw ParameterError("control.epsilon must be >= 0");

  const bool mixed = cfg.scenario == Scenario::MixedBipartite;
  const harness::MemsConfig mems_defaults;
  const dynamics::PropagationConfig prop_defaults = mixed ? mems_defaults.propagation : dynamics::PropagationConfig{};
  const harness::ConvergenceCriteria conv_defaults = mixed ? mems_defaults.convergence : harness::ConvergenceCriteria{};
  cfg.propagation.dt = in.number("propagation.dt", prop_defaults.dt);
  cfg.propagation.t_max = in.number("propagation.tMax", prop_defaults.t_max);
  cfg.propagation.record_every = in.integer("propagation.recordEvery", prop_defaults.record_every);
  cfg.propagation.validate();
  cfg.convergence.tolerance = in.number("convergence.tolerance", conv_defaults.tolerance);
  cfg.convergence.window = in.integer("convergence.window", conv_defaults.window);
  if (!(cfg.convergence.tolerance > 0.0) || cfg.convergence.window < 1) {
    throw ParameterError("convergence.tolerance must be > 0 and convergence.window >= 1");
  }
  cfg.stop_on_convergence = in.get<bool>("convergence.stopEarly", cfg.stop_on_convergence, "a boolean");

  cfg.initial_kind = parse_initial_kind(in.text("initial.kind", to_string(default_initial(cfg.scenario))));
  cfg.table_row = in.integer("initial.row", cfg.table_row);
  cfg.primary = in.text("initial.primary", cfg.primary);
  cfg.secondary = in.text("initial.secondary", cfg.secondary);
  cfg.bits = in.text("initial.bits", is_tripartite(cfg.scenario) ? "000" : cfg.bits);
  cfg.weights = in.quad("initial.weights", cfg.weights);
  cfg.spectrum = in.quad("initial.spectrum", cfg.spectrum);
  cfg.mems_mode = harness::parse_mems_mode(in.text("initial.mode", harness::to_string(cfg.mems_mode)));
  harness::normalize_spectrum(cfg.spectrum);

  std::vector<std::string> mode_names;
  for (MemsMode m : cfg.mems_modes) mode_names.push_back(harness::to_string(m));
  cfg.mems_modes.clear();
  for (const auto& n : in.names("mems.modes", mode_names)) cfg.mems_modes.push_back(harness::parse_mems_mode(n));
  if (command == Command::Mems && cfg.mems_modes.empty()) throw ParameterError("mems.modes must not be empty");

  cfg.basin_resolution = in.integer("basin.resolution", cfg.basin_resolution);
  cfg.basin_random_points = in.integer("basin.randomPoints", cfg.basin_random_points);
  if (cfg.basin_random_points < 0) throw ParameterError("basin.randomPoints must be >= 0");
  cfg.validate_samples = in.integer("validate.samples", cfg.validate_samples);
  if (cfg.validate_samples < 100) throw ParameterError("validate.samples must be >= 100");

  cfg.seed = in.get<std::uint64_t>("seed", cfg.seed, "an unsigned 64-bit integer");
  cfg.threads = in.integer("threads", cfg.threads);
  cfg.out_dir = in.text("output.dir", cfg.out_dir);
  cfg.format = parse_format(in.text("output.format", to_string(cfg.format)));
  in.reject_unknown();

  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.threads) cfg.threads = *overrides.threads;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (overrides.format) cfg.format = parse_format(*overrides.format);
  if (cfg.threads < 0) throw ParameterError("threads must be >= 0 (0 selects the hardware concurrency)");
  if (cfg.out_dir.empty()) throw ParameterError("output directory must not be empty");

  dry_build(cfg);
  return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path, Command command, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), command, overrides);
}

std::string effective_config_json(const RunConfig& cfg) {
  json j;
  j["scenario"] = harness::to_string(cfg.scenario);
  j["measure"] = cfg.measure;
  j["measure.alpha"] = cfg.renyi_alpha;
  j["hamiltonian.preset"] = harness::to_string(cfg.preset);
  j["hamiltonian.J"] = cfg.coupling_j;
  j["control.shape"] = cfg.shape;
  j["control.r"] = cfg.gain;
  j["control.epsilon"] = cfg.epsilon;
  j["propagation.dt"] = cfg.propagation.dt;
  j["propagation.tMax"] = cfg.propagation.t_max;
  j["propagation.recordEvery"] = cfg.propagation.record_every;
  j["convergence.tolerance"] = cfg.convergence.tolerance;
  j["convergence.window"] = cfg.convergence.window;
  j["convergence.stopEarly"] = cfg.stop_on_convergence;
  j["initial.kind"] = to_string(cfg.initial_kind);
  j["initial.row"] = cfg.table_row;
  j["initial.primary"] = cfg.primary;
  j["initial.secondary"] = cfg.secondary;
  j["initial.bits"] = cfg.bits;
  j["initial.weights"] = quad_json(cfg.weights);
  j["initial.spectrum"] = quad_json(cfg.spectrum);
  j["initial.mode"] = harness::to_string(cfg.mems_mode);
  json modes = json::array();
  for (MemsMode m : cfg.mems_modes) modes.push_back(harness::to_string(m));
  j["mems.modes"] = modes;
  json scen = json::array();
  for (Scenario s : cfg.multi_scenarios) scen.push_back(harness::to_string(s));
  j["multi.scenarios"] = scen;
  j["basin.resolution"] = cfg.basin_resolution;
  j["basin.randomPoints"] = cfg.basin_random_points;
  j["validate.samples"] = cfg.validate_samples;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["output.dir"] = cfg.out_dir;
  j["output.format"] = to_string(cfg.format);
  return j.dump(2);
}

measures::MeasureKind measure_kind(const RunConfig& cfg) {
  const std::string& m = cfg.measure;
  if (m == "concurrence") return measures::MeasureKind::gf(measures::concurrence_measure());
  if (m == "entropy") return measures::MeasureKind::gf(measures::entropy_measure());
  if (m == "renyi") return measures::MeasureKind::gf(measures::renyi_measure(cfg.renyi_alpha));
  if (m == "mixedConcurrence") return measures::MeasureKind::mixed_concurrence();
  if (m == "generalizedConcurrence") return measures::MeasureKind::generalized_concurrence();
  if (m == "gmeConcurrence") return measures::MeasureKind::gme_concurrence();
  throw ParameterError("unknown measure '" + m +
                       "' (expected one of concurrence, entropy, renyi, mixedConcurrence, generalizedConcurrence, "
                       "gmeConcurrence)");
}

DensityMatrix initial_state(const RunConfig& cfg, Scenario scenario) {
  const int n = harness::scenario_qubits(scenario);
  const auto need = [&](bool ok) {
    if (!ok) {
      throw ParameterError("initial.kind '" + to_string(cfg.initial_kind) + "' does not fit scenario '" +
                           harness::to_string(scenario) + "'");
    }
  };
  switch (cfg.initial_kind) {
    case InitialKind::Table1:
      need(scenario == Scenario::PureBipartite);
      return DensityMatrix::from_ket(harness::table1_initial(cfg.table_row, cfg.epsilon));
    case InitialKind::BellPerturbed:
      need(scenario == Scenario::PureBipartite);
      return DensityMatrix::from_ket(
          control::perturb_initial(parse_bell(cfg.primary), parse_bell(cfg.secondary), cfg.epsilon));
    case InitialKind::Basis:
      need(scenario != Scenario::MixedBipartite);
      if (cfg.bits.size() != static_cast<std::size_t>(n)) {
        throw ParameterError("initial.bits '" + cfg.bits + "' must have " + std::to_string(n) + " characters");
      }
      return DensityMatrix::from_ket(qmat::basis_ket(cfg.bits));
    case InitialKind::Weights:
      need(scenario == Scenario::PureBipartite);
      return DensityMatrix::from_ket(harness::basin_initial_state(cfg.weights, cfg.epsilon));
    case InitialKind::Random: {
      need(scenario != Scenario::MixedBipartite);
      std::mt19937_64 rng(qmat::split_seed(cfg.seed, 0));
      return DensityMatrix::from_ket(qmat::random_ket(Eigen::Index{1} << n, rng));
    }
    case InitialKind::Spectrum:
      need(scenario == Scenario::MixedBipartite);
      return harness::mems_initial_state(harness::normalize_spectrum(cfg.spectrum), cfg.mems_mode, cfg.seed);
    case InitialKind::PerturbedProduct:
      need(n == 3);
      return DensityMatrix::from_ket(harness::perturbed_product(cfg.epsilon));
  }
  throw ParameterError("unknown initial state kind");
}

harness::ExperimentSpec build_experiment(const RunConfig& cfg, Scenario scenario, DensityMatrix initial) {
  dynamics::HamiltonianSet hs = harness::preset_hamiltonians(cfg.preset, cfg.coupling_j);
  control::FeedbackShape shape = cfg.shape == "tanh"
                                     ? control::FeedbackShape::custom("tanh", [](double x) { return std::tanh(x); })
                                     : control::FeedbackShape::linear();
  control::ControllerSpec ctl = control::ControllerSpec::make(
      measure_kind(cfg), std::move(shape), control::ControlGains::uniform(hs.num_controls(), cfg.gain, cfg.epsilon));
  return harness::ExperimentSpec{scenario,        std::move(initial), std::move(hs),          std::move(ctl),
                                 cfg.propagation, cfg.convergence,    cfg.stop_on_convergence};
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string trajectory_csv(const dynamics::TrajectoryRecord& tr) {
  if (tr.samples.empty()) throw ContractViolation("trajectory has no samples");
  std::string out;
  const auto cols = trajectory_columns(tr);
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += '\n';
  for (const auto& s : tr.samples) {
    const auto row = trajectory_row(s);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_json(const dynamics::TrajectoryRecord& tr) {
  if (tr.samples.empty()) throw ContractViolation("trajectory has no samples");
  json rows = json::array();
  for (const auto& s : tr.samples) rows.push_back(trajectory_row(s));
  return json{{"columns", trajectory_columns(tr)}, {"rows", std::move(rows)}}.dump() + "\n";
}

std::string basin_csv(const std::vector<harness::BasinPoint>& points) {
  if (points.empty()) throw ContractViolation("basin map has no points");
  std::string out = "b_alpha,b_beta,b_gamma,b_delta,class\n";
  for (const auto& p : points) {
    for (double w : p.weights) out += format_number(w) + ",";
    out += harness::to_string(p.terminal_class) + "\n";
  }
  return out;
}

std::string basin_json(const std::vector<harness::BasinPoint>& points) {
  if (points.empty()) throw ContractViolation("basin map has no points");
  json rows = json::array();
  for (const auto& p : points) {
    rows.push_back(json{{"weights", quad_json(p.weights)},
                        {"class", harness::to_string(p.terminal_class)},
                        {"converged", p.converged},
                        {"perturbed", p.perturbed},
                        {"finalE", p.final_E}});
  }
  return rows.dump() + "\n";
}

std::vector<harness::BasinPoint> parse_basin_csv(std::string_view text) {
  std::vector<harness::BasinPoint> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line_no == 1) {
      if (line != "b_alpha,b_beta,b_gamma,b_delta,class") throw ParameterError("basin CSV: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    harness::BasinPoint p;
    for (int k = 0; k < 4; ++k) {
      const std::size_t comma = line.find(',');
      if (comma == std::string_view::npos) {
        throw ParameterError("basin CSV line " + std::to_string(line_no) + ": expected 5 fields");
      }
      const auto res = std::from_chars(line.data(), line.data() + comma, p.weights[static_cast<std::size_t>(k)]);
      if (res.ec != std::errc{} || res.ptr != line.data() + comma) {
        throw ParameterError("basin CSV line " + std::to_string(line_no) + ": bad number");
      }
      line.remove_prefix(comma + 1);
    }
    p.terminal_class = harness::parse_terminal_class(line);
    out.push_back(p);
  }
  if (line_no == 0) throw ParameterError("basin CSV: empty input");
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
}

void write_trajectory_csv(const dynamics::TrajectoryRecord& trajectory, const std::filesystem::path& path) {
  write_atomic(path, trajectory_csv(trajectory));
}

void write_basin_csv(const std::vector<harness::BasinPoint>& points, const std::filesystem::path& path) {
  write_atomic(path, basin_csv(points));
}

std::vector<harness::BasinPoint> read_basin_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_basin_csv(text.str());
}

void cmd_run(const RunConfig& cfg) {
  const harness::RunResult r = harness::run_trajectory(build_experiment(cfg, cfg.scenario, initial_state(cfg, cfg.scenario)));
  ensure_out_dir(cfg);
  const std::string file = write_trajectory(cfg, r.trajectory, "trajectory");
  write_summary(cfg, run_json(r), {file});
}

void cmd_basin(const RunConfig& cfg) {
  harness::BasinConfig bc;
  bc.resolution = cfg.basin_resolution;
  bc.random_points = cfg.basin_random_points;
  bc.seed = cfg.seed;
  bc.threads = cfg.threads;
  bc.epsilon = cfg.epsilon;
  bc.propagation = cfg.propagation;
  bc.convergence = cfg.convergence;
  const auto points = harness::basin_scan(bc);

  std::map<std::string, int> counts;
  int unconverged = 0;
  for (const auto& p : points) {
    ++counts[harness::to_string(p.terminal_class)];
    if (!p.converged) ++unconverged;
  }
  json by_class = json::object();
  for (int c = 0; c <= static_cast<int>(harness::TerminalClass::Other); ++c) {
    const std::string name = harness::to_string(static_cast<harness::TerminalClass>(c));
    by_class[name] = counts[name];
  }

  ensure_out_dir(cfg);
  const bool csv = cfg.format == OutputFormat::Csv;
  const std::string file = csv ? "basin.csv" : "basin.json";
  write_atomic(out_path(cfg, file), csv ? basin_csv(points) : basin_json(points));
  write_summary(cfg, json{{"points", points.size()}, {"unconverged", unconverged}, {"classes", by_class}}, {file});
}

void cmd_mems(const RunConfig& cfg) {
  std::vector<std::pair<MemsMode, harness::RunResult>> runs;
  for (MemsMode m : cfg.mems_modes) {
    RunConfig c = cfg;
    c.mems_mode = m;
    runs.emplace_back(m, harness::run_trajectory(
                             build_experiment(c, Scenario::MixedBipartite, initial_state(c, Scenario::MixedBipartite))));
  }
  ensure_out_dir(cfg);
  const auto spec = harness::normalize_spectrum(cfg.spectrum);
  json result{{"spectrum", quad_json(spec)}, {"theoreticalMax", measures::max_concurrence_for_spectrum(spec)}};
  json per_mode = json::array();
  std::vector<std::string> files;
  for (const auto& [m, r] : runs) {
    files.push_back(write_trajectory(cfg, r.trajectory, "mems_" + harness::to_string(m)));
    json entry = run_json(r);
    entry["mode"] = harness::to_string(m);
    entry["file"] = files.back();
    per_mode.push_back(std::move(entry));
  }
  result["runs"] = std::move(per_mode);
  write_summary(cfg, std::move(result), files);
}

void cmd_multi(const RunConfig& cfg) {
  std::vector<std::pair<Scenario, harness::RunResult>> runs;
  for (Scenario s : cfg.multi_scenarios) {
    RunConfig c = cfg;
    c.measure = default_measure(s);
    runs.emplace_back(s, harness::run_trajectory(build_experiment(c, s, initial_state(c, s))));
  }
  ensure_out_dir(cfg);
  json per = json::array();
  std::vector<std::string> files;
  for (const auto& [s, r] : runs) {
    files.push_back(write_trajectory(cfg, r.trajectory, "trajectory_" + harness::to_string(s)));
    json entry = run_json(r);
    entry["scenario"] = harness::to_string(s);
    entry["measure"] = default_measure(s);
    entry["file"] = files.back();
    per.push_back(std::move(entry));
  }
  write_summary(cfg, json{{"runs", std::move(per)}}, files);
}

void cmd_validate(const RunConfig& cfg) {
  const auto report = measures::validate_gf_measure(measure_kind(cfg).gf_measure(), cfg.validate_samples);
  const auto checks = [](const std::vector<measures::ConditionCheck>& list) {
    json arr = json::array();
    for (const auto& c : list) {
      arr.push_back(json{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
    }
    return arr;
  };
  ensure_out_dir(cfg);
  write_summary(cfg,
                json{{"measure", report.measure},
                     {"samples", report.samples},
                     {"conditions", checks(report.conditions)},
                     {"invariants", checks(report.invariants)},
                     {"concavityAtHalf", report.concavity_at_half},
                     {"maximum", report.maximum},
                     {"allPassed", report.all_passed()}},
                {});
}

void dispatch(const RunConfig& cfg) {
  switch (cfg.command) {
    case Command::Run: return cmd_run(cfg);
    case Command::Basin: return cmd_basin(cfg);
    case Command::Mems: return cmd_mems(cfg);
    case Command::Multi: return cmd_multi(cfg);
    case Command::Validate: return cmd_validate(cfg);
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalIntegrityError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitIo;
  if (dynamic_cast<const Error*>(&e)) return kExitConfig;
  return kExitInternal;
}

}  // namespace entlyap::cli
