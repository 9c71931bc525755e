#pragma once

// Experiment orchestration: closed-loop runs, terminal classification,
// basin scans over the Bell tetrahedron, MEMS searches and tripartite runs.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "entlyap/control.hpp"
#include "entlyap/dynamics.hpp"
#include "entlyap/measures.hpp"

namespace entlyap::harness {

using control::ControllerSpec;
using dynamics::HamiltonianSet;
using dynamics::PropagationConfig;
using dynamics::TrajectoryRecord;
using measures::MeasureKind;
using qmat::DensityMatrix;
using qmat::Ket;

enum class Scenario { PureBipartite, MixedBipartite, TripartiteGC, TripartiteGME };

std::string to_string(Scenario s);
/// Accepts the names produced by to_string ("pureBipartite", ...).
Scenario parse_scenario(std::string_view name);
int scenario_qubits(Scenario s);

enum class Preset {
  PureBipartite,    // H0 = 2J ZZ, H_k = XY+ZZ, XZ+ZX, YZ+ZY
  MixedBipartite,   // H0 = ZZ, H_k = ZX, ZY, YZ, XZ, YY, YX
  MixedGenerators,  // H0 = ZZ, H_k = i(|m><n| - |n><m|) over the 4-dim basis
  Tripartite,       // H0 = 2J(ZZI + IZZ), the three two-body forms on both adjacent pairs
  TripartiteFull,   // Tripartite plus i(|m><n| - |n><m|) over the 8-dim basis
};

std::string to_string(Preset p);
Preset parse_preset(std::string_view name);
Preset default_preset(Scenario s);

inline constexpr double kDefaultCoupling = 0.5;

/// ParameterError if J is not finite.
HamiltonianSet preset_hamiltonians(Preset p, double coupling_j = kDefaultCoupling);

enum class TerminalClass { BellB00, BellB01, BellB10, BellB11, BellEquivalent, MEMS, Other };

/// "Bell_b00", ..., "BellEquivalent", "MEMS", "Other".
std::string to_string(TerminalClass c);
TerminalClass parse_terminal_class(std::string_view name);
TerminalClass bell_class(int a, int b);

struct ConvergenceCriteria {
  double tolerance = 1e-6;  // on max_k |x_k|
  int window = 100;         // consecutive recorded samples
};

struct ExperimentSpec {
  Scenario scenario;
  DensityMatrix initial;
  HamiltonianSet hamiltonians;
  ControllerSpec controller;
  PropagationConfig propagation{};
  ConvergenceCriteria convergence{};
  /// End the run as soon as detect_convergence holds.
  bool stop_on_convergence = true;

  /// Default preset, linear shape and r_k = 5 for the scenario.
  static ExperimentSpec make(Scenario scenario, MeasureKind measure, DensityMatrix initial);
  /// ParameterError or DimensionError when the scenario, measure, register
  /// size and state disagree.
  void validate() const;
};

/// Tilde decomposition at steady state against the kernel-class pattern
/// c = (1, 1, k, k), p = (l1, l3, (l2 + l4)/2, (l2 + l4)/2),
/// k = 2 sqrt(l2 l4) / (l2 + l4).
struct TildeReport {
  std::array<double, 4> p{};
  std::array<double, 4> c{};
  std::array<double, 4> expected_p{};
  std::array<double, 4> expected_c{};
  double c_deviation = 0.0;  // max_k |c_k - expected_c_k|
  double p_deviation = 0.0;
};

/// Deviation above which a steady state is reported as outside the kernel class.
inline constexpr double kKernelPatternTolerance = 5e-2;

TildeReport tilde_report(const DensityMatrix& rho);

struct RunResult {
  TrajectoryRecord trajectory;
  DensityMatrix final_state;
  double final_E = 0.0;
  double final_V = 0.0;
  double final_max_x = 0.0;
  bool converged = false;
  TerminalClass terminal_class = TerminalClass::Other;
  std::optional<double> steady_concurrence{};  // mixed runs
  std::optional<double> theoretical_max{};     // mixed runs: l1 - l3 - 2 sqrt(l2 l4)
  std::optional<TildeReport> tilde{};          // mixed runs
  /// GME runs: indices of samples whose minimizing cut differs from the previous sample's.
  std::vector<std::size_t> partition_switches{};
  /// GME runs: label of the cut at each recorded sample.
  std::vector<std::string> partitions{};
};

/// Closed-loop run of spec. Non-convergence by t_max is reported through
/// `converged`, not thrown. NumericalIntegrityError propagates from the controller.
RunResult run_trajectory(const ExperimentSpec& spec);

/// True iff the last `window` samples all have max_k |x_k| < tol.
/// ParameterError for window < 1.
bool detect_convergence(const TrajectoryRecord& trajectory, double tol, int window);

/// Largest sample-to-sample increase V[i] - V[i-1], skipping the increments
/// that end at the sample indices listed in `excluded`. 0 when nothing is compared.
double max_lyapunov_increase(const TrajectoryRecord& trajectory, const std::vector<std::size_t>& excluded = {});

/// Initial state of the numbered two-Bell combination (rows 1..8): rows 1-4
/// combine b00 with +-b01, rows 5-8 combine b10 with +-b11, and even rows
/// carry the (1 + epsilon) weight on the second Bell state.
/// ParameterError for other rows.
Ket table1_initial(int row, double epsilon);

/// Bell(b_ab) if the fidelity with b_ab exceeds tol_fid; else BellEquivalent if
/// the reduced matrix is I/2 within 1e-3; else Other. Pure two-qubit input.
TerminalClass classify_terminal(const DensityMatrix& rho, double tol_fid = 0.999);

// ---------------------------------------------------------------------------
// Basin scan
// ---------------------------------------------------------------------------

struct BasinPoint {
  std::array<double, 4> weights{};  // squared amplitudes on (b00, b01, b10, b11)
  TerminalClass terminal_class = TerminalClass::Other;
  bool converged = false;
  bool perturbed = false;  // the grid state was separable and received the epsilon kick
  double final_E = 0.0;
};

struct BasinConfig {
  int resolution = 20;
  int random_points = 0;
  std::uint64_t seed = 0;
  int threads = 1;  // <= 0 selects hardware concurrency
  double epsilon = 1e-3;
  PropagationConfig propagation{};
  ConvergenceCriteria convergence{};
};

/// Simplex grid weights with denominator `resolution`, enumerated with the
/// b00 index outermost.
std::vector<std::array<double, 4>> simplex_grid(int resolution);

/// sum_k sqrt(w_k) b_k. When that state is separable the first nonzero
/// component is scaled by (1 + epsilon) before normalization.
Ket basin_initial_state(const std::array<double, 4>& weights, double epsilon, bool* perturbed = nullptr);

/// Grid points followed by seeded uniform simplex samples, each run under the
/// concurrence law on the pure preset. Output order matches input order.
std::vector<BasinPoint> basin_scan(const BasinConfig& cfg);

// ---------------------------------------------------------------------------
// Mixed states
// ---------------------------------------------------------------------------

/// Rescales a spectrum whose sum is within `tol` of 1 (tabulated spectra are
/// rounded to four decimals). ParameterError naming the sum otherwise, and for
/// negative or increasing entries.
std::array<double, 4> normalize_spectrum(const std::array<double, 4>& spectrum, double tol = 1e-3);

/// Q diag(spectrum) Q^dagger for a Haar unitary Q drawn from the seed.
/// ParameterError unless the spectrum is nonnegative, non-increasing and sums to 1 within 1e-9.
DensityMatrix random_density_with_spectrum(const std::array<double, 4>& spectrum, std::uint64_t seed);

/// l1 |b11><b11| + l2 |00><00| + l3 |b10><b10| + l4 |11><11|.
DensityMatrix kernel_mems(const std::array<double, 4>& spectrum);

/// Unitary path from diag(spectrum) (s = 0) to kernel_mems(spectrum) (s = 1).
/// Every point has the given spectrum. ParameterError for s outside [0, 1].
DensityMatrix mems_path_state(const std::array<double, 4>& spectrum, double s);

/// Concurrence below which a path state counts as separable.
inline constexpr double kSeparableConcurrence = 1e-12;

/// Largest s (bisection, 60 halvings) whose path state is still separable;
/// 1 when the kernel state itself is separable.
double separable_boundary(const std::array<double, 4>& spectrum);

enum class MemsMode {
  Kernel,     // the kernel state itself
  Separable,  // the path state at separable_boundary
  Random,     // a seeded point on the path between Separable and Kernel
  Haar,       // random_density_with_spectrum
};

std::string to_string(MemsMode m);
MemsMode parse_mems_mode(std::string_view name);

DensityMatrix mems_initial_state(const std::array<double, 4>& spectrum, MemsMode mode, std::uint64_t seed);

struct MemsConfig {
  PropagationConfig propagation{1e-3, 200.0, 100};
  ConvergenceCriteria convergence{1e-6, 20};
  Preset preset = Preset::MixedBipartite;
  std::uint64_t seed = 0;
};

RunResult mems_experiment(const std::array<double, 4>& spectrum, MemsMode mode, const MemsConfig& cfg = {});

// ---------------------------------------------------------------------------
// Three qubits
// ---------------------------------------------------------------------------

enum class TripartiteInitial { PerturbedProduct, Random };

std::string to_string(TripartiteInitial i);
TripartiteInitial parse_tripartite_initial(std::string_view name);

struct TripartiteConfig {
  PropagationConfig propagation{};
  ConvergenceCriteria convergence{};
  Preset preset = Preset::TripartiteFull;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
};

/// (1 + eps) GHZ+ + GHZ-, normalized: |000> with a small |111> admixture.
Ket perturbed_product(double epsilon);

/// GC or GME law (scenario TripartiteGC / TripartiteGME) from the chosen start.
RunResult tripartite_experiment(Scenario scenario, TripartiteInitial initial, const TripartiteConfig& cfg = {});

}  // namespace entlyap::harness
