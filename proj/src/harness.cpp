#include "entlyap/harness.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "entlyap/error.hpp"
#include "names.hpp"

namespace entlyap::harness {

using qmat::Complex;
using qmat::ComplexMatrix;
using qmat::ComplexVector;
using qmat::pauli_string;

namespace {

using detail::name_of;
using detail::parse_name;

constexpr std::array<std::pair<Scenario, const char*>, 4> kScenarioNames{{
    {Scenario::PureBipartite, "pureBipartite"},
    {Scenario::MixedBipartite, "mixedBipartite"},
    {Scenario::TripartiteGC, "tripartiteGC"},
    {Scenario::TripartiteGME, "tripartiteGME"},
}};

constexpr std::array<std::pair<Preset, const char*>, 5> kPresetNames{{
    {Preset::PureBipartite, "pureBipartite"},
    {Preset::MixedBipartite, "mixedBipartite"},
    {Preset::MixedGenerators, "mixedGenerators"},
    {Preset::Tripartite, "tripartite"},
    {Preset::TripartiteFull, "tripartiteFull"},
}};

constexpr std::array<std::pair<TerminalClass, const char*>, 7> kClassNames{{
    {TerminalClass::BellB00, "Bell_b00"},
    {TerminalClass::BellB01, "Bell_b01"},
    {TerminalClass::BellB10, "Bell_b10"},
    {TerminalClass::BellB11, "Bell_b11"},
    {TerminalClass::BellEquivalent, "BellEquivalent"},
    {TerminalClass::MEMS, "MEMS"},
    {TerminalClass::Other, "Other"},
}};

constexpr std::array<std::pair<MemsMode, const char*>, 4> kMemsModeNames{{
    {MemsMode::Kernel, "kernel"},
    {MemsMode::Separable, "separable"},
    {MemsMode::Random, "random"},
    {MemsMode::Haar, "haar"},
}};

constexpr std::array<std::pair<TripartiteInitial, const char*>, 2> kTripartiteInitialNames{{
    {TripartiteInitial::PerturbedProduct, "perturbedProduct"},
    {TripartiteInitial::Random, "random"},
}};

// H_k = a + b for each pair; a, b are two-qubit Pauli strings.
constexpr std::array<std::pair<const char*, const char*>, 3> kTwoBodyForms{{{"XY", "ZZ"}, {"XZ", "ZX"}, {"YZ", "ZY"}}};

// i(|m><n| - |n><m|) for all m < n.
std::vector<ComplexMatrix> transfer_generators(Eigen::Index dim) {
  std::vector<ComplexMatrix> out;
  for (Eigen::Index m = 0; m < dim; ++m) {
    for (Eigen::Index n = m + 1; n < dim; ++n) {
      ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
      h(m, n) = qmat::kI;
      h(n, m) = -qmat::kI;
      out.push_back(std::move(h));
    }
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::array<double, 4> spectrum_of(const DensityMatrix& rho) {
  const qmat::RealVector ev = qmat::eigenvalues_hermitian(rho.matrix());
  std::array<double, 4> s{};
  for (int k = 0; k < 4; ++k) s[k] = std::max(0.0, ev[k]);
  return s;
}

}  // namespace

std::string to_string(Scenario s) { return name_of(s, kScenarioNames); }
Scenario parse_scenario(std::string_view name) { return parse_name(name, kScenarioNames, "scenario"); }

int scenario_qubits(Scenario s) {
  return s == Scenario::TripartiteGC || s == Scenario::TripartiteGME ? 3 : 2;
}

std::string to_string(Preset p) { return name_of(p, kPresetNames); }
Preset parse_preset(std::string_view name) { return parse_name(name, kPresetNames, "Hamiltonian preset"); }

Preset default_preset(Scenario s) {
  switch (s) {
    case Scenario::PureBipartite: return Preset::PureBipartite;
    case Scenario::MixedBipartite: return Preset::MixedBipartite;
    case Scenario::TripartiteGC:
    case Scenario::TripartiteGME: return Preset::TripartiteFull;
  }
  throw ParameterError("unknown scenario");
}

HamiltonianSet preset_hamiltonians(Preset p, double coupling_j) {
  if (!std::isfinite(coupling_j)) throw ParameterError("coupling J must be finite");
  const double two_j = 2.0 * coupling_j;
  switch (p) {
    case Preset::PureBipartite: {
      std::vector<ComplexMatrix> controls;
      for (const auto& [a, b] : kTwoBodyForms) controls.push_back(pauli_string(a) + pauli_string(b));
      return HamiltonianSet(two_j * pauli_string("ZZ"), std::move(controls), coupling_j);
    }
    case Preset::MixedBipartite:
      return HamiltonianSet(two_j * pauli_string("ZZ"),
                            {pauli_string("ZX"), pauli_string("ZY"), pauli_string("YZ"), pauli_string("XZ"),
                             pauli_string("YY"), pauli_string("YX")},
                            coupling_j);
    case Preset::MixedGenerators:
      return HamiltonianSet(two_j * pauli_string("ZZ"), transfer_generators(4), coupling_j);
    case Preset::Tripartite:
    case Preset::TripartiteFull: {
      std::vector<ComplexMatrix> controls;
      for (const bool left : {true, false}) {
        for (const auto& [a, b] : kTwoBodyForms) {
          const auto place = [left](const char* form) { return left ? std::string(form) + "I" : "I" + std::string(form); };
          controls.push_back(pauli_string(place(a)) + pauli_string(place(b)));
        }
      }
      if (p == Preset::TripartiteFull) {
        for (auto& g : transfer_generators(8)) controls.push_back(std::move(g));
      }
      return HamiltonianSet(two_j * (pauli_string("ZZI") + pauli_string("IZZ")), std::move(controls), coupling_j);
    }
  }
  throw ParameterError("unknown Hamiltonian preset");
}

std::string to_string(TerminalClass c) { return name_of(c, kClassNames); }
TerminalClass parse_terminal_class(std::string_view name) { return parse_name(name, kClassNames, "terminal class"); }

TerminalClass bell_class(int a, int b) {
  if ((a != 0 && a != 1) || (b != 0 && b != 1)) throw ParameterError("Bell labels are bits");
  return static_cast<TerminalClass>(2 * a + b);
}

// ---------------------------------------------------------------------------
// Specs and runs
// ---------------------------------------------------------------------------

ExperimentSpec ExperimentSpec::make(Scenario scenario, MeasureKind measure, DensityMatrix initial) {
  HamiltonianSet hs = preset_hamiltonians(default_preset(scenario));
  ControllerSpec ctl = ControllerSpec::make(std::move(measure), control::FeedbackShape::linear(),
                                            control::ControlGains::uniform(hs.num_controls()));
  return ExperimentSpec{scenario, std::move(initial), std::move(hs), std::move(ctl)};
}

void ExperimentSpec::validate() const {
  const auto& kind = controller.kind;
  const auto mismatch = [&](const char* wanted) {
    throw ParameterError("scenario " + to_string(scenario) + " requires " + wanted + ", got measure " + kind.name());
  };
  switch (scenario) {
    case Scenario::PureBipartite:
      if (!kind.is_gf()) mismatch("a (G, f) measure");
      break;
    case Scenario::MixedBipartite:
      if (!std::holds_alternative<measures::MixedConcurrence>(kind.variant())) mismatch("the mixed concurrence");
      break;
    case Scenario::TripartiteGC:
      if (!std::holds_alternative<measures::GeneralizedConcurrence>(kind.variant())) {
        mismatch("the generalized concurrence");
      }
      break;
    case Scenario::TripartiteGME:
      if (!std::holds_alternative<measures::GMEConcurrence>(kind.variant())) mismatch("the GME concurrence");
      break;
  }
  if (initial.nqubits() != scenario_qubits(scenario)) {
    throw DimensionError("scenario " + to_string(scenario) + " needs " + std::to_string(scenario_qubits(scenario)) +
                         " qubits, initial state has " + std::to_string(initial.nqubits()));
  }
  if (hamiltonians.dim() != initial.dim()) throw DimensionError("Hamiltonian and initial state dimensions differ");
  if (scenario != Scenario::MixedBipartite && !initial.is_pure()) {
    throw ParameterError("scenario " + to_string(scenario) + " needs a pure initial state");
  }
  controller.gains.validate(hamiltonians.num_controls());
  propagation.validate();
  if (!(convergence.tolerance > 0.0) || convergence.window < 1) {
    throw ParameterError("convergence needs tolerance > 0 and window >= 1");
  }
}

bool detect_convergence(const TrajectoryRecord& trajectory, double tol, int window) {
  if (window < 1) throw ParameterError("convergence window must be >= 1");
  const auto& s = trajectory.samples;
  if (s.size() < static_cast<std::size_t>(window)) return false;
  for (std::size_t i = s.size() - static_cast<std::size_t>(window); i < s.size(); ++i) {
    if (!(max_abs(s[i].x) < tol)) return false;
  }
  return true;
}

double max_lyapunov_increase(const TrajectoryRecord& trajectory, const std::vector<std::size_t>& excluded) {
  const auto& s = trajectory.samples;
  bool compared = false;
  double worst = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (std::find(excluded.begin(), excluded.end(), i) != excluded.end()) continue;
    const double inc = s[i].V - s[i - 1].V;
    worst = compared ? std::max(worst, inc) : inc;
    compared = true;
  }
  return worst;
}

TerminalClass classify_terminal(const DensityMatrix& rho, double tol_fid) {
  if (rho.nqubits() != 2) throw DimensionError("classify_terminal: expected a 2-qubit state");
  if (!rho.is_pure()) throw ContractViolation("classify_terminal: state is mixed");
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const ComplexVector v = qmat::bell_state(a, b).amplitudes();
      if (std::real(v.dot(rho.matrix() * v)) > tol_fid) return bell_class(a, b);
    }
  }
  const ComplexMatrix half = 0.5 * ComplexMatrix::Identity(2, 2);
  if ((measures::reduced_first_qubit(rho.matrix()) - half).cwiseAbs().maxCoeff() < 1e-3) {
    return TerminalClass::BellEquivalent;
  }
  return TerminalClass::Other;
}

TildeReport tilde_report(const DensityMatrix& rho) {
  const measures::TildeDecomposition td = measures::tilde_decompose(rho);
  const std::array<double, 4> l = spectrum_of(rho);
  TildeReport r;
  r.p = td.weights;
  r.c = td.preconcurrences;
  const double s24 = l[1] + l[3];
  const double kappa = s24 > 0.0 ? 2.0 * std::sqrt(l[1] * l[3]) / s24 : 0.0;
  r.expected_c = {1.0, 1.0, kappa, kappa};
  r.expected_p = {l[0], l[2], 0.5 * s24, 0.5 * s24};
  for (int k = 0; k < 4; ++k) {
    r.c_deviation = std::max(r.c_deviation, std::abs(r.c[k] - r.expected_c[k]));
    r.p_deviation = std::max(r.p_deviation, std::abs(r.p[k] - r.expected_p[k]));
  }
  return r;
}

RunResult run_trajectory(const ExperimentSpec& spec) {
  spec.validate();
  const MeasureKind& kind = spec.controller.kind;
  const dynamics::Controller ctl = control::make_controller(spec.controller, spec.hamiltonians);
  const dynamics::Monitor monitor = [&kind](const DensityMatrix& rho) {
    const measures::LyapunovValue lv = measures::lef_value(rho, kind);
    return dynamics::Observation{lv.V, lv.E};
  };
  dynamics::StopCondition stop;
  if (spec.stop_on_convergence) {
    stop = [&spec](const TrajectoryRecord& rec) {
      return detect_convergence(rec, spec.convergence.tolerance, spec.convergence.window);
    };
  }

  TrajectoryRecord traj = dynamics::evolve(spec.initial, spec.hamiltonians, ctl, spec.propagation, monitor, stop);
  DensityMatrix final_state = traj.final_state;
  RunResult out{.trajectory = std::move(traj), .final_state = std::move(final_state)};
  const TrajectoryRecord& rec = out.trajectory;
  const dynamics::TrajectorySample& last = rec.samples.back();
  out.final_E = last.E;
  out.final_V = last.V;
  out.final_max_x = max_abs(last.x);
  out.converged = detect_convergence(rec, spec.convergence.tolerance, spec.convergence.window);

  switch (spec.scenario) {
    case Scenario::PureBipartite:
      out.terminal_class = out.converged ? classify_terminal(out.final_state) : TerminalClass::Other;
      break;
    case Scenario::MixedBipartite: {
      out.steady_concurrence = measures::concurrence_mixed(out.final_state);
      out.theoretical_max = measures::max_concurrence_for_spectrum(spectrum_of(spec.initial));
      out.tilde = tilde_report(out.final_state);
      const bool at_max = *out.steady_concurrence >= *out.theoretical_max - 1e-2;
      out.terminal_class = out.converged && at_max ? TerminalClass::MEMS : TerminalClass::Other;
      break;
    }
    case Scenario::TripartiteGC:
    case Scenario::TripartiteGME:
      out.terminal_class = TerminalClass::Other;
      break;
  }
  if (spec.scenario == Scenario::TripartiteGME) {
    out.partitions.reserve(rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
      out.partitions.push_back(measures::gme_concurrence(rec.samples[i].rho).partition.label());
      if (i > 0 && out.partitions[i] != out.partitions[i - 1]) out.partition_switches.push_back(i);
    }
  }
  return out;
}

Ket table1_initial(int row, double epsilon) {
  if (row < 1 || row > 8) throw ParameterError("table row must be in 1..8, got " + std::to_string(row));
  const int a = row <= 4 ? 0 : 1;
  const bool minus = (row - 1) % 4 >= 2;
  const Ket first = qmat::bell_state(a, 0);
  const Ket second = minus ? Ket(-qmat::bell_state(a, 1).amplitudes()) : qmat::bell_state(a, 1);
  if (row % 2 == 1) return control::perturb_initial(first, second, epsilon);
  return control::perturb_initial(second, first, epsilon);
}

// ---------------------------------------------------------------------------
// Basin scan
// ---------------------------------------------------------------------------

std::vector<std::array<double, 4>> simplex_grid(int resolution) {
  if (resolution < 2) throw ParameterError("basin resolution must be >= 2");
  std::vector<std::array<double, 4>> out;
  const double r = resolution;
  for (int i = resolution; i >= 0; --i) {
    for (int j = resolution - i; j >= 0; --j) {
      for (int k = resolution - i - j; k >= 0; --k) {
        const int l = resolution - i - j - k;
        out.push_back({i / r, j / r, k / r, l / r});
      }
    }
  }
  return out;
}

Ket basin_initial_state(const std::array<double, 4>& weights, double epsilon, bool* perturbed) {
  std::array<double, 4> amp{};
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (!(weights[k] >= 0.0)) throw ParameterError("basin weights must be nonnegative");
    amp[k] = std::sqrt(weights[k]);
    total += weights[k];
  }
  if (!(total > 0.0)) throw ParameterError("basin weights must not all vanish");

  const auto combine = [&] {
    ComplexVector v = ComplexVector::Zero(4);
    for (int k = 0; k < 4; ++k) v += amp[k] * qmat::bell_state(k / 2, k % 2).amplitudes();
    return Ket::normalized(v);
  };
  Ket psi = combine();
  const bool separable = measures::concurrence_pure(DensityMatrix::from_ket(psi)) < 1e-9;
  if (separable) {
    for (int k = 0; k < 4; ++k) {
      if (amp[k] > 0.0) {
        amp[k] *= 1.0 + epsilon;
        break;
      }
    }
    psi = combine();
  }
  if (perturbed) *perturbed = separable;
  return psi;
}

std::vector<BasinPoint> basin_scan(const BasinConfig& cfg) {
  if (cfg.random_points < 0) throw ParameterError("random_points must be >= 0");
  if (!(cfg.epsilon >= 0.0)) throw ParameterError("epsilon must be >= 0");
  cfg.propagation.validate();

  std::vector<std::array<double, 4>> inputs = simplex_grid(cfg.resolution);
  for (int i = 0; i < cfg.random_points; ++i) {
    std::mt19937_64 rng(qmat::split_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    std::exponential_distribution<double> e(1.0);
    std::array<double, 4> w{};
    double s = 0.0;
    for (double& v : w) s += (v = e(rng));
    for (double& v : w) v /= s;
    inputs.push_back(w);
  }

  const MeasureKind kind = MeasureKind::gf(measures::concurrence_measure());
  std::vector<BasinPoint> out(inputs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  const auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        BasinPoint& pt = out[i];
        pt.weights = inputs[i];
        const Ket psi = basin_initial_state(inputs[i], cfg.epsilon, &pt.perturbed);
        ExperimentSpec spec = ExperimentSpec::make(Scenario::PureBipartite, kind, DensityMatrix::from_ket(psi));
        spec.propagation = cfg.propagation;
        spec.convergence = cfg.convergence;
        const RunResult r = run_trajectory(spec);
        pt.terminal_class = r.terminal_class;
        pt.converged = r.converged;
        pt.final_E = r.final_E;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = inputs.size();
      }
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(1, inputs.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------
// Mixed states
// ---------------------------------------------------------------------------

namespace {

void require_spectrum(const std::array<double, 4>& s) {
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (!(s[k] >= 0.0) || !std::isfinite(s[k])) throw ParameterError("spectrum entries must be nonnegative");
    if (k > 0 && s[k] > s[k - 1]) throw ParameterError("spectrum must be non-increasing");
    sum += s[k];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os.precision(12);
    os << "spectrum sums to " << sum << ", expected 1";
    throw ParameterError(os.str());
  }
}

}  // namespace

std::array<double, 4> normalize_spectrum(const std::array<double, 4>& spectrum, double tol) {
  const double sum = spectrum[0] + spectrum[1] + spectrum[2] + spectrum[3];
  if (!(std::abs(sum - 1.0) <= tol)) {
    std::ostringstream os;
    os.precision(12);
    os << "spectrum sums to " << sum << ", which is not within " << tol << " of 1";
    throw ParameterError(os.str());
  }
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) out[k] = spectrum[k] / sum;
  require_spectrum(out);
  return out;
}

DensityMatrix random_density_with_spectrum(const std::array<double, 4>& spectrum, std::uint64_t seed) {
  require_spectrum(spectrum);
  std::mt19937_64 rng(qmat::split_seed(seed, 0));
  const ComplexMatrix q = qmat::random_unitary(4, rng);
  const Eigen::Vector4d l(spectrum[0], spectrum[1], spectrum[2], spectrum[3]);
  return DensityMatrix(qmat::hermitian_part(q * l.cast<Complex>().asDiagonal() * q.adjoint()));
}

DensityMatrix kernel_mems(const std::array<double, 4>& spectrum) {
  require_spectrum(spectrum);
  const ComplexMatrix m = spectrum[0] * qmat::bell_state(1, 1).projector() +
                          spectrum[1] * qmat::basis_ket("00").projector() +
                          spectrum[2] * qmat::bell_state(1, 0).projector() +
                          spectrum[3] * qmat::basis_ket("11").projector();
  return DensityMatrix(m);
}

std::string to_string(MemsMode m) { return name_of(m, kMemsModeNames); }
MemsMode parse_mems_mode(std::string_view name) { return parse_name(name, kMemsModeNames, "MEMS initial mode"); }

DensityMatrix mems_path_state(const std::array<double, 4>& spectrum, double s) {
  require_spectrum(spectrum);
  if (!(s >= 0.0 && s <= 1.0)) throw ParameterError("path parameter must lie in [0, 1]");
  // Maps |00>, |01>, |10>, |11> onto the kernel eigenvectors. The sign of b11
  // makes det V = +1, so no eigenvalue sits on the branch cut at -1.
  ComplexMatrix v(4, 4);
  v.col(0) = -qmat::bell_state(1, 1).amplitudes();
  v.col(1) = qmat::basis_ket("00").amplitudes();
  v.col(2) = qmat::bell_state(1, 0).amplitudes();
  v.col(3) = qmat::basis_ket("11").amplitudes();
  const Eigen::ComplexSchur<ComplexMatrix> schur(v);
  ComplexVector phases(4);
  for (int j = 0; j < 4; ++j) phases[j] = std::polar(1.0, s * std::arg(schur.matrixT()(j, j)));
  const ComplexMatrix w = schur.matrixU() * phases.asDiagonal() * schur.matrixU().adjoint();
  const Eigen::Vector4d l(spectrum[0], spectrum[1], spectrum[2], spectrum[3]);
  return DensityMatrix(qmat::hermitian_part(w * l.cast<Complex>().asDiagonal() * w.adjoint()));
}

double separable_boundary(const std::array<double, 4>& spectrum) {
  require_spectrum(spectrum);
  if (measures::concurrence_mixed(mems_path_state(spectrum, 1.0)) < kSeparableConcurrence) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (measures::concurrence_mixed(mems_path_state(spectrum, mid)) < kSeparableConcurrence ? lo : hi) = mid;
  }
  return lo;
}

DensityMatrix mems_initial_state(const std::array<double, 4>& spectrum, MemsMode mode, std::uint64_t seed) {
  switch (mode) {
    case MemsMode::Kernel: return kernel_mems(spectrum);
    case MemsMode::Separable: return mems_path_state(spectrum, separable_boundary(spectrum));
    case MemsMode::Random: {
      const double s0 = separable_boundary(spectrum);
      std::mt19937_64 rng(qmat::split_seed(seed, 2));
      return mems_path_state(spectrum, s0 + (1.0 - s0) * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    }
    case MemsMode::Haar: return random_density_with_spectrum(spectrum, seed);
  }
  throw ParameterError("unknown MEMS mode");
}

RunResult mems_experiment(const std::array<double, 4>& spectrum, MemsMode mode, const MemsConfig& cfg) {
  DensityMatrix rho0 = mems_initial_state(spectrum, mode, cfg.seed);
  HamiltonianSet hs = preset_hamiltonians(cfg.preset);
  if (hs.nqubits() != 2) throw ParameterError("MEMS runs need a two-qubit preset, got " + to_string(cfg.preset));
  ControllerSpec ctl = ControllerSpec::make(MeasureKind::mixed_concurrence(), control::FeedbackShape::linear(),
                                            control::ControlGains::uniform(hs.num_controls()));
  const ExperimentSpec spec{Scenario::MixedBipartite, std::move(rho0), std::move(hs), std::move(ctl),
                            cfg.propagation, cfg.convergence};
  return run_trajectory(spec);
}

// ---------------------------------------------------------------------------
// Three qubits
// ---------------------------------------------------------------------------

std::string to_string(TripartiteInitial i) { return name_of(i, kTripartiteInitialNames); }
TripartiteInitial parse_tripartite_initial(std::string_view name) {
  return parse_name(name, kTripartiteInitialNames, "tripartite initial state");
}

Ket perturbed_product(double epsilon) {
  const ComplexVector plus = qmat::ghz_state(3).amplitudes();
  ComplexVector minus = plus;
  minus[7] = -minus[7];
  return control::perturb_initial(Ket(plus), Ket(minus), epsilon);
}

RunResult tripartite_experiment(Scenario scenario, TripartiteInitial initial, const TripartiteConfig& cfg) {
  MeasureKind kind = scenario == Scenario::TripartiteGC    ? MeasureKind::generalized_concurrence()
                     : scenario == Scenario::TripartiteGME ? MeasureKind::gme_concurrence()
                                                           : throw ParameterError(
                                                                 "tripartite_experiment needs tripartiteGC or "
                                                                 "tripartiteGME, got " +
                                                                 to_string(scenario));
  Ket psi = [&] {
    if (initial == TripartiteInitial::PerturbedProduct) return perturbed_product(cfg.epsilon);
    std::mt19937_64 rng(qmat::split_seed(cfg.seed, 0));
    return qmat::random_ket(8, rng);
  }();
  HamiltonianSet hs = preset_hamiltonians(cfg.preset);
  if (hs.nqubits() != 3) throw ParameterError("tripartite runs need a three-qubit preset, got " + to_string(cfg.preset));
  ControllerSpec ctl = ControllerSpec::make(std::move(kind), control::FeedbackShape::linear(),
                                            control::ControlGains::uniform(hs.num_controls()));
  const ExperimentSpec spec{scenario, DensityMatrix::from_ket(psi), std::move(hs), std::move(ctl), cfg.propagation,
                            cfg.convergence};
  return run_trajectory(spec);
}

}  // namespace entlyap::harness
