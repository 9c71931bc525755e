#pragma once

// Drift/control Hamiltonians, interaction-picture operators and the
// piecewise-constant unitary integrator of the controlled von Neumann equation.

#include <cstddef>
#include <functional>
#include <vector>

#include "entlyap/qmat.hpp"

namespace entlyap::dynamics {

using qmat::ComplexMatrix;
using qmat::DensityMatrix;

/// H = H0 + sum_k u_k H_k with hbar = 1. The drift spectrum is cached so that
/// A_k(t) = exp(i H0 t) H_k exp(-i H0 t) costs two diagonal scalings.
class HamiltonianSet {
 public:
  /// Throws ParameterError for non-Hermitian members (1e-12), mismatched or
  /// non-qubit dimensions, or an empty control list.
  HamiltonianSet(ComplexMatrix drift, std::vector<ComplexMatrix> controls, double coupling_j = 0.0);

  const ComplexMatrix& drift() const { return drift_; }
  const std::vector<ComplexMatrix>& controls() const { return controls_; }
  std::size_t num_controls() const { return controls_.size(); }
  Eigen::Index dim() const { return drift_.rows(); }
  int nqubits() const { return nqubits_; }
  double coupling_j() const { return coupling_j_; }

  /// A_k(t). ParameterError for k out of range.
  ComplexMatrix interaction_operator(std::size_t k, double t) const;
  std::vector<ComplexMatrix> interaction_operators(double t) const;
  /// sum_k u_k A_k(t), assembled in the drift eigenbasis.
  ComplexMatrix interaction_generator(const std::vector<double>& u, double t) const;

 private:
  ComplexMatrix rotate(const ComplexMatrix& in_eigenbasis, double t) const;

  ComplexMatrix drift_;
  std::vector<ComplexMatrix> controls_;
  double coupling_j_ = 0.0;
  int nqubits_ = 0;
  qmat::RealVector drift_energies_;
  ComplexMatrix drift_basis_;
  std::vector<ComplexMatrix> controls_in_basis_;  // V^dagger H_k V
};

inline ComplexMatrix interaction_operator(const HamiltonianSet& hs, std::size_t k, double t) {
  return hs.interaction_operator(k, t);
}

struct PropagationConfig {
  double dt = 1e-3;
  double t_max = 20.0;
  int record_every = 10;

  /// ParameterError unless 0 < dt <= t_max and record_every >= 1.
  void validate() const;
  /// round(t_max / dt)
  long long num_steps() const;
};

/// rho' = U rho U^dagger with U = exp(-i sum_k u_k A_k(t + dt/2) dt).
/// ContractViolation when u does not have one entry per control.
DensityMatrix step(const DensityMatrix& rho, const HamiltonianSet& hs, const std::vector<double>& u,
                   double t, double dt);

/// Controller output: the applied fields u_k and the feedback signals x_k
/// they were computed from (x may be empty for open-loop controllers).
struct ControlOutput {
  std::vector<double> u;
  std::vector<double> x;
};

struct Observation {
  double V = 0.0;
  double E = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  DensityMatrix rho;
  std::vector<double> u;
  std::vector<double> x;
  double V = 0.0;
  double E = 0.0;
};

struct TrajectoryRecord {
  std::vector<TrajectorySample> samples;
  DensityMatrix final_state;
  double final_time = 0.0;
  long long steps = 0;
  bool stopped_early = false;
};

using Controller = std::function<ControlOutput(const DensityMatrix& rho, double t)>;
using Monitor = std::function<Observation(const DensityMatrix& rho)>;
/// Consulted after each recorded sample; returning true ends the run.
using StopCondition = std::function<bool(const TrajectoryRecord& record)>;

/// Closed loop: at every step the controller sees the current state, and its
/// fields are held constant over the next dt. Samples are taken every
/// record_every steps (including t = 0) and at the final time.
TrajectoryRecord evolve(const DensityMatrix& rho0, const HamiltonianSet& hs, const Controller& controller,
                        const PropagationConfig& cfg, const Monitor& monitor = {},
                        const StopCondition& stop = {});

}  // namespace entlyap::dynamics
