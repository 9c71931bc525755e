#include "entlyap/dynamics.hpp"

#include <cmath>
#include <string>

#include "entlyap/error.hpp"

namespace entlyap::dynamics {

using qmat::Complex;

namespace {

int qubits_of(Eigen::Index dim) {
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim || n == 0) {
    throw ParameterError("Hamiltonian dimension " + std::to_string(dim) + " is not a power of two >= 2");
  }
  return n;
}

void require_hermitian(const ComplexMatrix& h, const std::string& what, Eigen::Index dim) {
  if (h.rows() != dim || h.cols() != dim) {
    throw ParameterError(what + " has dimension " + std::to_string(h.rows()) + "x" +
                         std::to_string(h.cols()) + ", expected " + std::to_string(dim));
  }
  if (!h.allFinite() || !qmat::is_hermitian(h, 1e-12)) throw ParameterError(what + " is not Hermitian");
}

}  // namespace

HamiltonianSet::HamiltonianSet(ComplexMatrix drift, std::vector<ComplexMatrix> controls, double coupling_j)
    : drift_(std::move(drift)), controls_(std::move(controls)), coupling_j_(coupling_j) {
  if (drift_.rows() != drift_.cols()) throw ParameterError("drift Hamiltonian is not square");
  nqubits_ = qubits_of(drift_.rows());
  require_hermitian(drift_, "drift Hamiltonian", drift_.rows());
  if (controls_.empty()) throw ParameterError("at least one control Hamiltonian is required");
  for (std::size_t k = 0; k < controls_.size(); ++k) {
    require_hermitian(controls_[k], "control Hamiltonian " + std::to_string(k + 1), drift_.rows());
  }
  const qmat::Spectrum sp = qmat::spectral_decompose(drift_);
  drift_energies_ = sp.values;
  drift_basis_ = sp.vectors;
  controls_in_basis_.reserve(controls_.size());
  for (const auto& h : controls_) controls_in_basis_.push_back(drift_basis_.adjoint() * h * drift_basis_);
}

ComplexMatrix HamiltonianSet::rotate(const ComplexMatrix& m, double t) const {
  const Eigen::Index d = dim();
  ComplexMatrix scaled(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      scaled(i, j) = m(i, j) * std::polar(1.0, (drift_energies_[i] - drift_energies_[j]) * t);
    }
  }
  ComplexMatrix out = drift_basis_ * scaled * drift_basis_.adjoint();
  return qmat::hermitian_part(out);
}

ComplexMatrix HamiltonianSet::interaction_operator(std::size_t k, double t) const {
  if (k >= controls_.size()) {
    throw ParameterError("control index " + std::to_string(k) + " out of range (have " +
                         std::to_string(controls_.size()) + ")");
  }
  return rotate(controls_in_basis_[k], t);
}

std::vector<ComplexMatrix> HamiltonianSet::interaction_operators(double t) const {
  std::vector<ComplexMatrix> out;
  out.reserve(controls_.size());
  for (const auto& m : controls_in_basis_) out.push_back(rotate(m, t));
  return out;
}

ComplexMatrix HamiltonianSet::interaction_generator(const std::vector<double>& u, double t) const {
  if (u.size() != controls_.size()) {
    throw ContractViolation("expected " + std::to_string(controls_.size()) + " control fields, got " +
                            std::to_string(u.size()));
  }
  ComplexMatrix sum = ComplexMatrix::Zero(dim(), dim());
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (u[k] != 0.0) sum += u[k] * controls_in_basis_[k];
  }
  return rotate(sum, t);
}

void PropagationConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive");
  if (!(t_max >= dt) || !std::isfinite(t_max)) throw ParameterError("t_max must be at least dt");
  if (record_every < 1) throw ParameterError("record_every must be >= 1");
}

long long PropagationConfig::num_steps() const { return std::llround(t_max / dt); }

DensityMatrix step(const DensityMatrix& rho, const HamiltonianSet& hs, const std::vector<double>& u,
                   double t, double dt) {
  if (rho.dim() != hs.dim()) throw DimensionError("state and Hamiltonian dimensions differ");
  if (u.size() != hs.num_controls()) {
    throw ContractViolation("expected " + std::to_string(hs.num_controls()) + " control fields, got " +
                            std::to_string(u.size()));
  }
  bool idle = true;
  for (double v : u) idle = idle && v == 0.0;
  if (idle) return rho;
  const ComplexMatrix prop = qmat::unitary_propagator(hs.interaction_generator(u, t + 0.5 * dt), dt);
  return DensityMatrix::trusted(prop * rho.matrix() * prop.adjoint());
}

TrajectoryRecord evolve(const DensityMatrix& rho0, const HamiltonianSet& hs, const Controller& controller,
                        const PropagationConfig& cfg, const Monitor& monitor, const StopCondition& stop) {
  cfg.validate();
  if (rho0.dim() != hs.dim()) throw DimensionError("initial state and Hamiltonian dimensions differ");
  const long long n_steps = cfg.num_steps();

  TrajectoryRecord rec{.samples = {}, .final_state = rho0};
  rec.samples.reserve(static_cast<std::size_t>(n_steps / cfg.record_every + 2));
  DensityMatrix rho = rho0;

  for (long long n = 0;; ++n) {
    const double t = static_cast<double>(n) * cfg.dt;
    ControlOutput c = controller(rho, t);
    if (c.u.size() != hs.num_controls()) {
      throw ContractViolation("controller returned " + std::to_string(c.u.size()) + " fields, expected " +
                              std::to_string(hs.num_controls()));
    }
    const bool last = n == n_steps;
    bool finish = last;
    if (n % cfg.record_every == 0 || last) {
      Observation obs = monitor ? monitor(rho) : Observation{};
      rec.samples.push_back(TrajectorySample{t, rho, c.u, c.x, obs.V, obs.E});
      if (!last && stop && stop(rec)) {
        rec.stopped_early = true;
        finish = true;
      }
    }
    if (finish) {
      rec.final_state = rho;
      rec.final_time = t;
      rec.steps = n;
      return rec;
    }
    rho = step(rho, hs, c.u, t, cfg.dt);
  }
}

}  // namespace entlyap::dynamics
