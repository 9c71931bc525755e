#include "entlyap/control.hpp"

#include <cmath>
#include <sstream>

#include "entlyap/error.hpp"

namespace entlyap::control {

using qmat::Complex;
using qmat::ComplexMatrix;

namespace {

void require_pure(const DensityMatrix& rho, int min_qubits, const char* what) {
  if (rho.nqubits() < min_qubits) {
    throw DimensionError(std::string(what) + ": register too small");
  }
  if (!rho.is_pure()) throw ContractViolation(std::string(what) + ": state is mixed");
}

// Tr(a b) for square matrices of equal size.
Complex trace_of_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

// x = i T for traces T that should be purely imaginary; Re T is the residue.
void finish_residues(Feedback& fb, const std::vector<Complex>& traces) {
  fb.max_residue = 0.0;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    fb.max_residue = std::max(fb.max_residue, std::abs(traces[k].real()));
    fb.x[k] = -traces[k].imag();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Shapes and gains
// ---------------------------------------------------------------------------

FeedbackShape FeedbackShape::linear() {
  return FeedbackShape("linear", [](double x) { return x; });
}

FeedbackShape FeedbackShape::custom(std::string name, std::function<double(double)> h) {
  if (!h) throw ParameterError("feedback shape '" + name + "' has no function");
  if (h(0.0) != 0.0) throw ParameterError("feedback shape '" + name + "' must vanish at 0");
  for (int e = -8; e <= 3; ++e) {
    for (double mant : {1.0, 2.5, 5.0}) {
      for (double sgn : {-1.0, 1.0}) {
        const double x = sgn * mant * std::pow(10.0, e);
        const double hx = h(x);
        if (!std::isfinite(hx) || !(hx * x > 0.0)) {
          std::ostringstream os;
          os << "feedback shape '" << name << "' violates h(x) x > 0 at x = " << x;
          throw ParameterError(os.str());
        }
      }
    }
  }
  return FeedbackShape(std::move(name), std::move(h));
}

ControlGains ControlGains::uniform(std::size_t m, double r, double epsilon) {
  ControlGains g;
  g.r.assign(m, r);
  g.epsilon = epsilon;
  return g;
}

void ControlGains::validate(std::size_t m) const {
  if (r.size() != m) {
    throw ParameterError("expected " + std::to_string(m) + " gains, got " + std::to_string(r.size()));
  }
  for (double v : r) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("gains must be positive and finite");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be >= 0");
}

ControllerSpec ControllerSpec::make(MeasureKind kind, FeedbackShape shape, ControlGains gains) {
  const int sign = kind.is_gf() ? kind.gf_measure().g_prime_sign() : 1;
  return ControllerSpec{std::move(kind), std::move(shape), std::move(gains), sign};
}

// ---------------------------------------------------------------------------
// Feedback signals
// ---------------------------------------------------------------------------

Feedback feedback_pure(const DensityMatrix& rho, const GFMeasure& m, const HamiltonianSet& hs, double t) {
  if (rho.nqubits() != 2) throw DimensionError("feedback_pure: expected a 2-qubit state");
  require_pure(rho, 2, "feedback_pure");
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix fprime = qmat::matrix_function(m.df, measures::reduced_first_qubit(r));
  const auto ops = hs.interaction_operators(t);

  Feedback fb;
  fb.x.assign(ops.size(), 0.0);
  std::vector<Complex> traces(ops.size());
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const ComplexMatrix comm = ops[k] * r - r * ops[k];
    traces[k] = trace_of_product(fprime, measures::reduced_first_qubit(comm));
  }
  finish_residues(fb, traces);
  return fb;
}

Feedback feedback_mixed(const DensityMatrix& rho, const HamiltonianSet& hs, double t) {
  if (rho.nqubits() != 2) throw DimensionError("feedback_mixed: expected a 2-qubit state");
  const measures::TildeDecomposition td = measures::tilde_decompose(rho);
  const auto ops = hs.interaction_operators(t);

  Feedback fb;
  fb.x.assign(ops.size(), 0.0);
  std::vector<Complex> traces(ops.size(), Complex(0.0, 0.0));
  for (int j = 0; j < 4; ++j) {
    const qmat::ComplexVector xj = td.vectors.col(j);
    if (xj.squaredNorm() == 0.0) continue;
    const ComplexMatrix proj = xj * xj.adjoint();
    const ComplexMatrix proj_m = measures::reduced_first_qubit(proj);
    const double weight = (j == 0 ? 1.0 : -1.0) / std::max(td.takagi_values[j], kConcurrenceFloor);
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const ComplexMatrix comm = ops[k] * proj - proj * ops[k];
      traces[k] += weight * trace_of_product(proj_m, measures::reduced_first_qubit(comm));
    }
  }
  finish_residues(fb, traces);
  return fb;
}

Feedback feedback_gc(const DensityMatrix& rho, const HamiltonianSet& hs, double t) {
  require_pure(rho, 2, "feedback_gc");
  const int n = rho.nqubits();
  if (hs.dim() != rho.dim()) throw DimensionError("feedback_gc: state and Hamiltonian dimensions differ");
  const ComplexMatrix& r = rho.matrix();
  const auto ops = hs.interaction_operators(t);

  std::vector<ComplexMatrix> reduced(n);
  for (int j = 0; j < n; ++j) {
    const int keep[] = {j};
    reduced[j] = qmat::reduce_qubits(r, n, keep);
  }
  Feedback fb;
  fb.x.assign(ops.size(), 0.0);
  std::vector<Complex> traces(ops.size(), Complex(0.0, 0.0));
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const ComplexMatrix comm = ops[k] * r - r * ops[k];
    for (int j = 0; j < n; ++j) {
      const int keep[] = {j};
      traces[k] += trace_of_product(reduced[j], qmat::reduce_qubits(comm, n, keep));
    }
  }
  finish_residues(fb, traces);
  return fb;
}

Feedback feedback_gme(const DensityMatrix& rho, const HamiltonianSet& hs, double t) {
  require_pure(rho, 2, "feedback_gme");
  const int n = rho.nqubits();
  if (hs.dim() != rho.dim()) throw DimensionError("feedback_gme: state and Hamiltonian dimensions differ");
  const ComplexMatrix& r = rho.matrix();
  const measures::GmeResult g = measures::gme_concurrence(rho);
  const std::vector<int>& block = g.partition.block;
  const ComplexMatrix rg = qmat::reduce_qubits(r, n, block);
  const auto ops = hs.interaction_operators(t);

  Feedback fb;
  fb.x.assign(ops.size(), 0.0);
  fb.partition = g.partition;
  std::vector<Complex> traces(ops.size());
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const ComplexMatrix comm = ops[k] * r - r * ops[k];
    traces[k] = trace_of_product(rg, qmat::reduce_qubits(comm, n, block));
  }
  finish_residues(fb, traces);
  return fb;
}

Feedback feedback_for(const MeasureKind& kind, const DensityMatrix& rho, const HamiltonianSet& hs, double t) {
  struct Visitor {
    const DensityMatrix& rho;
    const HamiltonianSet& hs;
    double t;
    Feedback operator()(const GFMeasure& m) const { return feedback_pure(rho, m, hs, t); }
    Feedback operator()(const measures::MixedConcurrence&) const { return feedback_mixed(rho, hs, t); }
    Feedback operator()(const measures::GeneralizedConcurrence&) const { return feedback_gc(rho, hs, t); }
    Feedback operator()(const measures::GMEConcurrence&) const { return feedback_gme(rho, hs, t); }
  };
  return std::visit(Visitor{rho, hs, t}, kind.variant());
}

// ---------------------------------------------------------------------------
// Control fields
// ---------------------------------------------------------------------------

std::vector<double> control_pure(const std::vector<double>& x, const ControllerSpec& spec) {
  spec.gains.validate(x.size());
  std::vector<double> u(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) u[k] = -spec.sign_convention * spec.gains.r[k] * spec.shape(x[k]);
  return u;
}

std::vector<double> control_mixed(const std::vector<double>& x, const ControllerSpec& spec) {
  spec.gains.validate(x.size());
  std::vector<double> u(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) u[k] = spec.gains.r[k] * spec.shape(x[k]);
  return u;
}

Ket perturb_initial(const Ket& primary, const Ket& secondary, double epsilon) {
  if (primary.dim() != secondary.dim()) throw ParameterError("perturb_initial: dimensions differ");
  const qmat::ComplexVector v = (1.0 + epsilon) * primary.amplitudes() + secondary.amplitudes();
  if (v.norm() < 1e-12) throw ParameterError("perturb_initial: combination vanishes");
  return Ket::normalized(v);
}

dynamics::Controller make_controller(const ControllerSpec& spec, const HamiltonianSet& hs) {
  spec.gains.validate(hs.num_controls());
  return [spec, hs](const DensityMatrix& rho, double t) {
    Feedback fb = feedback_for(spec.kind, rho, hs, t);
    if (fb.max_residue > kResidueLimit) {
      std::ostringstream os;
      os << "feedback trace has real part " << fb.max_residue << " at t = " << t;
      throw NumericalIntegrityError(os.str());
    }
    std::vector<double> u = spec.kind.is_gf() ? control_pure(fb.x, spec) : control_mixed(fb.x, spec);
    return dynamics::ControlOutput{std::move(u), std::move(fb.x)};
  };
}

}  // namespace entlyap::control
