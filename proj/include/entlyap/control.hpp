#pragma once

// Lyapunov feedback laws built from entanglement measures.
//
// Every law has the form x_k = i Tr(...) with a trace that is purely
// imaginary in exact arithmetic; the real part of the computed trace is
// reported as the residue and must stay below 1e-6.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "entlyap/dynamics.hpp"
#include "entlyap/measures.hpp"

namespace entlyap::control {

using dynamics::HamiltonianSet;
using measures::GFMeasure;
using measures::MeasureKind;
using qmat::DensityMatrix;
using qmat::Ket;

/// Residue above which a feedback trace is rejected.
inline constexpr double kResidueLimit = 1e-6;
/// Floor on the component concurrences dividing the mixed-state law.
inline constexpr double kConcurrenceFloor = 1e-8;

/// h in u_k = r_k h(x_k). Must satisfy h(x) x >= 0 and h(x) = 0 iff x = 0.
class FeedbackShape {
 public:
  /// h(x) = x
  static FeedbackShape linear();
  /// ParameterError when h violates the sign conditions on a symmetric grid.
  static FeedbackShape custom(std::string name, std::function<double(double)> h);

  double operator()(double x) const { return h_(x); }
  const std::string& name() const { return name_; }

 private:
  FeedbackShape(std::string name, std::function<double(double)> h) : name_(std::move(name)), h_(std::move(h)) {}
  std::string name_;
  std::function<double(double)> h_;
};

struct ControlGains {
  std::vector<double> r;
  double epsilon = 1e-3;

  static ControlGains uniform(std::size_t m, double r = 5.0, double epsilon = 1e-3);
  /// ParameterError unless r has m strictly positive entries and epsilon >= 0.
  void validate(std::size_t m) const;
};

struct ControllerSpec {
  MeasureKind kind;
  FeedbackShape shape;
  ControlGains gains;
  int sign_convention = 1;  // sgn(G') for GF kinds, +1 otherwise

  /// Derives the sign convention from the measure.
  static ControllerSpec make(MeasureKind kind, FeedbackShape shape, ControlGains gains);
};

struct Feedback {
  std::vector<double> x;
  double max_residue = 0.0;
  /// Cut the GME law differentiated through.
  std::optional<measures::Bipartition> partition;
};

/// x_k = i Tr(f'(rho_M) (A_k rho - rho A_k)_M). Pure two-qubit input.
Feedback feedback_pure(const DensityMatrix& rho, const GFMeasure& m, const HamiltonianSet& hs, double t);

/// x_k = i sum_j s_j / max(C_j, 1e-8) Tr((X_j)_M (A_k X_j - X_j A_k)_M), where
/// X_j = x_j x_j^dagger are the tilde-decomposition terms of the current rho,
/// C_j = |<x_j|x~_j>| and s = (+1, -1, -1, -1). Along the controlled flow
/// d/dt (p1 c1 - sum p_k c_k) = 2 sum_k u_k x_k.
Feedback feedback_mixed(const DensityMatrix& rho, const HamiltonianSet& hs, double t);

/// x_k = i sum_j Tr(rho_j (A_k rho - rho A_k)_j) over single-qubit reductions.
Feedback feedback_gc(const DensityMatrix& rho, const HamiltonianSet& hs, double t);

/// x_k = i Tr(rho_g (A_k rho - rho A_k)_g) on the current minimizing cut g.
Feedback feedback_gme(const DensityMatrix& rho, const HamiltonianSet& hs, double t);

/// u_k = -sgn(G') r_k h(x_k)
std::vector<double> control_pure(const std::vector<double>& x, const ControllerSpec& spec);
/// u_k = r_k h(x_k), used by the mixed and multipartite laws.
std::vector<double> control_mixed(const std::vector<double>& x, const ControllerSpec& spec);

/// normalize((1 + epsilon) primary + secondary). ParameterError if the
/// combination vanishes or the dimensions differ.
Ket perturb_initial(const Ket& primary, const Ket& secondary, double epsilon);

/// Closed-loop controller for `spec`: recomputes the feedback from each state
/// and throws NumericalIntegrityError when a residue exceeds 1e-6.
dynamics::Controller make_controller(const ControllerSpec& spec, const HamiltonianSet& hs);

/// Feedback for whichever law `kind` selects.
Feedback feedback_for(const MeasureKind& kind, const DensityMatrix& rho, const HamiltonianSet& hs, double t);

}  // namespace entlyap::control
