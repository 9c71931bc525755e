#pragma once

// Entanglement measures: the (G, f) family for bipartite pure states, the
// two-qubit mixed-state concurrence through Wootters' tilde decomposition,
// and the multipartite generalized / GME concurrences.

#include <array>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "entlyap/qmat.hpp"

namespace entlyap::measures {

using qmat::ComplexMatrix;
using qmat::DensityMatrix;
using qmat::Ket;

/// One member of the family E_G(rho) = G(Tr f(rho_M)).
///
/// For a bipartite pure state whose reduced matrix has eigenvalues
/// (lambda, 1 - lambda) this is G(f(lambda) + f(1 - lambda)). `f` must accept
/// lambda = 0 (continuous extension), its derivatives are only evaluated on
/// the open interval.
struct GFMeasure {
  std::string name;
  std::function<double(double)> G;
  std::function<double(double)> dG;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;

  /// E_G as a function of the larger reduced eigenvalue.
  double value_at(double lambda) const;
  /// 2 f(1/2), the argument of G at maximal entanglement.
  double x_at_max() const;
  /// G(2 f(1/2)).
  double maximum() const;
  /// Sign of G', read at the maximally entangled point.
  int g_prime_sign() const;
};

/// G(X) = sqrt(2(1 - X)), f = lambda^2.
GFMeasure concurrence_measure();
/// G(X) = ln(X) / (1 - alpha), f = lambda^alpha. ParameterError unless alpha > 0, alpha != 1.
GFMeasure renyi_measure(double alpha);
/// G(X) = X / ln 2, f = -lambda ln lambda with 0 ln 0 = 0.
GFMeasure entropy_measure();

struct MixedConcurrence {};
struct GeneralizedConcurrence {};
struct GMEConcurrence {};

/// Selects the measure a Lyapunov function is built from. GF variants are
/// validated on construction.
class MeasureKind {
 public:
  using Variant = std::variant<GFMeasure, MixedConcurrence, GeneralizedConcurrence, GMEConcurrence>;

  /// Throws ParameterError listing the failed conditions if `m` does not validate.
  static MeasureKind gf(GFMeasure m);
  static MeasureKind mixed_concurrence() { return MeasureKind(MixedConcurrence{}); }
  static MeasureKind generalized_concurrence() { return MeasureKind(GeneralizedConcurrence{}); }
  static MeasureKind gme_concurrence() { return MeasureKind(GMEConcurrence{}); }

  const Variant& variant() const { return v_; }
  bool is_gf() const { return std::holds_alternative<GFMeasure>(v_); }
  const GFMeasure& gf_measure() const;
  std::string name() const;

 private:
  explicit MeasureKind(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

// ---------------------------------------------------------------------------
// Axiomatic validation
// ---------------------------------------------------------------------------

struct ConditionCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::string measure;
  int samples = 0;
  /// The five measure conditions, in order: separable states score zero,
  /// positivity, stationary at 1/2, no other extremum, concave at 1/2.
  std::vector<ConditionCheck> conditions;
  /// Structural requirements on (G, f): G monotone, G'(2f(1/2)) f''(1/2) < 0.
  std::vector<ConditionCheck> invariants;
  double concavity_at_half = 0.0;  // E_G''(1/2), central difference
  double maximum = 0.0;            // G(2 f(1/2))

  bool all_passed() const;
};

/// Grid of `samples` uniformly spaced points in (0, 1), central differences
/// with step 1e-5. ParameterError for samples < 100.
ValidationReport validate_gf_measure(const GFMeasure& m, int samples = 1001);

// ---------------------------------------------------------------------------
// Bipartite pure states
// ---------------------------------------------------------------------------

/// Tr_B for a two-qubit matrix.
ComplexMatrix reduced_first_qubit(const ComplexMatrix& rho);

double eg_pure(const DensityMatrix& rho, const GFMeasure& m);
double concurrence_pure(const DensityMatrix& rho);
double renyi(const DensityMatrix& rho, double alpha);
double entropy_of_entanglement(const DensityMatrix& rho);

/// Largest value of the measure on an n-qubit register: G(2 f(1/2)) for GF
/// kinds, 1 for the two-qubit mixed and the GME concurrence, and
/// sqrt((n/2) / (2^(n-1) - 1)) for the generalized concurrence (1 at n = 2).
double measure_max(const MeasureKind& kind, int nqubits);

// ---------------------------------------------------------------------------
// Two-qubit mixed states
// ---------------------------------------------------------------------------

/// (sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y). DimensionError unless two qubits.
ComplexMatrix spin_flip(const DensityMatrix& rho);

/// max{0, mu1 - mu2 - mu3 - mu4}, mu the decreasing square roots of the
/// eigenvalues of rho * spin_flip(rho), computed as the singular values of
/// sqrt(rho) (sigma_y (x) sigma_y) sqrt(rho)*.
double wootters_concurrence(const DensityMatrix& rho);

/// Wootters' optimal decomposition rho = sum_k x_k x_k^dagger, where the
/// subnormalized x_k are tilde-orthogonal and ordered by decreasing
/// |<x_k|x~_k>|. The mixed concurrence is the signed sum
/// p1 c1 - p2 c2 - p3 c3 - p4 c4.
struct TildeDecomposition {
  std::array<double, 4> weights{};          // p_k = <x_k|x_k>
  std::array<double, 4> preconcurrences{};  // c_k = |<y_k|y~_k>|, y_k = x_k / |x_k|
  std::array<double, 4> takagi_values{};    // p_k c_k, descending
  std::vector<Ket> states;                  // y_k
  ComplexMatrix vectors;                    // columns x_k

  double signed_concurrence() const;
};

TildeDecomposition tilde_decompose(const DensityMatrix& rho);

/// p1 c1 - sum_{k>1} p_k c_k from the tilde decomposition, floored at 0.
double concurrence_mixed(const DensityMatrix& rho);

/// max{0, l1 - l3 - 2 sqrt(l2 l4)} for a decreasing spectrum: the largest
/// concurrence reachable on the unitary orbit of that spectrum.
double max_concurrence_for_spectrum(const std::array<double, 4>& spectrum);

// ---------------------------------------------------------------------------
// Multipartite pure states
// ---------------------------------------------------------------------------

/// Split of the register into two nonempty blocks. `block` always contains
/// qubit 0; both blocks are sorted.
struct Bipartition {
  std::vector<int> block;
  std::vector<int> complement;

  /// 1-based label, e.g. "1|2,3".
  std::string label() const;
  bool operator==(const Bipartition&) const = default;
};

/// All 2^(N-1) - 1 nontrivial bipartitions, ordered lexicographically by block.
std::vector<Bipartition> bipartitions(int nqubits);

double generalized_concurrence(const DensityMatrix& rho);

struct GmeResult {
  double value = 0.0;
  Bipartition partition;
};

/// Minimum bipartite concurrence over all bipartitions; ties within 1e-12
/// resolve to the lexicographically smallest partition.
GmeResult gme_concurrence(const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Lyapunov entanglement function
// ---------------------------------------------------------------------------

struct LyapunovValue {
  double V = 0.0;
  double E = 0.0;
  double n_max = 0.0;
};

/// V = N - E(rho). For the mixed concurrence N is the spectrum bound
/// max_concurrence_for_spectrum(eig(rho)); otherwise N = measure_max.
LyapunovValue lef_value(const DensityMatrix& rho, const MeasureKind& kind);

/// E(rho) for any kind (the E part of lef_value).
double entanglement(const DensityMatrix& rho, const MeasureKind& kind);

}  // namespace entlyap::measures
