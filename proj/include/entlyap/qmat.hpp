#pragma once

// Dense complex linear algebra and qubit-register primitives.
//
// Conventions: qubit 0 is the leftmost tensor factor, so the two-qubit basis
// is ordered |00>, |01>, |10>, |11>. Eigenvalues are always returned in
// descending order.

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace entlyap::qmat {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Normalized state vector.
class Ket {
 public:
  /// Throws ContractViolation unless the squared amplitudes sum to 1 within 1e-12.
  explicit Ket(ComplexVector amplitudes);

  /// Rescales `v` to unit norm. Throws ParameterError on a (numerically) zero vector.
  static Ket normalized(const ComplexVector& v);

  Eigen::Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }

  /// |v><v|
  ComplexMatrix projector() const;

 private:
  ComplexVector amplitudes_;
};

/// Hermitian, positive-semidefinite, unit-trace matrix over an n-qubit register.
class DensityMatrix {
 public:
  /// Validates every invariant; nqubits is inferred from the dimension.
  explicit DensityMatrix(ComplexMatrix mat);

  static DensityMatrix from_ket(const Ket& psi);
  static DensityMatrix maximally_mixed(int nqubits);

  /// For matrices that are valid by construction (unitary images of valid
  /// states). Only the Hermitian part of `mat` is kept; nothing else is checked.
  static DensityMatrix trusted(ComplexMatrix mat);

  int nqubits() const { return nqubits_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const ComplexMatrix& matrix() const { return mat_; }

  /// Tr(rho^2).
  double purity() const;
  /// Tr(rho^2) = 1 within 1e-8.
  bool is_pure() const;

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix mat, Unchecked);

  int nqubits_ = 0;
  ComplexMatrix mat_;
};

struct Spectrum {
  RealVector values;     // descending
  ComplexMatrix vectors; // orthonormal columns, vectors.col(k) pairs with values[k]
};

struct SchmidtDecomposition {
  int rank = 0;
  std::vector<double> coefficients;  // alpha_k, strictly positive, non-increasing, sum 1
  std::vector<Ket> left_basis;
  std::vector<Ket> right_basis;
};

// ---------------------------------------------------------------------------
// Tensor structure
// ---------------------------------------------------------------------------

/// Kronecker product, left factor outer.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector tensor_product(const ComplexVector& a, const ComplexVector& b);
Ket tensor_product(const Ket& a, const Ket& b);

/// Traces out every subsystem not listed in `keep`. Kept subsystems appear in
/// ascending index order in the result. Throws DimensionError when the product
/// of `dims` differs from the matrix dimension or `keep` names a bad index.
ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep);

/// Same, for an n-qubit matrix.
ComplexMatrix reduce_qubits(const ComplexMatrix& rho, int nqubits, std::span<const int> keep);
ComplexMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep);

// ---------------------------------------------------------------------------
// Spectral functions
// ---------------------------------------------------------------------------

bool is_hermitian(const ComplexMatrix& m, double tol = 1e-10);
bool is_finite(const ComplexMatrix& m);
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// Throws ContractViolation for input that is not Hermitian within 1e-10.
Spectrum spectral_decompose(const ComplexMatrix& h);

/// Eigenvalues only, descending.
RealVector eigenvalues_hermitian(const ComplexMatrix& h);

/// sum_k f(lambda_k) |lambda_k><lambda_k|. Throws DomainError when f returns a
/// non-finite value at some eigenvalue.
ComplexMatrix matrix_function(const std::function<double(double)>& f, const ComplexMatrix& h);

/// exp(a) for skew-Hermitian `a`, through the spectrum of the Hermitian
/// generator i*a. The result is unitary to eigensolver precision.
ComplexMatrix matrix_exponential(const ComplexMatrix& a);

/// exp(-i h t) for Hermitian h.
ComplexMatrix unitary_propagator(const ComplexMatrix& h, double t);

// ---------------------------------------------------------------------------
// Bipartite pure states
// ---------------------------------------------------------------------------

SchmidtDecomposition schmidt_decompose(const Ket& psi, int dim_a, int dim_b);

/// Nielsen's criterion: true iff every prefix sum of `alpha` is bounded by the
/// matching prefix sum of `alpha_prime`. Both must be sorted descending and
/// sum to one (ContractViolation otherwise).
bool majorizes(std::span<const double> alpha, std::span<const double> alpha_prime);

// ---------------------------------------------------------------------------
// Standard operators and states
// ---------------------------------------------------------------------------

enum class Pauli { I, X, Y, Z };

ComplexMatrix pauli(Pauli p);
/// Tensor product of Pauli factors spelled as a string, e.g. "XZ" = sigma_x (x) sigma_z.
ComplexMatrix pauli_string(std::string_view spec);
ComplexMatrix identity(Eigen::Index dim);

Ket basis_ket(Eigen::Index dim, Eigen::Index index);
/// Computational basis state of an n-qubit register from its bit string, e.g. "010".
Ket basis_ket(std::string_view bits);

/// Bell states: b00 = (|00>+|11>)/sqrt2, b01 = (|00>-|11>)/sqrt2,
/// b10 = (|01>+|10>)/sqrt2, b11 = (|01>-|10>)/sqrt2.
Ket bell_state(int a, int b);
Ket ghz_state(int nqubits);
Ket w_state(int nqubits);

// ---------------------------------------------------------------------------
// Random matrices
// ---------------------------------------------------------------------------

/// Haar-distributed unitary (QR of a complex Ginibre matrix with phase fix).
ComplexMatrix random_unitary(Eigen::Index dim, std::mt19937_64& rng);
/// Uniformly distributed pure state.
Ket random_ket(Eigen::Index dim, std::mt19937_64& rng);
/// Hermitian matrix with independent standard normal entries (GUE-like).
ComplexMatrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng);
/// Full-rank mixed state, Hilbert-Schmidt distributed.
DensityMatrix random_density(int nqubits, std::mt19937_64& rng);

/// Deterministic 64-bit mix used to fan one seed out into independent streams.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t counter);

}  // namespace entlyap::qmat
