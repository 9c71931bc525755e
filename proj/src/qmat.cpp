#include "entlyap/qmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "entlyap/error.hpp"

namespace entlyap::qmat {

namespace {

int qubits_for_dim(Eigen::Index dim) {
  int n = 0;
  Eigen::Index d = 1;
  while (d < dim) {
    d *= 2;
    ++n;
  }
  if (d != dim || n == 0) {
    std::ostringstream os;
    os << "dimension " << dim << " is not a power of two >= 2";
    throw DimensionError(os.str());
  }
  return n;
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Modified Gram-Schmidt on the columns, in place.
void orthonormalize_columns(ComplexMatrix& v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const Complex overlap = v.col(j).dot(v.col(k));
      v.col(k) -= overlap * v.col(j);
    }
    v.col(k).normalize();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Ket / DensityMatrix
// ---------------------------------------------------------------------------

Ket::Ket(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) throw DimensionError("ket must have positive dimension");
  if (!amplitudes_.allFinite()) throw ContractViolation("ket amplitudes must be finite");
  const double norm2 = amplitudes_.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "ket is not normalized: squared norm " << norm2;
    throw ContractViolation(os.str());
  }
}

Ket Ket::normalized(const ComplexVector& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-300) throw ParameterError("cannot normalize a zero vector");
  return Ket(v / n);
}

ComplexMatrix Ket::projector() const { return amplitudes_ * amplitudes_.adjoint(); }

DensityMatrix::DensityMatrix(ComplexMatrix mat) : mat_(std::move(mat)) {
  if (mat_.rows() != mat_.cols()) throw DimensionError("density matrix must be square");
  nqubits_ = qubits_for_dim(mat_.rows());
  if (!mat_.allFinite()) throw ContractViolation("density matrix entries must be finite");
  if (!is_hermitian(mat_, 1e-10)) throw ContractViolation("density matrix is not Hermitian");
  const double tr = mat_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "density matrix trace is " << tr << ", expected 1";
    throw ContractViolation(os.str());
  }
  mat_ = hermitian_part(mat_);
  const RealVector ev = eigenvalues_hermitian(mat_);
  if (ev.minCoeff() < -1e-10) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << ev.minCoeff();
    throw ContractViolation(os.str());
  }
}

DensityMatrix::DensityMatrix(ComplexMatrix mat, Unchecked) : mat_(std::move(mat)) {
  nqubits_ = qubits_for_dim(mat_.rows());
}

DensityMatrix DensityMatrix::from_ket(const Ket& psi) {
  qubits_for_dim(psi.dim());
  return DensityMatrix(psi.projector(), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(int nqubits) {
  if (nqubits < 1) throw DimensionError("register needs at least one qubit");
  const Eigen::Index d = Eigen::Index{1} << nqubits;
  return DensityMatrix(identity(d) / static_cast<double>(d), Unchecked{});
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix mat) {
  return DensityMatrix(hermitian_part(mat), Unchecked{});
}

double DensityMatrix::purity() const {
  // Tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho.
  return mat_.squaredNorm();
}

bool DensityMatrix::is_pure() const { return std::abs(purity() - 1.0) < 1e-8; }

// ---------------------------------------------------------------------------
// Tensor structure
// ---------------------------------------------------------------------------

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector tensor_product(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

Ket tensor_product(const Ket& a, const Ket& b) {
  return Ket::normalized(tensor_product(a.amplitudes(), b.amplitudes()));
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep) {
  if (rho.rows() != rho.cols()) throw DimensionError("partial trace needs a square matrix");
  if (dims.empty()) throw DimensionError("partial trace needs at least one subsystem");
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d < 1) throw DimensionError("subsystem dimensions must be positive");
    total *= d;
  }
  if (total != rho.rows()) {
    std::ostringstream os;
    os << "subsystem dims multiply to " << total << " but matrix dimension is " << rho.rows();
    throw DimensionError(os.str());
  }
  const int n = static_cast<int>(dims.size());
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n) throw DimensionError("kept subsystem index out of range");
    kept[k] = true;
  }

  // Split every full index into (kept index, traced index) in mixed radix.
  std::vector<Eigen::Index> kept_idx(total), traced_idx(total);
  Eigen::Index kept_dim = 1;
  for (int s = 0; s < n; ++s) {
    if (kept[s]) kept_dim *= dims[s];
  }
  for (Eigen::Index full = 0; full < total; ++full) {
    Eigen::Index rem = full;
    Eigen::Index kp = 0, tr = 0, kscale = 1, tscale = 1;
    for (int s = n - 1; s >= 0; --s) {
      const Eigen::Index digit = rem % dims[s];
      rem /= dims[s];
      if (kept[s]) {
        kp += digit * kscale;
        kscale *= dims[s];
      } else {
        tr += digit * tscale;
        tscale *= dims[s];
      }
    }
    kept_idx[full] = kp;
    traced_idx[full] = tr;
  }

  ComplexMatrix out = ComplexMatrix::Zero(kept_dim, kept_dim);
  for (Eigen::Index i = 0; i < total; ++i) {
    for (Eigen::Index j = 0; j < total; ++j) {
      if (traced_idx[i] == traced_idx[j]) out(kept_idx[i], kept_idx[j]) += rho(i, j);
    }
  }
  return out;
}

ComplexMatrix reduce_qubits(const ComplexMatrix& rho, int nqubits, std::span<const int> keep) {
  const std::vector<int> dims(nqubits, 2);
  return partial_trace(rho, dims, keep);
}

ComplexMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep) {
  return partial_trace(rho.matrix(), dims, keep);
}

// ---------------------------------------------------------------------------
// Spectral functions
// ---------------------------------------------------------------------------

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) < tol;
}

bool is_finite(const ComplexMatrix& m) { return m.allFinite(); }

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

Spectrum spectral_decompose(const ComplexMatrix& h) {
  if (!h.allFinite()) throw ContractViolation("spectral_decompose: non-finite entries");
  if (!is_hermitian(h, 1e-10)) throw ContractViolation("spectral_decompose: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(h));
  if (solver.info() != Eigen::Success) throw ContractViolation("spectral_decompose: eigensolver failed");
  Spectrum s;
  s.values = solver.eigenvalues().reverse();
  s.vectors = solver.eigenvectors().rowwise().reverse();
  orthonormalize_columns(s.vectors);
  return s;
}

RealVector eigenvalues_hermitian(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(h), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().reverse();
}

ComplexMatrix matrix_function(const std::function<double(double)>& f, const ComplexMatrix& h) {
  const Spectrum s = spectral_decompose(h);
  RealVector fv(s.values.size());
  for (Eigen::Index k = 0; k < fv.size(); ++k) {
    fv[k] = f(s.values[k]);
    if (!std::isfinite(fv[k])) {
      std::ostringstream os;
      os << "matrix_function: f is undefined at eigenvalue " << s.values[k];
      throw DomainError(os.str());
    }
  }
  return s.vectors * fv.asDiagonal() * s.vectors.adjoint();
}

ComplexMatrix matrix_exponential(const ComplexMatrix& a) {
  if (!a.allFinite()) throw ContractViolation("matrix_exponential: non-finite entries");
  if (max_abs(a + a.adjoint()) > 1e-10) {
    throw ContractViolation("matrix_exponential: generator is not skew-Hermitian");
  }
  // a = -i h with h = i a Hermitian.
  return unitary_propagator(kI * a, 1.0);
}

ComplexMatrix unitary_propagator(const ComplexMatrix& h, double t) {
  const Spectrum s = spectral_decompose(h);
  ComplexVector phases(s.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(-kI * (s.values[k] * t));
  return s.vectors * phases.asDiagonal() * s.vectors.adjoint();
}

// ---------------------------------------------------------------------------
// Bipartite pure states
// ---------------------------------------------------------------------------

SchmidtDecomposition schmidt_decompose(const Ket& psi, int dim_a, int dim_b) {
  if (dim_a < 1 || dim_b < 1 || psi.dim() != static_cast<Eigen::Index>(dim_a) * dim_b) {
    throw DimensionError("schmidt_decompose: dimA*dimB must equal the ket dimension");
  }
  ComplexMatrix m(dim_a, dim_b);
  for (int a = 0; a < dim_a; ++a) {
    for (int b = 0; b < dim_b; ++b) m(a, b) = psi[static_cast<Eigen::Index>(a) * dim_b + b];
  }
  // m = U S V^dagger  =>  psi = sum_k s_k u_k (x) conj(v_k)
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();

  SchmidtDecomposition out;
  double total = 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    const double alpha = sv[k] * sv[k];
    if (alpha <= 1e-13) break;
    out.coefficients.push_back(alpha);
    out.left_basis.push_back(Ket::normalized(svd.matrixU().col(k)));
    out.right_basis.push_back(Ket::normalized(svd.matrixV().col(k).conjugate()));
    total += alpha;
  }
  for (double& a : out.coefficients) a /= total;
  out.rank = static_cast<int>(out.coefficients.size());
  return out;
}

bool majorizes(std::span<const double> alpha, std::span<const double> alpha_prime) {
  auto check = [](std::span<const double> v, const char* name) {
    if (v.empty()) throw ContractViolation(std::string(name) + " is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < -1e-12) throw ContractViolation(std::string(name) + " has a negative entry");
      if (i > 0 && v[i] > v[i - 1] + 1e-12) {
        throw ContractViolation(std::string(name) + " is not sorted in decreasing order");
      }
      sum += v[i];
    }
    if (std::abs(sum - 1.0) > 1e-10) {
      std::ostringstream os;
      os << name << " sums to " << sum << ", expected 1";
      throw ContractViolation(os.str());
    }
  };
  check(alpha, "alpha");
  check(alpha_prime, "alphaPrime");

  const std::size_t n = std::max(alpha.size(), alpha_prime.size());
  double sa = 0.0, sb = 0.0;
  for (std::size_t l = 0; l + 1 < n; ++l) {
    sa += l < alpha.size() ? alpha[l] : 0.0;
    sb += l < alpha_prime.size() ? alpha_prime[l] : 0.0;
    if (sa > sb + 1e-12) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Standard operators and states
// ---------------------------------------------------------------------------

ComplexMatrix pauli(Pauli p) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  switch (p) {
    case Pauli::I:
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case Pauli::X:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case Pauli::Y:
      m(0, 1) = -kI;
      m(1, 0) = kI;
      break;
    case Pauli::Z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
  }
  return m;
}

ComplexMatrix pauli_string(std::string_view spec) {
  if (spec.empty()) throw ParameterError("empty Pauli string");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : spec) {
    Pauli p;
    switch (c) {
      case 'I': p = Pauli::I; break;
      case 'X': p = Pauli::X; break;
      case 'Y': p = Pauli::Y; break;
      case 'Z': p = Pauli::Z; break;
      default: throw ParameterError(std::string("unknown Pauli factor '") + c + "'");
    }
    out = tensor_product(out, pauli(p));
  }
  return out;
}

ComplexMatrix identity(Eigen::Index dim) { return ComplexMatrix::Identity(dim, dim); }

Ket basis_ket(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw DimensionError("basis index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v[index] = 1.0;
  return Ket(v);
}

Ket basis_ket(std::string_view bits) {
  if (bits.empty()) throw ParameterError("empty bit string");
  Eigen::Index index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ParameterError("bit string may only contain 0 and 1");
    index = 2 * index + (c - '0');
  }
  return basis_ket(Eigen::Index{1} << bits.size(), index);
}

Ket bell_state(int a, int b) {
  if ((a != 0 && a != 1) || (b != 0 && b != 1)) throw ParameterError("Bell state labels are bits");
  const double s = 1.0 / std::sqrt(2.0);
  const double sign = b == 0 ? 1.0 : -1.0;
  ComplexVector v = ComplexVector::Zero(4);
  if (a == 0) {
    v[0] = s;
    v[3] = sign * s;
  } else {
    v[1] = s;
    v[2] = sign * s;
  }
  return Ket::normalized(v);
}

Ket ghz_state(int nqubits) {
  if (nqubits < 2) throw DimensionError("GHZ state needs at least two qubits");
  const Eigen::Index d = Eigen::Index{1} << nqubits;
  ComplexVector v = ComplexVector::Zero(d);
  v[0] = 1.0;
  v[d - 1] = 1.0;
  return Ket::normalized(v);
}

Ket w_state(int nqubits) {
  if (nqubits < 2) throw DimensionError("W state needs at least two qubits");
  const Eigen::Index d = Eigen::Index{1} << nqubits;
  ComplexVector v = ComplexVector::Zero(d);
  for (int q = 0; q < nqubits; ++q) v[Eigen::Index{1} << q] = 1.0;
  return Ket::normalized(v);
}

// ---------------------------------------------------------------------------
// Random matrices
// ---------------------------------------------------------------------------

namespace {

ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

}  // namespace

ComplexMatrix random_unitary(Eigen::Index dim, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

Ket random_ket(Eigen::Index dim, std::mt19937_64& rng) {
  return Ket::normalized(ginibre(dim, 1, rng).col(0));
}

ComplexMatrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

DensityMatrix random_density(int nqubits, std::mt19937_64& rng) {
  const Eigen::Index d = Eigen::Index{1} << nqubits;
  const ComplexMatrix g = ginibre(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(hermitian_part(rho));
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t counter) {
  // splitmix64 applied to seed + counter * golden gamma
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace entlyap::qmat
