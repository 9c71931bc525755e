#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "entlyap/qmat.hpp"

namespace testsupport {

using namespace entlyap::qmat;

inline std::mt19937_64 rng_for(std::uint64_t tag, std::uint64_t i = 0) {
  return std::mt19937_64(split_seed(0x5eedULL ^ tag, i));
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

/// Random pure two-qubit state with prescribed larger Schmidt weight.
inline Ket schmidt_state(double lambda, std::mt19937_64& rng) {
  const ComplexMatrix ua = random_unitary(2, rng);
  const ComplexMatrix ub = random_unitary(2, rng);
  ComplexVector v = std::sqrt(lambda) * tensor_product(ComplexVector(ua.col(0)), ComplexVector(ub.col(0))) +
                    std::sqrt(1.0 - lambda) * tensor_product(ComplexVector(ua.col(1)), ComplexVector(ub.col(1)));
  return Ket::normalized(v);
}

inline DensityMatrix pure(const Ket& k) { return DensityMatrix::from_ket(k); }

/// Random mixed two-qubit state: a random unitary applied to a random
/// strictly ordered spectrum.
inline DensityMatrix random_mixed(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Eigen::VectorXd w(4);
  for (int k = 0; k < 4; ++k) w[k] = u(rng);
  w /= w.sum();
  const ComplexMatrix v = random_unitary(4, rng);
  return DensityMatrix(v * w.cast<Complex>().asDiagonal() * v.adjoint());
}

// Hamiltonians written out independently of the harness presets.
inline std::vector<ComplexMatrix> pure_controls() {
  return {pauli_string("XY") + pauli_string("ZZ"), pauli_string("XZ") + pauli_string("ZX"),
          pauli_string("YZ") + pauli_string("ZY")};
}

inline std::vector<ComplexMatrix> mixed_controls() {
  return {pauli_string("ZX"), pauli_string("ZY"), pauli_string("YZ"),
          pauli_string("XZ"), pauli_string("YY"), pauli_string("YX")};
}

inline std::vector<ComplexMatrix> three_qubit_controls() {
  std::vector<ComplexMatrix> out;
  for (const char* pair : {"XYI+ZZI", "XZI+ZXI", "YZI+ZYI", "IXY+IZZ", "IXZ+IZX", "IYZ+IZY"}) {
    const std::string s(pair);
    out.push_back(pauli_string(s.substr(0, 3)) + pauli_string(s.substr(4, 3)));
  }
  return out;
}

inline ComplexMatrix three_qubit_drift() { return pauli_string("ZZI") + pauli_string("IZZ"); }

}  // namespace testsupport
