#include "doctest.h"

#include <cmath>
#include <numbers>

#include "entlyap/error.hpp"
#include "support.hpp"

using namespace entlyap;
using namespace entlyap::qmat;
using testsupport::max_abs_diff;

TEST_CASE("tensor product") {
  CHECK(max_abs_diff(tensor_product(identity(2), identity(2)), identity(4)) == 0.0);

  ComplexMatrix zz = tensor_product(pauli(Pauli::Z), pauli(Pauli::Z));
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect.diagonal() << 1, -1, -1, 1;
  CHECK(max_abs_diff(zz, expect) == 0.0);

  for (int i = 0; i < 50; ++i) {
    auto rng = testsupport::rng_for(1, i);
    ComplexMatrix a = testsupport::random_complex(2, 2, rng);
    ComplexMatrix b = testsupport::random_complex(2, 2, rng);
    CHECK(std::abs(tensor_product(a, b).trace() - a.trace() * b.trace()) < 1e-12);
  }
}

TEST_CASE("tensor product associates across mixed dimensions") {
  for (int i = 0; i < 20; ++i) {
    auto rng = testsupport::rng_for(2, i);
    ComplexMatrix a = testsupport::random_complex(2, 2, rng);
    ComplexMatrix b = testsupport::random_complex(3, 3, rng);
    ComplexMatrix c = testsupport::random_complex(2, 2, rng);
    CHECK(max_abs_diff(tensor_product(tensor_product(a, b), c),
                       tensor_product(a, tensor_product(b, c))) < 1e-12);
  }
}

TEST_CASE("partial trace") {
  const int dims[] = {2, 2};
  const int keep_a[] = {0};
  const int keep_b[] = {1};

  auto r00 = partial_trace(DensityMatrix::from_ket(basis_ket("00")), dims, keep_a);
  CHECK(max_abs_diff(r00, basis_ket("0").projector()) < 1e-15);

  auto rb = partial_trace(DensityMatrix::from_ket(bell_state(0, 0)), dims, keep_a);
  CHECK(max_abs_diff(rb, 0.5 * identity(2)) < 1e-15);

  for (int i = 0; i < 100; ++i) {
    auto rng = testsupport::rng_for(3, i);
    auto rho = DensityMatrix::from_ket(random_ket(4, rng));
    RealVector ea = eigenvalues_hermitian(partial_trace(rho, dims, keep_a));
    RealVector eb = eigenvalues_hermitian(partial_trace(rho, dims, keep_b));
    CHECK((ea - eb).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("partial trace preserves trace and positivity") {
  const int dims[] = {2, 3, 2};
  for (int i = 0; i < 30; ++i) {
    auto rng = testsupport::rng_for(4, i);
    ComplexMatrix g = testsupport::random_complex(12, 12, rng);
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    for (auto keep : {std::vector<int>{0}, std::vector<int>{1}, std::vector<int>{0, 2},
                      std::vector<int>{1, 2}}) {
      ComplexMatrix r = partial_trace(rho, dims, keep);
      CHECK(std::abs(r.trace() - 1.0) < 1e-12);
      CHECK(is_hermitian(r, 1e-12));
      CHECK(eigenvalues_hermitian(r).minCoeff() > -1e-12);
    }
  }
}

TEST_CASE("partial trace of a product recovers the factors") {
  auto rng = testsupport::rng_for(5);
  auto a = random_density(1, rng);
  ComplexMatrix g = testsupport::random_complex(4, 4, rng);
  ComplexMatrix b = g * g.adjoint();
  b /= b.trace().real();
  const int dims[] = {2, 4};
  const int keep0[] = {0};
  const int keep1[] = {1};
  ComplexMatrix ab = tensor_product(a.matrix(), b);
  CHECK(max_abs_diff(partial_trace(ab, dims, keep0), a.matrix()) < 1e-13);
  CHECK(max_abs_diff(partial_trace(ab, dims, keep1), b) < 1e-13);
}

TEST_CASE("partial trace rejects inconsistent dimensions") {
  const int dims[] = {2, 3};
  const int keep[] = {0};
  CHECK_THROWS_AS(partial_trace(identity(4), dims, keep), DimensionError);
  const int dims_ok[] = {2, 2};
  const int bad_keep[] = {2};
  CHECK_THROWS_AS(partial_trace(identity(4), dims_ok, bad_keep), DimensionError);
}

TEST_CASE("spectral decomposition") {
  auto s = spectral_decompose(0.5 * identity(2));
  CHECK(std::abs(s.values[0] - 0.5) < 1e-15);
  CHECK(std::abs(s.values[1] - 0.5) < 1e-15);

  auto sx = spectral_decompose(pauli(Pauli::X));
  CHECK(std::abs(sx.values[0] - 1.0) < 1e-14);
  CHECK(std::abs(sx.values[1] + 1.0) < 1e-14);

  for (int i = 0; i < 50; ++i) {
    auto rng = testsupport::rng_for(6, i);
    ComplexMatrix h = random_hermitian(8, rng);
    auto d = spectral_decompose(h);
    ComplexMatrix rebuilt = d.vectors * d.values.cast<Complex>().asDiagonal() * d.vectors.adjoint();
    CHECK(max_abs_diff(rebuilt, h) < 1e-10);
    CHECK(max_abs_diff(d.vectors.adjoint() * d.vectors, identity(8)) < 1e-12);
    for (Eigen::Index k = 1; k < d.values.size(); ++k) CHECK(d.values[k - 1] >= d.values[k]);
  }

  ComplexMatrix nh = ComplexMatrix::Zero(2, 2);
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(spectral_decompose(nh), ContractViolation);
}

TEST_CASE("degenerate spectra get an orthonormal basis") {
  ComplexMatrix p = bell_state(0, 0).projector() + bell_state(1, 1).projector();
  auto d = spectral_decompose(p);
  CHECK(max_abs_diff(d.vectors.adjoint() * d.vectors, identity(4)) < 1e-12);
}

TEST_CASE("matrix function") {
  auto sq = [](double x) { return x * x; };
  CHECK(max_abs_diff(matrix_function(sq, 0.5 * identity(2)), 0.25 * identity(2)) < 1e-15);

  for (int i = 0; i < 30; ++i) {
    auto rng = testsupport::rng_for(7, i);
    ComplexMatrix h = random_hermitian(4, rng);
    CHECK(max_abs_diff(matrix_function([](double x) { return x; }, h), h) < 1e-12);
    auto rho = random_density(1, rng);
    RealVector ev = eigenvalues_hermitian(rho.matrix());
    CHECK(std::abs(matrix_function(sq, rho.matrix()).trace().real() - ev.squaredNorm()) < 1e-13);
  }

  CHECK_THROWS_AS(matrix_function([](double x) { return std::log(x); }, ComplexMatrix::Zero(2, 2)),
                  DomainError);
}

TEST_CASE("matrix exponential") {
  CHECK(max_abs_diff(matrix_exponential(ComplexMatrix::Zero(4, 4)), identity(4)) < 1e-15);

  ComplexMatrix a = -kI * (std::numbers::pi / 2) * pauli(Pauli::X);
  CHECK(max_abs_diff(matrix_exponential(a), -kI * pauli(Pauli::X)) < 1e-14);

  for (int i = 0; i < 50; ++i) {
    auto rng = testsupport::rng_for(8, i);
    ComplexMatrix gen = -kI * random_hermitian(4, rng);
    ComplexMatrix u = matrix_exponential(gen);
    CHECK(max_abs_diff(u * u.adjoint(), identity(4)) < 1e-10);

    ComplexMatrix h = random_hermitian(4, rng);
    RealVector before = eigenvalues_hermitian(h);
    RealVector after = eigenvalues_hermitian(hermitian_part(u * h * u.adjoint()));
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("matrix exponential agrees with the Pauli closed form") {
  for (double theta : {0.1, 0.7, 1.9, 3.0}) {
    for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
      ComplexMatrix expect = std::cos(theta) * identity(2) - kI * std::sin(theta) * pauli(p);
      CHECK(max_abs_diff(matrix_exponential(-kI * theta * pauli(p)), expect) < 1e-13);
    }
  }
}

TEST_CASE("Schmidt decomposition") {
  auto s00 = schmidt_decompose(basis_ket("00"), 2, 2);
  CHECK(s00.rank == 1);
  CHECK(std::abs(s00.coefficients[0] - 1.0) < 1e-14);

  auto sb = schmidt_decompose(bell_state(0, 0), 2, 2);
  CHECK(sb.rank == 2);
  CHECK(std::abs(sb.coefficients[0] - 0.5) < 1e-14);
  CHECK(std::abs(sb.coefficients[1] - 0.5) < 1e-14);

  const int dims[] = {2, 3};
  const int keep[] = {0};
  for (int i = 0; i < 100; ++i) {
    auto rng = testsupport::rng_for(9, i);
    Ket psi = random_ket(6, rng);
    auto sd = schmidt_decompose(psi, 2, 3);
    ComplexVector rebuilt = ComplexVector::Zero(6);
    double total = 0.0;
    for (int k = 0; k < sd.rank; ++k) {
      rebuilt += std::sqrt(sd.coefficients[k]) *
                 tensor_product(sd.left_basis[k].amplitudes(), sd.right_basis[k].amplitudes());
      total += sd.coefficients[k];
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
    // Up to a global phase.
    const Complex overlap = rebuilt.dot(psi.amplitudes());
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-10);
    CHECK((rebuilt * (overlap / std::abs(overlap)) - psi.amplitudes()).norm() < 1e-10);

    RealVector ev = eigenvalues_hermitian(partial_trace(psi.projector(), dims, keep));
    for (int k = 0; k < sd.rank; ++k) CHECK(std::abs(ev[k] - sd.coefficients[k]) < 1e-10);
  }
}

TEST_CASE("majorization") {
  const double uni[] = {0.5, 0.5};
  const double prod[] = {1.0, 0.0};
  const double a[] = {0.6, 0.4};
  const double b[] = {0.7, 0.3};
  CHECK(majorizes(uni, prod));
  CHECK_FALSE(majorizes(prod, uni));
  CHECK(majorizes(a, b));
  CHECK_FALSE(majorizes(b, a));

  const double unsorted[] = {0.4, 0.6};
  const double short_sum[] = {0.5, 0.4};
  CHECK_THROWS_AS(majorizes(unsorted, prod), ContractViolation);
  CHECK_THROWS_AS(majorizes(short_sum, prod), ContractViolation);
}

TEST_CASE("density matrix validation") {
  CHECK_THROWS(DensityMatrix(identity(4)));
  CHECK_THROWS(DensityMatrix(identity(3) / 3.0));
  ComplexMatrix neg = ComplexMatrix::Zero(2, 2);
  neg.diagonal() << 1.5, -0.5;
  CHECK_THROWS(DensityMatrix(neg));
  CHECK(DensityMatrix::from_ket(bell_state(1, 0)).is_pure());
  CHECK_FALSE(DensityMatrix::maximally_mixed(2).is_pure());
  CHECK_THROWS_AS(Ket(ComplexVector::Ones(2)), ContractViolation);
  CHECK_THROWS_AS(Ket::normalized(ComplexVector::Zero(2)), ParameterError);
}

TEST_CASE("standard states") {
  CHECK(std::abs(bell_state(0, 0)[0] - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(bell_state(1, 1)[2] + 1.0 / std::sqrt(2.0)) < 1e-15);
  Ket w = w_state(3);
  CHECK(std::abs(std::norm(w[1]) - 1.0 / 3.0) < 1e-15);
  Ket g = ghz_state(3);
  CHECK(std::abs(std::norm(g[7]) - 0.5) < 1e-15);
  CHECK(split_seed(7, 1) != split_seed(7, 2));
  CHECK(split_seed(7, 1) == split_seed(7, 1));
}
