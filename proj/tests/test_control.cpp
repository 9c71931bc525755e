#include "doctest.h"

#include <cmath>
#include <numeric>

#include "entlyap/control.hpp"
#include "entlyap/error.hpp"
#include "support.hpp"

using namespace entlyap;
using namespace entlyap::control;
using namespace entlyap::qmat;
using dynamics::step;
using testsupport::pure;

namespace {

HamiltonianSet pure_set() { return HamiltonianSet(pauli_string("ZZ"), testsupport::pure_controls(), 0.5); }
HamiltonianSet mixed_set() { return HamiltonianSet(pauli_string("ZZ"), testsupport::mixed_controls()); }
HamiltonianSet three_qubit_set() {
  return HamiltonianSet(testsupport::three_qubit_drift(), testsupport::three_qubit_controls(), 0.5);
}

ControllerSpec spec_for(MeasureKind kind, std::size_t m) {
  return ControllerSpec::make(std::move(kind), FeedbackShape::linear(), ControlGains::uniform(m));
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Central difference of `value` along the flow generated by fields u at time t.
template <class F>
double flow_derivative(const DensityMatrix& rho, const HamiltonianSet& hs, const std::vector<double>& u,
                       double t, F value) {
  const double h = 1e-5;
  return (value(step(rho, hs, u, t, h)) - value(step(rho, hs, u, t, -h))) / (2 * h);
}

DensityMatrix kernel_mems(const std::array<double, 4>& l) {
  const ComplexMatrix m = l[0] * bell_state(1, 1).projector() + l[1] * basis_ket("00").projector() +
                          l[2] * bell_state(1, 0).projector() + l[3] * basis_ket("11").projector();
  return DensityMatrix(m);
}

}  // namespace

TEST_CASE("feedback shapes") {
  const FeedbackShape lin = FeedbackShape::linear();
  CHECK(lin(0.0) == 0.0);
  CHECK(lin(-2.5) == -2.5);
  CHECK_NOTHROW(FeedbackShape::custom("tanh", [](double x) { return std::tanh(x); }));
  CHECK_THROWS_AS(FeedbackShape::custom("square", [](double x) { return x * x; }), ParameterError);
  CHECK_THROWS_AS(FeedbackShape::custom("offset", [](double x) { return x + 1.0; }), ParameterError);
  CHECK_THROWS_AS(FeedbackShape::custom("dead zone", [](double x) { return std::abs(x) < 1e-3 ? 0.0 : x; }),
                  ParameterError);
  CHECK_THROWS_AS(FeedbackShape::custom("empty", {}), ParameterError);
}

TEST_CASE("gains") {
  const ControlGains g = ControlGains::uniform(3);
  CHECK(g.r == std::vector<double>{5.0, 5.0, 5.0});
  CHECK(g.epsilon == 1e-3);
  CHECK_NOTHROW(g.validate(3));
  CHECK_THROWS_AS(g.validate(6), ParameterError);
  CHECK_THROWS_AS((ControlGains{{1.0, 0.0}, 1e-3}.validate(2)), ParameterError);
  CHECK_THROWS_AS((ControlGains{{1.0}, -1e-3}.validate(1)), ParameterError);
}

TEST_CASE("control fields") {
  const auto conc = spec_for(MeasureKind::gf(measures::concurrence_measure()), 3);
  const auto ent = spec_for(MeasureKind::gf(measures::entropy_measure()), 3);
  const auto mixed = spec_for(MeasureKind::mixed_concurrence(), 3);
  CHECK(conc.sign_convention == -1);
  CHECK(ent.sign_convention == 1);
  CHECK(mixed.sign_convention == 1);

  CHECK(control_pure({0.0, 0.0, 0.0}, conc) == std::vector<double>{0.0, 0.0, 0.0});
  const auto up = control_pure({0.2, 0.2, 0.2}, conc);
  for (double v : up) CHECK(v == doctest::Approx(1.0));
  const auto ue = control_pure({0.2, 0.2, 0.2}, ent);
  for (double v : ue) CHECK(v == doctest::Approx(-1.0));
  const auto um = control_mixed({0.1, -0.3, 0.0}, mixed);
  CHECK(um[0] == doctest::Approx(0.5));
  CHECK(um[1] == doctest::Approx(-1.5));
  CHECK(um[2] == 0.0);
  CHECK_THROWS_AS(control_pure({0.1}, conc), ParameterError);
}

TEST_CASE("perturb_initial") {
  const double eps = 1e-3;
  const Ket k1 = perturb_initial(bell_state(0, 0), bell_state(0, 1), eps);
  CHECK(std::norm(basis_ket("00").amplitudes().dot(k1.amplitudes())) > 1.0 - 1e-6);
  CHECK((k1.amplitudes() - basis_ket("00").amplitudes()).norm() < 1e-3);

  const Ket k0 = perturb_initial(bell_state(0, 0), bell_state(0, 1), 0.0);
  CHECK((k0.amplitudes() - basis_ket("00").amplitudes()).norm() < 1e-15);

  // b10 - (1 + eps) b11 = -((1 + eps) b11 - b10)
  const Ket k8 = perturb_initial(bell_state(1, 1), Ket(-bell_state(1, 0).amplitudes()), eps);
  CHECK(std::abs(std::abs(k8[2]) - 1.0) < 1e-3);
  CHECK(std::abs(k8[1]) < 1e-3);

  CHECK_THROWS_AS(perturb_initial(bell_state(0, 0), Ket(-bell_state(0, 0).amplitudes()), 0.0), ParameterError);
  CHECK_THROWS_AS(perturb_initial(bell_state(0, 0), ghz_state(3), eps), ParameterError);
}

TEST_CASE("pure feedback at equilibria") {
  const HamiltonianSet hs = pure_set();
  const auto c = measures::concurrence_measure();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (double t : {0.0, 1.3}) {
        const Feedback fb = feedback_pure(pure(bell_state(a, b)), c, hs, t);
        for (double x : fb.x) CHECK(std::abs(x) < 1e-12);
      }
  for (const char* bits : {"00", "01", "10", "11"}) {
    const Feedback fb = feedback_pure(pure(basis_ket(bits)), c, hs, 0.4);
    for (double x : fb.x) CHECK(std::abs(x) < 1e-12);
  }
  CHECK_THROWS_AS(feedback_pure(DensityMatrix::maximally_mixed(2), c, hs, 0.0), ContractViolation);
}

TEST_CASE("pure feedback reproduces dV/dt") {
  const HamiltonianSet hs = pure_set();
  auto rng = testsupport::rng_for(21);
  for (const auto& m : {measures::concurrence_measure(), measures::entropy_measure(), measures::renyi_measure(1.5)}) {
    const ControllerSpec spec = spec_for(MeasureKind::gf(m), 3);
    for (int i = 0; i < 40; ++i) {
      std::uniform_real_distribution<double> lam(0.55, 0.95);
      const DensityMatrix rho = pure(testsupport::schmidt_state(lam(rng), rng));
      const double t = 0.37 * i;
      const Feedback fb = feedback_pure(rho, m, hs, t);
      const auto u = control_pure(fb.x, spec);
      const ComplexMatrix rm = measures::reduced_first_qubit(rho.matrix());
      const RealVector ev = eigenvalues_hermitian(rm);
      const double big_x = m.f(ev[0]) + m.f(ev[1]);
      const double predicted = -std::abs(m.dG(big_x)) * 5.0 * dot(fb.x, fb.x);
      const double fd = flow_derivative(rho, hs, u, t, [&](const DensityMatrix& r) {
        return m.maximum() - measures::eg_pure(r, m);
      });
      CHECK(std::abs(fd - predicted) < 1e-4);
      CHECK(predicted <= 0.0);
    }
  }
}

TEST_CASE("mixed feedback reproduces dV/dt") {
  const HamiltonianSet hs = mixed_set();
  const ControllerSpec spec = spec_for(MeasureKind::mixed_concurrence(), 6);
  auto rng = testsupport::rng_for(22);
  for (int i = 0; i < 40; ++i) {
    const DensityMatrix rho = testsupport::random_mixed(rng);
    const double t = 0.29 * i;
    const Feedback fb = feedback_mixed(rho, hs, t);
    const auto u = control_mixed(fb.x, spec);
    const double predicted = -2.0 * 5.0 * dot(fb.x, fb.x);
    const double fd = flow_derivative(rho, hs, u, t, [](const DensityMatrix& r) {
      return -measures::tilde_decompose(r).signed_concurrence();
    });
    CHECK(std::abs(fd - predicted) < 1e-3);
  }
}

TEST_CASE("mixed feedback vanishes on the kernel MEMS") {
  const HamiltonianSet hs = mixed_set();
  for (const auto& l : {std::array<double, 4>{0.4932, 0.3485, 0.1301, 0.0282},
                        std::array<double, 4>{0.6607, 0.1901, 0.1083, 0.0409}}) {
    const Feedback fb = feedback_mixed(kernel_mems(l), hs, 0.0);
    for (double x : fb.x) CHECK(std::abs(x) < 1e-8);
  }
  // Diagonal separable mixture: the signed sum is negative and x must stay finite.
  const Feedback fb = feedback_mixed(DensityMatrix(Eigen::Vector4d(0.4, 0.3, 0.2, 0.1).cast<Complex>().asDiagonal()),
                                     hs, 0.3);
  for (double x : fb.x) CHECK(std::isfinite(x));
}

TEST_CASE("generalized concurrence feedback") {
  auto rng = testsupport::rng_for(23);

  SUBCASE("equals the concurrence law at N = 2") {
    const HamiltonianSet hs = pure_set();
    const auto c = measures::concurrence_measure();
    for (int i = 0; i < 50; ++i) {
      const DensityMatrix rho = pure(random_ket(4, rng));
      const Feedback a = feedback_gc(rho, hs, 0.1 * i);
      const Feedback b = feedback_pure(rho, c, hs, 0.1 * i);
      for (std::size_t k = 0; k < 3; ++k) CHECK(a.x[k] == doctest::Approx(b.x[k]).epsilon(1e-10));
    }
  }
  SUBCASE("zero at GHZ") {
    const HamiltonianSet hs = three_qubit_set();
    for (double x : feedback_gc(pure(ghz_state(3)), hs, 0.8).x) CHECK(std::abs(x) < 1e-12);
  }
  SUBCASE("reproduces dE/dt = sum u x / (E D)") {
    const HamiltonianSet hs = three_qubit_set();
    const ControllerSpec spec = spec_for(MeasureKind::generalized_concurrence(), 6);
    for (int i = 0; i < 30; ++i) {
      const DensityMatrix rho = pure(random_ket(8, rng));
      const Feedback fb = feedback_gc(rho, hs, 0.2 * i);
      const auto u = control_mixed(fb.x, spec);
      const double e = measures::generalized_concurrence(rho);
      const double predicted = dot(u, fb.x) / (e * 3.0);
      const double fd = flow_derivative(rho, hs, u, 0.2 * i, measures::generalized_concurrence);
      CHECK(std::abs(fd - predicted) < 1e-5);
      CHECK(fd >= -1e-9);
    }
  }
}

TEST_CASE("GME feedback") {
  const HamiltonianSet hs = three_qubit_set();
  auto rng = testsupport::rng_for(24);

  SUBCASE("zero at GHZ") {
    const Feedback fb = feedback_gme(pure(ghz_state(3)), hs, 0.5);
    for (double x : fb.x) CHECK(std::abs(x) < 1e-12);
    REQUIRE(fb.partition.has_value());
    CHECK(fb.partition->label() == "1|2,3");
  }
  SUBCASE("zero on the cut of a biseparable state") {
    // |0> (x) random two-qubit state: the minimizing cut 1|2,3 has a pure reduction.
    const Ket inner = random_ket(4, rng);
    const Ket psi(tensor_product(basis_ket("0").amplitudes(), inner.amplitudes()));
    const Feedback fb = feedback_gme(pure(psi), hs, 0.9);
    REQUIRE(fb.partition.has_value());
    CHECK(fb.partition->label() == "1|2,3");
    for (double x : fb.x) CHECK(std::abs(x) < 1e-12);
  }
  SUBCASE("reproduces dE/dt = 2 sum u x / E away from cut switches") {
    const ControllerSpec spec = spec_for(MeasureKind::gme_concurrence(), 6);
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
      const DensityMatrix rho = pure(random_ket(8, rng));
      const Feedback fb = feedback_gme(rho, hs, 0.2 * i);
      const auto u = control_mixed(fb.x, spec);
      // Skip states whose two smallest cuts are close enough to swap within the stencil.
      std::vector<double> cuts;
      for (const auto& p : measures::bipartitions(3)) {
        const ComplexMatrix r = reduce_qubits(rho.matrix(), 3, p.block);
        cuts.push_back(std::sqrt(2.0 * (1.0 - (r * r).trace().real())));
      }
      std::sort(cuts.begin(), cuts.end());
      if (cuts[1] - cuts[0] < 1e-3) continue;
      const double e = measures::gme_concurrence(rho).value;
      const double predicted = 2.0 * dot(u, fb.x) / e;
      const double fd = flow_derivative(rho, hs, u, 0.2 * i,
                                        [](const DensityMatrix& r) { return measures::gme_concurrence(r).value; });
      CHECK(std::abs(fd - predicted) < 1e-5);
      ++checked;
    }
    CHECK(checked > 20);
  }
}

TEST_CASE("feedback traces are purely imaginary") {
  auto rng = testsupport::rng_for(25);
  const HamiltonianSet two = pure_set();
  const HamiltonianSet mixed = mixed_set();
  const HamiltonianSet three = three_qubit_set();
  const auto c = measures::concurrence_measure();
  double pure_res = 0.0, mixed_res = 0.0, gc_res = 0.0, gme_res = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = 0.02 * i;
    pure_res = std::max(pure_res, feedback_pure(pure(random_ket(4, rng)), c, two, t).max_residue);
    mixed_res = std::max(mixed_res, feedback_mixed(random_density(2, rng), mixed, t).max_residue);
    const DensityMatrix psi3 = pure(random_ket(8, rng));
    gc_res = std::max(gc_res, feedback_gc(psi3, three, t).max_residue);
    gme_res = std::max(gme_res, feedback_gme(psi3, three, t).max_residue);
  }
  CHECK(pure_res < 1e-9);
  CHECK(mixed_res < 1e-9);
  CHECK(gc_res < 1e-9);
  CHECK(gme_res < 1e-9);
}

TEST_CASE("closed-loop controller") {
  const HamiltonianSet hs = pure_set();
  const ControllerSpec spec = spec_for(MeasureKind::gf(measures::concurrence_measure()), 3);
  const dynamics::Controller ctl = make_controller(spec, hs);
  auto rng = testsupport::rng_for(26);
  const DensityMatrix rho = pure(random_ket(4, rng));
  const dynamics::ControlOutput out = ctl(rho, 0.25);
  const Feedback fb = feedback_pure(rho, measures::concurrence_measure(), hs, 0.25);
  CHECK(out.x == fb.x);
  CHECK(out.u == control_pure(fb.x, spec));

  SUBCASE("u vanishes exactly when x does") {
    const dynamics::ControlOutput eq = ctl(pure(bell_state(0, 0)), 0.0);
    for (std::size_t k = 0; k < 3; ++k) CHECK((eq.u[k] == 0.0) == (eq.x[k] == 0.0));
  }
  SUBCASE("V is non-increasing along a controlled run") {
    const auto kind = MeasureKind::gf(measures::concurrence_measure());
    double prev = 1e300, worst = 0.0;
    const dynamics::Monitor mon = [&](const DensityMatrix& r) {
      const auto lv = measures::lef_value(r, kind);
      worst = std::max(worst, lv.V - prev);
      prev = lv.V;
      return dynamics::Observation{lv.V, lv.E};
    };
    const auto rec = dynamics::evolve(rho, hs, ctl, {1e-3, 5.0, 10}, mon);
    CHECK(worst <= 1e-6);
    CHECK(rec.samples.back().V < rec.samples.front().V);
  }
  CHECK_THROWS_AS(make_controller(spec, mixed_set()), ParameterError);
}
