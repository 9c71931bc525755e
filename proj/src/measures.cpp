#include "entlyap/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "entlyap/error.hpp"

namespace entlyap::measures {

using qmat::Complex;
using qmat::ComplexVector;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Eigenvalues of a unit-trace 4x4 matrix below this are solver noise. The
// concurrence depends on them through square roots, so they are zeroed.
constexpr double kEigenFloor = 1e-14;

void require_two_qubit(const DensityMatrix& rho, const char* what) {
  if (rho.nqubits() != 2) {
    throw DimensionError(std::string(what) + ": expected a 2-qubit state, got " +
                         std::to_string(rho.nqubits()) + " qubits");
  }
}

void require_pure(const DensityMatrix& rho, const char* what) {
  if (!rho.is_pure()) {
    throw ContractViolation(std::string(what) + ": state is mixed (purity " +
                            std::to_string(rho.purity()) + ")");
  }
}

// Larger eigenvalue of a 2x2 Hermitian reduced matrix, clamped to [1/2, 1].
double larger_reduced_eigenvalue(const ComplexMatrix& rm) {
  const double a = rm(0, 0).real();
  const double d = rm(1, 1).real();
  const double off = std::abs(rm(0, 1));
  const double half_diff = 0.5 * (a - d);
  const double lam = 0.5 * (a + d) + std::sqrt(half_diff * half_diff + off * off);
  return std::clamp(lam, 0.5, 1.0);
}

double bipartite_concurrence_from_purity(double purity) {
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - purity)));
}

double reduced_purity(const ComplexMatrix& rho, int nqubits, std::span<const int> keep) {
  return qmat::reduce_qubits(rho, nqubits, keep).squaredNorm();
}

const ComplexMatrix& sigma_yy() {
  static const ComplexMatrix m = qmat::pauli_string("YY");
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// GFMeasure
// ---------------------------------------------------------------------------

double GFMeasure::value_at(double lambda) const { return G(f(lambda) + f(1.0 - lambda)); }

double GFMeasure::x_at_max() const { return 2.0 * f(0.5); }

double GFMeasure::maximum() const { return G(x_at_max()); }

int GFMeasure::g_prime_sign() const { return dG(x_at_max()) < 0.0 ? -1 : 1; }

GFMeasure concurrence_measure() {
  GFMeasure m;
  m.name = "concurrence";
  m.G = [](double x) { return std::sqrt(std::max(0.0, 2.0 * (1.0 - x))); };
  m.dG = [](double x) {
    const double s = std::sqrt(std::max(2.0 * (1.0 - x), std::numeric_limits<double>::min()));
    return -1.0 / s;
  };
  m.f = [](double l) { return l * l; };
  m.df = [](double l) { return 2.0 * l; };
  m.d2f = [](double) { return 2.0; };
  return m;
}

GFMeasure renyi_measure(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw ParameterError("renyi: alpha must be positive and different from 1 (got " +
                         std::to_string(alpha) + "); use the entropy measure for alpha = 1");
  }
  GFMeasure m;
  std::ostringstream name;
  name << "renyi(" << alpha << ")";
  m.name = name.str();
  m.G = [alpha](double x) { return std::log(x) / (1.0 - alpha); };
  m.dG = [alpha](double x) { return 1.0 / ((1.0 - alpha) * x); };
  m.f = [alpha](double l) { return l <= 0.0 ? 0.0 : std::pow(l, alpha); };
  m.df = [alpha](double l) {
    return alpha * std::pow(std::max(l, std::numeric_limits<double>::min()), alpha - 1.0);
  };
  m.d2f = [alpha](double l) {
    return alpha * (alpha - 1.0) *
           std::pow(std::max(l, std::numeric_limits<double>::min()), alpha - 2.0);
  };
  return m;
}

GFMeasure entropy_measure() {
  GFMeasure m;
  m.name = "entropy";
  m.G = [](double x) { return x / kLn2; };
  m.dG = [](double) { return 1.0 / kLn2; };
  m.f = [](double l) { return l <= 0.0 ? 0.0 : -l * std::log(l); };
  m.df = [](double l) { return -std::log(std::max(l, std::numeric_limits<double>::min())) - 1.0; };
  m.d2f = [](double l) { return -1.0 / std::max(l, std::numeric_limits<double>::min()); };
  return m;
}

// ---------------------------------------------------------------------------
// MeasureKind
// ---------------------------------------------------------------------------

MeasureKind MeasureKind::gf(GFMeasure m) {
  if (!m.G || !m.dG || !m.f || !m.df || !m.d2f) {
    throw ParameterError("measure '" + m.name + "' is missing G, f or a derivative");
  }
  const ValidationReport report = validate_gf_measure(m);
  if (!report.all_passed()) {
    std::string failed;
    for (const auto* group : {&report.conditions, &report.invariants}) {
      for (const auto& c : *group) {
        if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
      }
    }
    throw ParameterError("measure '" + m.name + "' fails validation: " + failed);
  }
  return MeasureKind(std::move(m));
}

const GFMeasure& MeasureKind::gf_measure() const {
  if (const auto* m = std::get_if<GFMeasure>(&v_)) return *m;
  throw ParameterError("measure '" + name() + "' is not a (G, f) measure");
}

std::string MeasureKind::name() const {
  struct Namer {
    std::string operator()(const GFMeasure& m) const { return m.name; }
    std::string operator()(const MixedConcurrence&) const { return "mixedConcurrence"; }
    std::string operator()(const GeneralizedConcurrence&) const { return "generalizedConcurrence"; }
    std::string operator()(const GMEConcurrence&) const { return "gmeConcurrence"; }
  };
  return std::visit(Namer{}, v_);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
  auto ok = [](const ConditionCheck& c) { return c.passed; };
  return std::all_of(conditions.begin(), conditions.end(), ok) &&
         std::all_of(invariants.begin(), invariants.end(), ok);
}

ValidationReport validate_gf_measure(const GFMeasure& m, int samples) {
  if (samples < 100) {
    throw ParameterError("validate_gf_measure: samples must be >= 100 (got " +
                         std::to_string(samples) + ")");
  }
  constexpr double h = 1e-5;
  ValidationReport r;
  r.measure = m.name;
  r.samples = samples;

  auto E = [&](double l) { return m.value_at(l); };
  auto dE = [&](double l) { return (E(l + h) - E(l - h)) / (2.0 * h); };
  std::vector<double> grid(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) grid[i] = (i + 1.0) / (samples + 1.0);

  {
    const double at0 = E(0.0);
    const double at1 = E(1.0);
    const double worst = std::max(std::abs(at0), std::abs(at1));
    r.conditions.push_back({"separable_zero", std::isfinite(worst) && worst < 1e-9, worst,
                            "E(0) and E(1) vanish"});
  }
  {
    double lo = std::numeric_limits<double>::infinity();
    for (double l : grid) lo = std::min(lo, E(l));
    r.conditions.push_back({"positive", std::isfinite(lo) && lo > 0.0, lo, "min E on the open grid"});
  }
  {
    const double d = dE(0.5);
    r.conditions.push_back({"stationary_at_half", std::abs(d) < 1e-8, d, "E'(1/2)"});
  }
  {
    double smallest = std::numeric_limits<double>::infinity();
    for (double l : grid) {
      if (std::abs(l - 0.5) < 0.5 / (samples + 1.0)) continue;
      const double d = dE(l);
      smallest = std::min(smallest, std::isfinite(d) ? std::abs(d) : 0.0);
    }
    r.conditions.push_back({"single_extremum", smallest > 1e-12, smallest,
                            "min |E'| over grid points away from 1/2"});
  }
  {
    const double d2 = (E(0.5 + h) - 2.0 * E(0.5) + E(0.5 - h)) / (h * h);
    r.concavity_at_half = d2;
    r.conditions.push_back({"concave_at_half", std::isfinite(d2) && d2 < 0.0, d2, "E''(1/2)"});
  }

  {
    // G sampled over the X values the grid actually produces.
    const int sign0 = m.dG(m.f(grid.front()) + m.f(1.0 - grid.front())) < 0.0 ? -1 : 1;
    bool monotone = true;
    double worst = std::numeric_limits<double>::infinity();
    for (double l : grid) {
      const double g = m.dG(m.f(l) + m.f(1.0 - l));
      const int s = g < 0.0 ? -1 : 1;
      if (s != sign0 || g == 0.0 || !std::isfinite(g)) monotone = false;
      worst = std::min(worst, std::abs(g));
    }
    r.invariants.push_back({"G_monotone", monotone, worst, "min |G'| over sampled X"});
  }
  {
    const double prod = m.dG(m.x_at_max()) * m.d2f(0.5);
    r.invariants.push_back({"G'_f''_negative", std::isfinite(prod) && prod < 0.0, prod,
                            "G'(2f(1/2)) f''(1/2)"});
  }
  r.maximum = m.maximum();
  return r;
}

// ---------------------------------------------------------------------------
// Bipartite pure states
// ---------------------------------------------------------------------------

ComplexMatrix reduced_first_qubit(const ComplexMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) {
    throw DimensionError("reduced_first_qubit: expected a 4x4 matrix");
  }
  ComplexMatrix r(2, 2);
  r(0, 0) = rho(0, 0) + rho(1, 1);
  r(0, 1) = rho(0, 2) + rho(1, 3);
  r(1, 0) = rho(2, 0) + rho(3, 1);
  r(1, 1) = rho(2, 2) + rho(3, 3);
  return r;
}

double eg_pure(const DensityMatrix& rho, const GFMeasure& m) {
  require_two_qubit(rho, "eg_pure");
  require_pure(rho, "eg_pure");
  return m.value_at(larger_reduced_eigenvalue(reduced_first_qubit(rho.matrix())));
}

double concurrence_pure(const DensityMatrix& rho) {
  require_two_qubit(rho, "concurrence_pure");
  require_pure(rho, "concurrence_pure");
  return bipartite_concurrence_from_purity(reduced_first_qubit(rho.matrix()).squaredNorm());
}

double renyi(const DensityMatrix& rho, double alpha) { return eg_pure(rho, renyi_measure(alpha)); }

double entropy_of_entanglement(const DensityMatrix& rho) { return eg_pure(rho, entropy_measure()); }

double measure_max(const MeasureKind& kind, int nqubits) {
  struct Visitor {
    int n;
    double operator()(const GFMeasure& m) const {
      if (n != 2) throw ParameterError("measure '" + m.name + "' is defined for 2 qubits only");
      return m.maximum();
    }
    double operator()(const MixedConcurrence&) const {
      if (n != 2) throw ParameterError("mixed concurrence is defined for 2 qubits only");
      return 1.0;
    }
    double operator()(const GeneralizedConcurrence&) const {
      if (n < 2) throw ParameterError("generalized concurrence needs at least 2 qubits");
      // Attained when every single-qubit reduction is I/2 (GHZ).
      return std::sqrt(0.5 * n / (std::ldexp(1.0, n - 1) - 1.0));
    }
    double operator()(const GMEConcurrence&) const {
      if (n < 2) throw ParameterError("GME concurrence needs at least 2 qubits");
      return 1.0;
    }
  };
  return std::visit(Visitor{nqubits}, kind.variant());
}

// ---------------------------------------------------------------------------
// Two-qubit mixed states
// ---------------------------------------------------------------------------

ComplexMatrix spin_flip(const DensityMatrix& rho) {
  require_two_qubit(rho, "spin_flip");
  const ComplexMatrix& s = sigma_yy();
  return s * rho.matrix().conjugate() * s;
}

double wootters_concurrence(const DensityMatrix& rho) {
  require_two_qubit(rho, "wootters_concurrence");
  // mu_k are the singular values of sqrt(rho) S sqrt(rho)*, whose Gram matrix
  // is sqrt(rho) rho~ sqrt(rho); this avoids square roots of tiny eigenvalues.
  const ComplexMatrix sq = qmat::matrix_function(
      [](double l) { return l > kEigenFloor ? std::sqrt(l) : 0.0; }, rho.matrix());
  const ComplexMatrix m = sq * sigma_yy() * sq.conjugate();
  const Eigen::Vector4d mu = Eigen::JacobiSVD<Eigen::Matrix4cd>(Eigen::Matrix4cd(m)).singularValues();
  return std::max(0.0, mu[0] - mu[1] - mu[2] - mu[3]);
}

double TildeDecomposition::signed_concurrence() const {
  return takagi_values[0] - takagi_values[1] - takagi_values[2] - takagi_values[3];
}

TildeDecomposition tilde_decompose(const DensityMatrix& rho) {
  require_two_qubit(rho, "tilde_decompose");
  const qmat::Spectrum sp = qmat::spectral_decompose(rho.matrix());

  // Subnormalized eigenvectors; eigenvalues at solver noise level give zero columns.
  ComplexMatrix w = sp.vectors;
  for (int k = 0; k < 4; ++k) {
    w.col(k) *= sp.values[k] > kEigenFloor ? std::sqrt(sp.values[k]) : 0.0;
  }

  // tau = W^T S W is complex symmetric; its Takagi factorization
  // tau conj(u_k) = sigma_k u_k comes from the real symmetric embedding
  // [[B, C], [C, -B]], whose eigenpairs (x; y), sigma >= 0 give u = x + i y.
  ComplexMatrix tau = w.transpose() * sigma_yy() * w;
  tau = 0.5 * (tau + tau.transpose()).eval();
  Eigen::Matrix<double, 8, 8> emb;
  const Eigen::Matrix4d b = tau.real();
  const Eigen::Matrix4d c = tau.imag();
  emb << b, c, c, -b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(emb);

  ComplexMatrix u(4, 4);
  int accepted = 0;
  for (int j = 7; j >= 0 && accepted < 4; --j) {
    ComplexVector cand(4);
    for (int i = 0; i < 4; ++i) {
      cand[i] = Complex(es.eigenvectors()(i, j), es.eigenvectors()(i + 4, j));
    }
    // The embedding doubles each Takagi vector as (u, i u); Gram-Schmidt drops
    // the partner and completes any null block.
    for (int a = 0; a < accepted; ++a) cand -= u.col(a).dot(cand) * u.col(a);
    const double nrm = cand.norm();
    if (nrm < 0.5) continue;
    u.col(accepted) = cand / nrm;
    ++accepted;
  }
  if (accepted != 4) throw NumericalIntegrityError("tilde_decompose: Takagi basis incomplete");

  TildeDecomposition out;
  out.vectors = w * u.conjugate();
  const ComplexMatrix& s = sigma_yy();
  for (int k = 0; k < 4; ++k) {
    auto x = out.vectors.col(k);
    const Complex pre = (x.transpose() * s * x)(0, 0);
    // Rotate the phase so the tilde overlap is real and nonnegative.
    if (std::abs(pre) > 0.0) x *= std::polar(1.0, -0.5 * std::arg(pre));
    const double p = x.squaredNorm();
    out.weights[k] = p;
    out.takagi_values[k] = std::abs(pre);
    out.preconcurrences[k] = p > 1e-300 ? std::min(1.0, std::abs(pre) / p) : 0.0;
    if (p > 1e-14) {
      out.states.push_back(Ket::normalized(x));
    } else {
      out.states.push_back(Ket::normalized(sp.vectors * u.col(k).conjugate()));
    }
  }
  return out;
}

double concurrence_mixed(const DensityMatrix& rho) {
  return std::max(0.0, tilde_decompose(rho).signed_concurrence());
}

double max_concurrence_for_spectrum(const std::array<double, 4>& l) {
  return std::max(0.0, l[0] - l[2] - 2.0 * std::sqrt(std::max(0.0, l[1] * l[3])));
}

// ---------------------------------------------------------------------------
// Multipartite pure states
// ---------------------------------------------------------------------------

std::string Bipartition::label() const {
  std::string s;
  auto emit = [&s](const std::vector<int>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i] + 1);
    }
  };
  emit(block);
  s += '|';
  emit(complement);
  return s;
}

std::vector<Bipartition> bipartitions(int nqubits) {
  if (nqubits < 2 || nqubits > 16) {
    throw ParameterError("bipartitions: register size must be in [2, 16]");
  }
  std::vector<Bipartition> out;
  const unsigned full = (1u << nqubits) - 1u;
  for (unsigned mask = 1; mask < full; mask += 2) {  // bit 0 always set
    Bipartition p;
    for (int q = 0; q < nqubits; ++q) ((mask >> q) & 1u ? p.block : p.complement).push_back(q);
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const Bipartition& a, const Bipartition& b) { return a.block < b.block; });
  return out;
}

double generalized_concurrence(const DensityMatrix& rho) {
  const int n = rho.nqubits();
  if (n < 2) throw DimensionError("generalized_concurrence: needs at least 2 qubits");
  require_pure(rho, "generalized_concurrence");
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const int keep[] = {j};
    sum += reduced_purity(rho.matrix(), n, keep);
  }
  const double denom = std::ldexp(1.0, n - 1) - 1.0;
  return std::sqrt(std::max(0.0, (n - sum) / denom));
}

GmeResult gme_concurrence(const DensityMatrix& rho) {
  const int n = rho.nqubits();
  if (n < 2) throw DimensionError("gme_concurrence: needs at least 2 qubits");
  require_pure(rho, "gme_concurrence");
  GmeResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (auto& p : bipartitions(n)) {
    const double c = bipartite_concurrence_from_purity(reduced_purity(rho.matrix(), n, p.block));
    if (c < best.value - 1e-12) {
      best.value = c;
      best.partition = std::move(p);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Lyapunov entanglement function
// ---------------------------------------------------------------------------

double entanglement(const DensityMatrix& rho, const MeasureKind& kind) {
  struct Visitor {
    const DensityMatrix& rho;
    double operator()(const GFMeasure& m) const { return eg_pure(rho, m); }
    double operator()(const MixedConcurrence&) const { return concurrence_mixed(rho); }
    double operator()(const GeneralizedConcurrence&) const { return generalized_concurrence(rho); }
    double operator()(const GMEConcurrence&) const { return gme_concurrence(rho).value; }
  };
  return std::visit(Visitor{rho}, kind.variant());
}

LyapunovValue lef_value(const DensityMatrix& rho, const MeasureKind& kind) {
  LyapunovValue v;
  if (std::holds_alternative<MixedConcurrence>(kind.variant())) {
    require_two_qubit(rho, "lef_value");
    const qmat::RealVector ev = qmat::eigenvalues_hermitian(rho.matrix());
    v.n_max = max_concurrence_for_spectrum({ev[0], ev[1], ev[2], ev[3]});
  } else {
    try {
      v.n_max = measure_max(kind, rho.nqubits());
    } catch (const ParameterError& e) {
      throw ParameterError(std::string("lef_value: ") + e.what());
    }
  }
  v.E = entanglement(rho, kind);
  v.V = v.n_max - v.E;
  return v;
}

}  // namespace entlyap::measures
