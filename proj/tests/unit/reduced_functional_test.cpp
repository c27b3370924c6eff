#include "oracles.hpp"
#include "yamabe/gamma_solver.hpp"
#include "yamabe/reduced_functional.hpp"
#include "yamabe/special_integrals.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace yamabe;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

BoundaryGeometry geometry(int n, std::vector<double> alpha, std::vector<double> beta, double pi_scale = 1.0) {
  BoundaryGeometry g;
  g.n = n;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    BoundarySample q;
    q.label = "q" + std::to_string(k);
    q.pi = pi_scale * (1.0 + 0.25 * k) * oracle::diag_pi(n);
    q.alpha = alpha[k];
    q.beta = beta[k];
    g.samples.push_back(q);
  }
  return g;
}

double energy7() { return gamma_energy_per_norm(oracle::cached_profile(7, 150)).value; }

std::vector<double> phis(const BoundaryGeometry& g, double e) {
  std::vector<double> v;
  for (const auto& q : g.samples) v.push_back(phi_from_energy(q.pi, g.n, e));
  return v;
}

}  // namespace

TEST(Constants, SevenDimensionalValues) {
  const double p3 = std::pow(std::numbers::pi, 3);
  const auto k = expansion_constants(7);
  // A and B coincide at n = 7
  EXPECT_LE(rel(k.A, p3 / 144.0), 1e-12);
  EXPECT_LE(rel(k.C, p3 / 48.0), 1e-12);
  EXPECT_LE(rel(k.B, 5.0 / 18.0 * p3 / 40.0), 1e-12);
  EXPECT_THROW(expansion_constants(6), std::domain_error);
}

TEST(Constants, PositiveAcrossDimensions) {
  for (int n = 7; n <= 14; ++n) {
    const auto k = expansion_constants(n);
    EXPECT_GT(k.A, 0.0);
    EXPECT_GT(k.B, 0.0);
    EXPECT_GT(k.C, 0.0);
  }
}

TEST(Phi, TrivialProperties) {
  const double e = energy7();
  EXPECT_EQ(phi_from_energy(Mat::Zero(6, 6), 7, e), 0.0);
  const Mat p = oracle::random_trace_free(6, 5);
  EXPECT_LE(rel(phi_from_energy(2.5 * p, 7, e), 6.25 * phi_from_energy(p, 7, e)), 1e-12);
  EXPECT_LT(phi_from_energy(oracle::diag_pi(7), 7, e), 0.0);
  EXPECT_THROW(phi_from_energy(Mat::Identity(6, 6), 7, e), std::domain_error);
}

TEST(Phi, FromProfileMatchesFromEnergy) {
  const auto& prof = oracle::cached_profile(7, 150);
  const Mat p = oracle::diag_pi(7);
  EXPECT_LE(rel(phi(p, prof), phi_from_energy(p, 7, gamma_energy_per_norm(prof).value)), 1e-12);
}

TEST(Phi, OmegaConventions) {
  EXPECT_EQ(parse_omega_convention("printed"), OmegaConvention::Printed);
  EXPECT_EQ(parse_omega_convention("corrected"), OmegaConvention::Corrected);
  EXPECT_THROW(parse_omega_convention("other"), std::invalid_argument);
  const double r = phi_pi_coefficient(7, OmegaConvention::Printed) / phi_pi_coefficient(7, OmegaConvention::Corrected);
  EXPECT_LE(rel(r, sphere_volume(6) / sphere_volume(5)), 1e-14);
}

TEST(Phi, NonPositiveOnRandomGeometries) {
  const double e = energy7();
  for (int k = 0; k < 25; ++k)
    for (auto c : {OmegaConvention::Printed, OmegaConvention::Corrected})
      EXPECT_LE(phi_from_energy(oracle::random_trace_free(6, 300 + k), 7, e, c), 0.0);
}

TEST(Landscape, RegimeOneVertex) {
  // synthetic sample with beta C = 2 and phi = -1
  const auto k = expansion_constants(7);
  BoundaryGeometry g = geometry(7, {0.0}, {2.0 / k.C});
  const auto L = landscape(Regime::One, g, k, {-1.0});
  ASSERT_EQ(L.critical.size(), 1u);
  EXPECT_NEAR(L.critical[0].lambda, 1.0, 1e-14);
  EXPECT_NEAR(L.critical[0].value, 1.0, 1e-14);
  EXPECT_EQ(L.critical[0].type, CriticalType::Max);
  EXPECT_NEAR(L.critical[0].derivative, 0.0, 1e-14);
}

TEST(Landscape, RegimeTwoClosedForm) {
  const double e = energy7();
  const auto k = expansion_constants(7);
  BoundaryGeometry g = geometry(7, {5.0, 8.0}, {-1.0, -0.5});
  const auto ph = phis(g, e);
  const auto L = landscape(Regime::Two, g, k, ph, {0.0, 4.0, 4001});
  for (const auto& c : L.critical) {
    const auto& q = g.samples[c.sample];
    const double kap = q.alpha * k.B + ph[c.sample];
    EXPECT_NEAR(c.lambda, -q.beta * k.C / (2 * kap), 1e-12);
    EXPECT_NEAR(c.value, -q.beta * q.beta * k.C * k.C / (4 * kap), 1e-12);
    EXPECT_EQ(c.type, CriticalType::Min);
    // grid refinement oracle
    double best = 1e300;
    for (int i = 0; i <= 200000; ++i) best = std::min(best, reduced_G(Regime::Two, q, k, ph[c.sample], 20.0 * i / 200000));
    EXPECT_NEAR(best, c.value, 1e-6);
  }
}

TEST(Landscape, GridArgmaxMatchesClosedForm) {
  const double e = energy7();
  const auto k = expansion_constants(7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> beta(0.2, 2.0), scale(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    BoundaryGeometry g;
    g.n = 7;
    for (int s = 0; s < 5; ++s) {
      BoundarySample q;
      q.pi = scale(rng) * oracle::random_trace_free(6, 1000 * trial + s);
      q.beta = beta(rng);
      g.samples.push_back(q);
    }
    const auto ph = phis(g, e);
    const auto L = landscape(Regime::One, g, k, ph);
    // exhaustive evaluation on a 10x finer grid
    std::size_t arg = 0;
    double best = -1e300;
    for (std::size_t s = 0; s < g.samples.size(); ++s)
      for (int i = 0; i < 10 * L.range.points; ++i) {
        const double lam = L.range.lo + (L.range.hi - L.range.lo) * i / (10.0 * L.range.points - 1);
        const double v = reduced_G(Regime::One, g.samples[s], k, ph[s], lam);
        if (v > best) {
          best = v;
          arg = s;
        }
      }
    EXPECT_EQ(L.critical[L.selected].sample, arg) << trial;
    EXPECT_EQ(L.grid_selected, arg) << trial;
    for (const auto& c : L.critical) {
      EXPECT_GT(c.lambda, L.range.lo);
      EXPECT_LT(c.lambda, L.range.hi);
    }
  }
}

TEST(Landscape, ScalingBetaKeepsTheArgmax) {
  const double e = energy7();
  const auto k = expansion_constants(7);
  BoundaryGeometry g = geometry(7, {0, 0, 0}, {0.4, 1.0, 0.7});
  const auto ph = phis(g, e);
  const auto L = landscape(Regime::One, g, k, ph);
  BoundaryGeometry g3 = g;
  for (auto& q : g3.samples) q.beta *= 3.0;
  const auto L3 = landscape(Regime::One, g3, k, ph);
  EXPECT_EQ(L.critical[L.selected].sample, L3.critical[L3.selected].sample);
  EXPECT_NEAR(L3.critical[L3.selected].lambda, 3 * L.critical[L.selected].lambda, 1e-12);
  EXPECT_NEAR(L3.critical[L3.selected].value, 9 * L.critical[L.selected].value, 1e-10);
}

TEST(Landscape, PreconditionsNameTheSample) {
  const double e = energy7();
  const auto k = expansion_constants(7);
  BoundaryGeometry g = geometry(7, {1, 1}, {1, -1});
  try {
    landscape(Regime::One, g, k, phis(g, e));
    FAIL();
  } catch (const std::invalid_argument& ex) {
    EXPECT_NE(std::string(ex.what()).find("'q1'"), std::string::npos) << ex.what();
  }
  BoundaryGeometry z = geometry(7, {0}, {1});
  EXPECT_THROW(landscape(Regime::One, z, k, {0.0}), std::invalid_argument);
}

TEST(Classify, ExampleVerdicts) {
  const double e = energy7();
  const auto k = expansion_constants(7);
  const auto compact = geometry(7, {-1, -1, -1}, {-1, -1, -1});
  EXPECT_EQ(classify(compact, k, phis(compact, e), 1.0).verdict, Verdict::Compact);
  const auto one = geometry(7, {-3, 0, 5}, {1, 1, 1});
  EXPECT_EQ(classify(one, k, phis(one, e), 1.0).verdict, Verdict::BlowUpRegime1);
  auto two = geometry(7, {0, 0, 0}, {-1, -1, -1});
  const auto ph = phis(two, e);
  for (std::size_t i = 0; i < ph.size(); ++i) two.samples[i].alpha = -ph[i] / k.B + 0.1;
  const auto c = classify(two, k, ph, 1.0);
  EXPECT_EQ(c.verdict, Verdict::BlowUpRegime2);
  EXPECT_NEAR(c.margin, 0.1, 1e-12);
  const auto mixed = geometry(7, {1, 1}, {1, -1});
  EXPECT_EQ(classify(mixed, k, phis(mixed, e), 1.0).verdict, Verdict::Indeterminate);
}

TEST(Classify, CompactAndRegimeTwoAreExclusive) {
  const double e = energy7();
  const auto k = expansion_constants(7);
  const double cn = compactness_threshold(7);
  // alpha placed right at the compactness boundary
  auto g = geometry(7, {0, 0}, {-1, -1});
  for (auto& q : g.samples) q.alpha = cn * q.pi.squaredNorm();
  for (double eps : {-1e-9, 1e-9}) {
    auto p = g;
    for (auto& q : p.samples) q.alpha += eps;
    const auto v = classify(p, k, phis(p, e), 1.0).verdict;
    EXPECT_NE(v, Verdict::BlowUpRegime2);
  }
}

TEST(Classify, Errors) {
  const auto k = expansion_constants(7);
  auto g = geometry(7, {1}, {1});
  EXPECT_THROW(classify(g, k, {-0.1}, 0.0), std::invalid_argument);
  g.samples[0].pi.setZero();
  EXPECT_THROW(classify(g, k, {0.0}, 1.0), std::invalid_argument);
  auto bad = geometry(7, {1}, {1});
  bad.samples[0].pi(2, 2) = 0.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Classify, ThresholdProportionality) {
  for (int n = 7; n <= 12; ++n)
    EXPECT_NEAR(compactness_threshold(n), (n - 6.0) / (4.0 * (n - 1) * (n - 2) * (n - 2)), 1e-16);
}
