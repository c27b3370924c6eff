#include "oracles.hpp"
#include "yamabe/bubble.hpp"
#include "yamabe/metric_jet.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace yamabe;

namespace {

// A jet with every component populated.  Rbar is built from a symmetric
// matrix S as S_ij S_kl - S_il S_kj style products, which has the
// curvature symmetries.
MetricJet busy_jet(int n) {
  const int m = n - 1;
  MetricJetComponents c;
  c.n = n;
  c.h = 0.15 * oracle::random_trace_free(m, 1);
  c.dh.resize(m);
  for (int k = 0; k < m; ++k) {
    Mat a = oracle::random_trace_free(m, 10 + k);
    c.dh[k] = 0.05 * (a + a.transpose()) / 2;
  }
  const Mat S = 0.2 * oracle::random_trace_free(m, 3) + 0.1 * Mat::Identity(m, m);
  c.rbar.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k)
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l)
          c.rbar[((i * m + k) * m + j) * m + l] = S(i, j) * S(k, l) - S(i, l) * S(k, j);
  c.rnn = 0.1 * oracle::random_trace_free(m, 4) + 0.05 * Mat::Identity(m, m);
  c.scalar_curvature.value = 0.2;
  c.scalar_curvature.gradient = Vec::Constant(n, 0.1);
  c.scalar_curvature.hessian = 0.05 * Mat::Identity(n, n);
  return MetricJet(c);
}

// Oracle: rho^{-1} d_a(rho g^{ab} d_b u) by central differences of the
// flux assembled from metric_at and the exact gradient.
double fd_laplace_beltrami(const MetricJet& jet, const Field& u, const Vec& y, double h) {
  const int n = jet.n();
  auto flux = [&](const Vec& p, int a) {
    const MetricSample g = jet.metric_at(p);
    return g.density * (g.inverse.row(a).dot(u.evaluate(p, 1).gradient));
  };
  double div = 0.0;
  for (int a = 0; a < n; ++a) {
    Vec p = y, q = y, p2 = y, q2 = y;
    p(a) += h;
    q(a) -= h;
    p2(a) += 2 * h;
    q2(a) -= 2 * h;
    div += (-flux(p2, a) + 8 * flux(p, a) - 8 * flux(q, a) + flux(q2, a)) / (12 * h);
  }
  return div / jet.metric_at(y).density;
}

}  // namespace

TEST(MetricJet, IdentityAtOrigin) {
  const MetricJet j = busy_jet(7);
  const auto g = j.metric_at(Vec::Zero(7));
  EXPECT_EQ((g.inverse - Mat::Identity(7, 7)).norm(), 0.0);
  EXPECT_EQ(g.density, 1.0);
}

TEST(MetricJet, FlatEverywhere) {
  const MetricJet j = MetricJet::flat(8);
  EXPECT_TRUE(j.is_flat());
  for (const Vec& y : bubble_interior_sample(8, 10, 1)) {
    const auto g = j.metric_at(y);
    EXPECT_EQ((g.inverse - Mat::Identity(8, 8)).norm(), 0.0);
    EXPECT_EQ(g.density, 1.0);
  }
}

TEST(MetricJet, PureHAlongTheNormal) {
  const int n = 7, m = 6;
  MetricJetComponents c;
  c.n = n;
  c.h = oracle::random_trace_free(m, 2);
  c.rnn = 0.3 * Mat::Identity(m, m);
  c.rnn(0, 1) = c.rnn(1, 0) = 0.1;
  const MetricJet j(c);
  const double t = 0.2;
  Vec y = Vec::Zero(n);
  y(m) = t;
  const auto g = j.metric_at(y);
  const Mat expect = Mat::Identity(m, m) + 2 * c.h * t + (c.rnn + 3 * c.h * c.h) * t * t;
  EXPECT_LE((g.inverse.topLeftCorner(m, m) - expect).norm(), 1e-15);
  EXPECT_NEAR(g.density, 1 - 0.5 * (c.h.squaredNorm() + c.rnn.trace()) * t * t, 1e-15);
}

TEST(MetricJet, NormalRowIsExactlyDelta) {
  const MetricJet j = busy_jet(7);
  for (const Vec& y : bubble_interior_sample(7, 20, 5)) {
    const Vec yy = 0.3 * y;
    const auto g = j.metric_at(yy);
    for (int a = 0; a < 7; ++a) {
      EXPECT_EQ(g.inverse(6, a), a == 6 ? 1.0 : 0.0);
      EXPECT_EQ(g.inverse(a, 6), a == 6 ? 1.0 : 0.0);
    }
  }
}

TEST(MetricJet, ParityInTangentialCoordinates) {
  // flipping ybar changes only the dh terms, which are odd in ybar
  const int n = 7, m = 6;
  const MetricJet j = busy_jet(n);
  Vec y = Vec::Zero(n);
  y.head(m) << 0.1, -0.2, 0.05, 0.0, 0.1, 0.02;
  y(m) = 0.15;
  Vec z = y;
  z.head(m) *= -1;
  const Mat d = j.metric_at(y).inverse - j.metric_at(z).inverse;
  Mat odd = Mat::Zero(n, n);
  for (int k = 0; k < m; ++k) odd.topLeftCorner(m, m) += 2 * 2 * y(m) * y(k) * j.dh(k);
  EXPECT_LE((d - odd).norm(), 1e-15);
  EXPECT_NEAR(j.metric_at(y).density, j.metric_at(z).density, 1e-15);
}

TEST(MetricJet, GuardIsARangeError) {
  const MetricJet j = MetricJet::pure_h(oracle::diag_pi(7, 1.0));
  Vec y = Vec::Zero(7);
  y(6) = 2.0;
  EXPECT_THROW(j.metric_at(y), std::range_error);
}

TEST(MetricJet, SymmetryViolationsCarryIndices) {
  Mat h = oracle::diag_pi(7);
  h(1, 3) = 0.2;
  try {
    MetricJet::pure_h(h);
    FAIL();
  } catch (const JetSymmetryError& e) {
    EXPECT_EQ(e.indices(), (std::vector<int>{2, 4}));
  }
  MetricJetComponents c;
  c.n = 5;
  c.rbar.assign(256, 0.0);
  c.rbar[((0 * 4 + 1) * 4 + 0) * 4 + 1] = 1.0;  // R_1212 without its partners
  EXPECT_THROW(MetricJet{c}, JetSymmetryError);
  MetricJetComponents t;
  t.n = 5;
  t.h = Mat::Identity(4, 4);
  EXPECT_THROW(MetricJet{t}, std::invalid_argument);
  t.mean_curvature_zero = false;
  EXPECT_NO_THROW(MetricJet{t});
}

TEST(MetricJet, DerivedQuantities) {
  const MetricJet j = busy_jet(7);
  EXPECT_NEAR(j.pi_norm_squared(), j.h().squaredNorm(), 1e-14);
  EXPECT_NEAR(j.normal_ricci(), j.rnn().trace(), 1e-15);
  const Mat& r = j.boundary_ricci();
  EXPECT_LE((r - r.transpose()).norm(), 1e-15);
  EXPECT_FALSE(j.isotropic());
  EXPECT_EQ(j.extra_degree(), 2);
}

TEST(ConformalDeficit, ZeroJet) {
  const int n = 7;
  const MetricJet flat = MetricJet::flat(n);
  const BubbleField U(n);
  for (const Vec& y : bubble_interior_sample(n, 20, 8)) EXPECT_EQ(conformal_deficit(flat, U, y), 0.0);
}

TEST(ConformalDeficit, MatchesDivergenceFormOracle) {
  const int n = 7;
  const MetricJet j = busy_jet(n);
  const BubbleField U(n, 0.8);
  auto zero_rg = j.components();
  zero_rg.scalar_curvature = {};
  const MetricJet j0(zero_rg);
  for (const Vec& y0 : bubble_interior_sample(n, 15, 12)) {
    const Vec y = 0.3 * y0;
    if (y(n - 1) < 0.01) continue;
    const double ref = fd_laplace_beltrami(j0, U, y, 1e-3) - U.evaluate(y, 2).hessian.trace();
    EXPECT_NEAR(conformal_deficit(j0, U, y), ref, 1e-7 * (1 + std::abs(ref)));
    const double rg = j.scalar_curvature().at(y);
    EXPECT_NEAR(conformal_deficit(j, U, y), ref - (n - 2.0) / (4 * (n - 1.0)) * rg * U.evaluate(y, 0).value,
                1e-7 * (1 + std::abs(ref)));
  }
}

TEST(ConformalDeficit, Linearity) {
  const int n = 7;
  const MetricJet j = busy_jet(n);
  auto U = std::make_shared<BubbleField>(n);
  auto k = std::make_shared<KernelField>(3, n);
  const FieldPtr s = U + scaled(0.7, k);
  for (const Vec& y0 : bubble_interior_sample(n, 10, 3)) {
    const Vec y = 0.3 * y0;
    const double a = conformal_deficit(j, *s, y);
    const double b = conformal_deficit(j, *U, y) + 0.7 * conformal_deficit(j, *k, y);
    EXPECT_NEAR(a, b, 1e-12 * (1 + std::abs(a)));
  }
}

TEST(ConformalDeficit, ConstantFunction) {
  const int n = 7, m = 6;
  MetricJetComponents c;
  c.n = n;
  c.rbar.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
  c.scalar_curvature.value = 0.6;
  const MetricJet j(c);
  const ConstantField one(n, 1.0);
  Vec y = Vec::Constant(n, 0.2);
  EXPECT_NEAR(conformal_deficit(j, one, y), -(n - 2.0) / (4 * (n - 1.0)) * 0.6, 1e-15);
  const MetricJet none = MetricJet::flat(n);
  EXPECT_NEAR(conformal_deficit(none, one, y), 0.0, 1e-12);
}

TEST(ConformalDeficit, LeadingTermForPureH) {
  // (L_g - Delta) U = 2 t h_ij d_ij U - t |h|^2 d_t U + O(t^2) at fixed ybar
  const int n = 7, m = 6;
  const Mat h = oracle::diag_pi(n);
  const MetricJet j = MetricJet::pure_h(h);
  const BubbleField U(n);
  double prev = 0.0;
  for (double t : {1e-1, 1e-2, 1e-3}) {
    Vec y = Vec::Zero(n);
    y(0) = 0.6;
    y(m) = t;
    const auto u = U.evaluate(y, 2);
    const double lead = 2 * t * (h.cwiseProduct(u.hessian.topLeftCorner(m, m))).sum() - t * h.squaredNorm() * u.gradient(m);
    const double err = std::abs(conformal_deficit(j, U, y) - lead) / std::abs(lead);
    if (prev > 0) EXPECT_LT(err, 0.2 * prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(MetricJet, RescaledJetIsTheDilatedMetric) {
  const MetricJet j = busy_jet(7);
  const double d = 0.25;
  const MetricJet r = j.rescaled(d);
  for (const Vec& y0 : bubble_interior_sample(7, 10, 33)) {
    const Vec y = 0.5 * y0;
    const auto a = r.metric_at(y), b = j.metric_at(d * y);
    EXPECT_LE((a.inverse - b.inverse).norm(), 1e-14);
    EXPECT_NEAR(a.density, b.density, 1e-14);
    EXPECT_NEAR(r.scalar_curvature().at(y), d * d * j.scalar_curvature().at(d * y), 1e-15);
  }
}
