// Acceptance gate.  One PASS/FAIL line per criterion; `--criterion k` runs a
// single one, no argument runs all seven.

#include "oracles.hpp"
#include "yamabe/bubble.hpp"
#include "yamabe/gamma_solver.hpp"
#include "yamabe/io.hpp"
#include "yamabe/metric_jet.hpp"
#include "yamabe/pohozaev.hpp"
#include "yamabe/reduced_functional.hpp"
#include "yamabe/special_integrals.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

using namespace yamabe;

namespace {

// pinned tolerances
constexpr double kRecurrenceTol = 1e-12;
constexpr double kQuadratureTol = 1e-10;
constexpr double kIntegralsSeconds = 1.0;
constexpr double kBoundaryTol = 1e-12;
constexpr double kLaplacianTol = 1e-5;
constexpr double kFdStep = 1e-3;
constexpr double kBubbleSeconds = 10.0;
constexpr double kOrderMin = 1.8;
constexpr double kReconstructionFactor = 10.0;
constexpr double kOriginTol = 1e-12;
constexpr double kOrthogonalityTol = 1e-6;
constexpr double kMcSigmas = 3.0;
constexpr double kGammaSeconds = 300.0;
constexpr double kFlatPTol = 1e-8;
constexpr double kFlatSeconds = 30.0;
constexpr double kI2RelTol = 0.01;
constexpr double kI3RelTol = 0.01;
constexpr double kRRelTol = 0.02;
constexpr double kLeadingSeconds = 600.0;
constexpr double kConstantTol = 1e-12;
constexpr double kProportionalityTol = 1e-12;

const std::vector<double> kSweep{0.1, 0.05, 0.025};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 2 pi^{(k+1)/2} / Gamma((k+1)/2)
double sphere_oracle(int k) { return 2.0 * std::pow(std::numbers::pi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1)); }

// omega_{n-2} int_0^inf s^{n-2} (1-s^2)/(1+s^2)^{n-1} ds, s = tan x, composite Simpson
double boundary_integral_oracle(int n) {
  const int N = 20000;
  const double b = std::numbers::pi / 2;
  auto f = [&](double x) {
    if (x >= b) return 0.0;
    const double s = std::tan(x), c = 1.0 / std::cos(x);
    return std::pow(s, n - 2) * (1 - s * s) / std::pow(1 + s * s, n - 1) * c * c;
  };
  const double h = b / N;
  double acc = f(0.0) + f(b);
  for (int i = 1; i < N; ++i) acc += (i % 2 ? 4 : 2) * f(i * h);
  return sphere_oracle(n - 2) * acc * h / 3;
}

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

bool report(int k, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d  %s  %s\n", ok ? "PASS" : "FAIL", k, name, detail.c_str());
  std::fflush(stdout);
  return ok;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void info(const std::string& s) { std::printf("  info: %s\n", s.c_str()); }

// Pure h with the curvature the zero-mean-curvature conformal normalization
// forces: Ric(0) = -|pi|^2 spread evenly over R_injn, R_g(0) = -|pi|^2.
MetricJet normalized_jet(const Mat& h) {
  MetricJetComponents c = MetricJet::pure_h(h).components();
  const int m = static_cast<int>(h.rows());
  c.rnn = -(h.squaredNorm() / m) * Mat::Identity(m, m);
  c.scalar_curvature.value = -h.squaredNorm();
  return MetricJet(c);
}

// R(U + delta^k gamma, same)/delta^2 over the sweep; k = 0 drops gamma
std::vector<double> r_sweep(const ProfilePtr& prof, const Mat& h, int k) {
  const int n = prof->dimension();
  const MetricJet base = normalized_jet(h);
  std::vector<double> q;
  for (double d : kSweep) {
    const MetricJet jet = base.rescaled(d);
    auto u = std::make_shared<LinearCombination>();
    u->add(1.0, std::make_shared<BubbleField>(n));
    if (k > 0) u->add(std::pow(d, k), std::make_shared<GammaField>(prof, h));
    q.push_back(curvature_form_R(*u, *u, jet, 0.5 / d).value / (d * d));
  }
  return q;
}

bool criterion_1() {
  Clock clk;
  double r1 = 0, r2 = 0, comp = 0, quad = 0, beta = 0;
  for (int n = 7; n <= 12; ++n) {
    for (int m = n - 2; m <= n + 1; ++m)
      for (int a = n - 4; a <= n + 2; ++a) {
        if (2 * m - a - 3 <= 0) continue;
        const double I = integral_I(m, a);
        beta = std::max(beta, rel(I, oracle::beta_form_I(m, a)));
        r1 = std::max(r1, rel(I, 2.0 * m / (2.0 * m - a - 1.0) * integral_I(m + 1, a)));
        r2 = std::max(r2, rel(I, (2.0 * m - a - 3.0) / (a + 1.0) * integral_I(m, a + 2)));
        quad = std::max(quad, rel(integral_I_quadrature(m, a), I));
      }
    const double lhs = (n - 5.0) * integral_I(n - 1, n - 2) / ((n - 3.0) * (n - 4.0)) - integral_I(n - 1, n) / (n - 4.0);
    comp = std::max(comp, rel(lhs, -8.0 * integral_I(n, n) / ((n - 3.0) * (n - 4.0))));
  }
  const double t = clk.seconds();
  const bool ok = r1 <= kRecurrenceTol && r2 <= kRecurrenceTol && comp <= kRecurrenceTol && beta <= kRecurrenceTol &&
                  quad <= kQuadratureTol && t < kIntegralsSeconds;
  char d[256];
  std::snprintf(d, sizeof d, "recurrences %.2e %.2e composite %.2e beta-form %.2e quadrature %.2e, %.3f s", r1, r2,
                comp, beta, quad, t);
  return report(1, "integral identities", ok, d);
}

bool criterion_2() {
  Clock clk;
  double lap = 0, bnd = 0, klap = 0, kbnd = 0;
  for (int n = 7; n <= 12; ++n) {
    const BubbleField U(n);
    const auto interior = bubble_interior_sample(n, 100, 17 + n);
    const auto boundary = bubble_boundary_sample(n, 100, 31 + n);
    for (const Vec& y : interior) {
      lap = std::max(lap, std::abs(oracle::fd_laplacian([&](const Vec& p) { return U.evaluate(p, 0).value; }, y, kFdStep)));
      for (int b = 1; b <= n; ++b)
        klap = std::max(klap, std::abs(oracle::fd_laplacian([&](const Vec& p) { return eval_kernel(b, p, n); }, y, kFdStep)));
    }
    for (const Vec& y : boundary) {
      const auto u = U.evaluate(y, 1);
      // -d_t U = (n-2) U^{n/(n-2)} and -d_t j = n U^{2/(n-2)} j
      bnd = std::max(bnd, std::abs(u.gradient(n - 1) + (n - 2.0) * std::pow(u.value, n / (n - 2.0))) /
                              std::abs(u.gradient(n - 1)));
      for (int b = 1; b <= n; ++b) {
        const auto j = KernelField(b, n).evaluate(y, 1);
        const double lhs = j.gradient(n - 1), rhs = -n * std::pow(u.value, 2.0 / (n - 2.0)) * j.value;
        kbnd = std::max(kbnd, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
    }
  }
  const double t = clk.seconds();
  const bool ok = lap <= kLaplacianTol && klap <= kLaplacianTol && bnd <= kBoundaryTol && kbnd <= kBoundaryTol &&
                  t < kBubbleSeconds;
  char d[256];
  std::snprintf(d, sizeof d, "laplacian %.2e kernel laplacian %.2e boundary %.2e kernel boundary %.2e, %.2f s", lap,
                klap, bnd, kbnd, t);
  return report(2, "bubble and kernel", ok, d);
}

bool criterion_3() {
  Clock clk;
  const int n = 7;
  GridSpec grid;  // 300x300, far field 30, graded
  const ConvergenceStudy st = convergence_study(n, grid, 3);
  const auto prof = std::make_shared<const GammaProfile>(solve_profile(n, grid));
  const Mat h = oracle::diag_pi(n);
  const double tau = prof->diagnostics().truncation_residual;
  double recon = 0.0;
  for (const Vec& y : bubble_interior_sample(n, 60, 5)) {
    const double s2 = y.head(n - 1).squaredNorm();
    if (s2 == 0.0 || !prof->contains(std::sqrt(s2), y(n - 1))) continue;
    recon = std::max(recon, full_residual(*prof, h, y) / (h.norm() * s2 * tau));
  }
  const auto inv = gamma_invariants(*prof, h);
  const double origin = std::max(std::abs(inv.gamma_at_origin), inv.tangential_gradient_at_origin);
  double orth = std::abs(inv.boundary_moment_normalized);
  for (double v : inv.pairings_normalized) orth = std::max(orth, std::abs(v));
  const double E = inv.energy.value;
  const auto mc = oracle::mc_gamma_energy(*prof, h, 400000, 20240601);
  const double z = std::abs(E - mc.mean) / mc.standard_error;
  const double t = clk.seconds();
  const bool ok = st.residual_order >= kOrderMin && recon <= kReconstructionFactor && origin <= kOriginTol &&
                  orth <= kOrthogonalityTol && E <= 0.0 && z <= kMcSigmas && t < kGammaSeconds;
  char d[320];
  std::snprintf(d, sizeof d,
                "order %.3f reconstruction %.2e origin %.1e orthogonality %.2e energy %.6f mc %.6f +- %.6f (%.2f se), "
                "%.1f s",
                st.residual_order, recon, origin, orth, E, mc.mean, mc.standard_error, z, t);
  info(fmt("b(0,0) = %.6f", st.b_origin.front()));
  return report(3, "gamma correction", ok, d);
}

bool criterion_4() {
  Clock clk;
  double worst = 0.0;
  for (int n : {7, 8, 10})
    for (double d : {0.5, 1.0})
      for (double r : {1.0, 2.0}) worst = std::max(worst, std::abs(compute_P(BubbleField(n, d), r).value));
  const double t = clk.seconds();
  char s[128];
  std::snprintf(s, sizeof s, "max |P| %.2e, %.2f s", worst, t);
  return report(4, "flat Pohozaev", worst <= kFlatPTol && t < kFlatSeconds, s);
}

bool criterion_5() {
  Clock clk;
  const int n = 7;
  const MetricJet flat = MetricJet::flat(n);
  const ConstantField one(n, 1.0), minus_one(n, -1.0), zero(n, 0.0);
  std::vector<double> q2, q3;
  for (double d : kSweep) {
    const BubbleField U(n, d);
    q2.push_back(compute_P_hat(U, 1.0, flat, 1.0, 0.0, one, zero).I2 / (d * d));
    q3.push_back(compute_P_hat(U, 1.0, flat, 0.0, 1.0, zero, minus_one).I3 / d);
  }
  const double L2 = richardson_limit(kSweep, q2, n - 4);
  const double L3 = richardson_limit(kSweep, q3, n - 3);
  const double t2 = -4.0 * (n - 2) * oracle::beta_form_I(n, n) * sphere_oracle(n - 2) / ((n - 3.0) * (n - 4.0));
  // beta = -1; (n-2)/2 from the bubble boundary equation, (n-2)/2 from P_hat
  const double t3 = 0.25 * (n - 2.0) * (n - 2.0) * -boundary_integral_oracle(n);
  const double e2 = rel(L2, t2), e3 = rel(L3, t3);
  info(fmt("I2/(eps1 delta^2) -> %.8f", L2) + fmt(" target %.8f", t2));
  info(fmt("I3/(eps2 delta)   -> %.8f", L3) + fmt(" target %.8f", t3));

  // R(U + delta^2 gamma, same)/delta^2 in the dilated chart of the normalized jet
  const auto prof = oracle::cached_profile_ptr(n, 300);
  const Mat h = oracle::diag_pi(n);
  const double E = gamma_energy_per_norm(*prof).value;
  const double tR = (curvature_pi_coefficient(n) - 0.5 * E) * h.squaredNorm();
  const auto qR = r_sweep(prof, h, 2);
  const double LR = richardson_limit(kSweep, qR, 1);
  const double eR = rel(LR, tR);
  for (std::size_t i = 0; i < kSweep.size(); ++i)
    info(fmt("R(U + delta^2 gamma)/delta^2 at delta %.3f", kSweep[i]) + fmt(" = %.6f", qR[i]));
  info(fmt("R/delta^2 -> %.6f", LR) + fmt(" target %.6f", tR));
  info(fmt("R(U, U)/delta^2 -> %.6f", richardson_limit(kSweep, r_sweep(prof, h, 0), 1)));
  info(fmt("R(U + delta gamma)/delta^2 -> %.6f", richardson_limit(kSweep, r_sweep(prof, h, 1), 1)));
  {
    const auto p8 = oracle::cached_profile_ptr(8, 300);
    const Mat h8 = oracle::diag_pi(8);
    const double t8 = (curvature_pi_coefficient(8) - 0.5 * gamma_energy_per_norm(*p8).value) * h8.squaredNorm();
    info(fmt("n = 8: R/delta^2 -> %.6f", richardson_limit(kSweep, r_sweep(p8, h8, 2), 1)) + fmt(" target %.6f", t8));
  }

  const double t = clk.seconds();
  char d[256];
  std::snprintf(d, sizeof d, "I2 rel %.2e I3 rel %.2e R rel %.2e, %.1f s", e2, e3, eR, t);
  return report(5, "leading constants", e2 <= kI2RelTol && e3 <= kI3RelTol && eR <= kRRelTol && t < kLeadingSeconds, d);
}

bool criterion_6() {
  const double p3 = std::pow(std::numbers::pi, 3);
  // oracle: A = (n-2)(n-3)/(2(n-1)^2) w, C = (n-2)/(n-1) w, w = omega_{n-2} I_{n-1}^n
  const double w7 = sphere_oracle(5) * oracle::beta_form_I(6, 7);
  const auto k7 = expansion_constants(7);
  const double eA = std::max(rel(k7.A, p3 / 144.0), rel(20.0 / 72.0 * w7, p3 / 144.0));
  const double eC = std::max(rel(k7.C, p3 / 48.0), rel(5.0 / 6.0 * w7, p3 / 48.0));
  double mn = 1e300;
  for (int n = 7; n <= 12; ++n) {
    const auto k = expansion_constants(n);
    mn = std::min({mn, k.A, k.B, k.C});
  }
  double phimax = -1e300;
  for (int n : {7, 8}) {
    const double E = gamma_energy_per_norm(oracle::cached_profile(n, 150)).value;
    std::vector<Mat> pis;
    for (int s = 0; s < 20; ++s) pis.push_back(oracle::random_trace_free(n - 1, 900 + s));
    if (n == 7)
      for (const char* f : {"geometry-compact.json", "geometry-regime1.json", "geometry-regime2.json"})
        for (const auto& q : load_geometry(std::string(YAMABE_CONFIG_DIR) + "/" + f).samples) pis.push_back(q.pi);
    for (const Mat& p : pis)
      for (auto c : {OmegaConvention::Printed, OmegaConvention::Corrected})
        phimax = std::max(phimax, phi_from_energy(p, n, E, c));
  }
  char d[256];
  std::snprintf(d, sizeof d, "A(7) rel %.2e C(7) rel %.2e min(A,B,C) %.4f max phi %.4e", eA, eC, mn, phimax);
  return report(6, "constant table", eA <= kConstantTol && eC <= kConstantTol && mn > 0.0 && phimax <= 0.0, d);
}

bool criterion_7() {
  const double E = gamma_energy_per_norm(oracle::cached_profile(7, 300)).value;
  const auto k = expansion_constants(7);
  const std::pair<const char*, Verdict> table[] = {{"geometry-compact.json", Verdict::Compact},
                                                   {"geometry-regime1.json", Verdict::BlowUpRegime1},
                                                   {"geometry-regime2.json", Verdict::BlowUpRegime2}};
  bool verdicts = true;
  std::string got;
  for (const auto& [file, want] : table) {
    const BoundaryGeometry g = load_geometry(std::string(YAMABE_CONFIG_DIR) + "/" + file);
    std::vector<double> ph;
    for (const auto& q : g.samples) ph.push_back(phi_from_energy(q.pi, g.n, E));
    const Verdict v = classify(g, k, ph, 1.0).verdict;
    verdicts = verdicts && v == want;
    got += (got.empty() ? "" : "/") + to_string(v);
  }
  double prop = 0.0;
  for (int n = 7; n <= 12; ++n)
    prop = std::max(prop, rel(curvature_pi_coefficient(n) / alpha_coefficient(n),
                              (n - 6.0) / (4.0 * (n - 1.0) * (n - 2.0) * (n - 2.0))));
  char d[256];
  std::snprintf(d, sizeof d, "verdicts %s proportionality %.2e", got.c_str(), prop);
  return report(7, "classifier", verdicts && prop <= kProportionalityTol, d);
}

}  // namespace

int main(int argc, char** argv) {
  const std::function<bool()> all[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                       criterion_5, criterion_6, criterion_7};
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion 1..7]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > 7) {
    std::fprintf(stderr, "criterion must be 1..7\n");
    return 2;
  }
  bool ok = true;
  for (int k = 1; k <= 7; ++k)
    if (only == 0 || only == k) {
      try {
        ok = all[k - 1]() && ok;
      } catch (const std::exception& e) {
        report(k, "exception", false, e.what());
        ok = false;
      }
    }
  return ok ? 0 : 1;
}
