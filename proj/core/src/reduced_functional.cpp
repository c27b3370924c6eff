#include "yamabe/reduced_functional.hpp"

#include "yamabe/gamma_solver.hpp"
#include "yamabe/special_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace yamabe {

namespace {

void require_dimension(int n, const char* who) {
  if (n < 7) throw std::domain_error(std::string(who) + ": requires n >= 7, got n = " + std::to_string(n));
}

std::string sample_name(const BoundaryGeometry& g, std::size_t k) {
  const auto& l = g.samples[k].label;
  return l.empty() ? "#" + std::to_string(k) : "'" + l + "' (#" + std::to_string(k) + ")";
}

}  // namespace

ExpansionConstants expansion_constants(int n) {
  require_dimension(n, "expansion_constants");
  const double w = sphere_volume(n - 2) * integral_I(n - 1, n);
  ExpansionConstants k;
  k.n = n;
  k.A = (n - 2.0) * (n - 3.0) / (2.0 * (n - 1.0) * (n - 1.0)) * w;
  k.B = (n - 2.0) / ((n - 1.0) * (n - 4.0)) * w;
  k.C = (n - 2.0) / (n - 1.0) * w;
  return k;
}

double compactness_threshold(int n) { return (n - 6.0) / (4.0 * (n - 1.0) * (n - 2.0) * (n - 2.0)); }

OmegaConvention parse_omega_convention(const std::string& s) {
  if (s == "printed") return OmegaConvention::Printed;
  if (s == "corrected") return OmegaConvention::Corrected;
  throw std::invalid_argument("omega convention must be 'printed' or 'corrected', got '" + s + "'");
}

std::string to_string(OmegaConvention c) { return c == OmegaConvention::Printed ? "printed" : "corrected"; }

double phi_pi_coefficient(int n, OmegaConvention c) {
  require_dimension(n, "phi");
  const double w = sphere_volume(c == OmegaConvention::Printed ? n - 1 : n - 2);
  return (n - 6.0) * (n - 2.0) * w * integral_I(n - 1, n) / (4.0 * (n - 1.0) * (n - 1.0) * (n - 4.0));
}

double phi_from_energy(const Mat& pi, int n, double energy_per_norm, OmegaConvention c) {
  require_trace_free(pi, "phi");
  const double p2 = pi.squaredNorm();
  return 0.5 * energy_per_norm * p2 - phi_pi_coefficient(n, c) * p2;
}

double phi(const Mat& pi, const GammaProfile& profile, OmegaConvention c) {
  const int n = profile.dimension();
  if (pi.rows() != n - 1) throw std::invalid_argument("phi: pi must be (n-1)x(n-1)");
  require_trace_free(pi, "phi");
  return 0.5 * gamma_energy(profile, pi).value - phi_pi_coefficient(n, c) * pi.squaredNorm();
}

void BoundaryGeometry::validate() const {
  require_dimension(n, "BoundaryGeometry");
  if (samples.empty()) throw std::invalid_argument("BoundaryGeometry: sample list is empty");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Mat& p = samples[k].pi;
    if (p.rows() != n - 1 || p.cols() != n - 1)
      throw std::invalid_argument("BoundaryGeometry: pi at sample " + sample_name(*this, k) + " must be (n-1)x(n-1)");
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("BoundaryGeometry: pi at sample " + sample_name(*this, k) + " is not symmetric");
    if (std::abs(p.trace()) > 1e-12)
      throw std::invalid_argument("BoundaryGeometry: pi at sample " + sample_name(*this, k) +
                                  " is not trace-free (tr = " + std::to_string(p.trace()) + ")");
    if (!std::isfinite(samples[k].alpha) || !std::isfinite(samples[k].beta))
      throw std::invalid_argument("BoundaryGeometry: non-finite alpha/beta at sample " + sample_name(*this, k));
  }
}

std::string to_string(CriticalType t) {
  switch (t) {
    case CriticalType::Max: return "max";
    case CriticalType::Min: return "min";
    case CriticalType::Saddle: return "saddle-in-lambda";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Compact: return "Compact";
    case Verdict::BlowUpRegime1: return "BlowUpRegime1";
    case Verdict::BlowUpRegime2: return "BlowUpRegime2";
    case Verdict::Indeterminate: return "Indeterminate";
  }
  return "unknown";
}

namespace {

double kappa(Regime regime, const BoundarySample& q, const ExpansionConstants& k, double phi) {
  return regime == Regime::One ? phi : q.alpha * k.B + phi;
}

}  // namespace

double reduced_G(Regime regime, const BoundarySample& q, const ExpansionConstants& k, double phi, double lambda) {
  return lambda * q.beta * k.C + lambda * lambda * kappa(regime, q, k, phi);
}

ReducedLandscape landscape(Regime regime, const BoundaryGeometry& geometry, const ExpansionConstants& constants,
                           const std::vector<double>& phi_values, LambdaRange range) {
  geometry.validate();
  const auto& S = geometry.samples;
  if (phi_values.size() != S.size()) throw std::invalid_argument("landscape: need one phi value per sample");
  if (constants.n != geometry.n) throw std::invalid_argument("landscape: constants computed for another dimension");
  if (range.points < 3 || !(range.hi > range.lo) || range.lo < 0.0)
    throw std::invalid_argument("landscape: lambda range must satisfy 0 <= lo < hi with >= 3 points");
  for (std::size_t k = 0; k < S.size(); ++k) {
    if (regime == Regime::One && !(S[k].beta > 0.0))
      throw std::invalid_argument("landscape: regime 1 needs beta > 0, violated at sample " + sample_name(geometry, k));
    if (regime == Regime::Two && !(S[k].beta < 0.0 && S[k].alpha > 0.0))
      throw std::invalid_argument("landscape: regime 2 needs beta < 0 and alpha > 0, violated at sample " +
                                  sample_name(geometry, k));
    if (kappa(regime, S[k], constants, phi_values[k]) == 0.0)
      throw std::invalid_argument("landscape: degenerate sample " + sample_name(geometry, k) +
                                  " (quadratic coefficient vanishes)");
  }

  ReducedLandscape L;
  L.regime = regime;
  for (std::size_t k = 0; k < S.size(); ++k) {
    const double kap = kappa(regime, S[k], constants, phi_values[k]);
    const double lam = -S[k].beta * constants.C / (2.0 * kap);
    if (!(lam > 0.0)) continue;
    CriticalPoint c;
    c.sample = k;
    c.lambda = lam;
    c.value = reduced_G(regime, S[k], constants, phi_values[k], lam);
    c.derivative = S[k].beta * constants.C + 2.0 * kap * lam;
    c.type = kap < 0.0 ? CriticalType::Max : CriticalType::Min;
    L.critical.push_back(c);
  }
  if (L.critical.empty()) throw std::invalid_argument("landscape: no sample has an interior lambda-critical point");

  double lam_max = 0.0;
  for (const auto& c : L.critical) lam_max = std::max(lam_max, c.lambda);
  if (lam_max >= 0.9 * range.hi) range.hi = 2.0 * lam_max;
  L.range = range;

  L.lambdas.resize(range.points);
  for (int i = 0; i < range.points; ++i) L.lambdas[i] = range.lo + (range.hi - range.lo) * i / (range.points - 1.0);
  L.values.assign(S.size(), std::vector<double>(range.points));
  for (std::size_t k = 0; k < S.size(); ++k)
    for (int i = 0; i < range.points; ++i) L.values[k][i] = reduced_G(regime, S[k], constants, phi_values[k], L.lambdas[i]);

  // regime 1: absolute maximum; regime 2: the interior stationary points are
  // lambda-minima, the absolute minimum among them is selected.
  const bool want_max = regime == Regime::One;
  auto better = [&](double a, double b) { return want_max ? a > b : a < b; };
  for (std::size_t c = 0; c < L.critical.size(); ++c)
    if (better(L.critical[c].value, L.critical[L.selected].value)) L.selected = c;

  bool first = true;
  for (const auto& c : L.critical)
    for (int i = 0; i < range.points; ++i) {
      const double v = L.values[c.sample][i];
      if (first || better(v, L.grid_value)) {
        L.grid_value = v;
        L.grid_lambda = L.lambdas[i];
        L.grid_selected = c.sample;
        first = false;
      }
    }
  return L;
}

Classification classify(const BoundaryGeometry& geometry, const ExpansionConstants& constants,
                        const std::vector<double>& phi_values, double epsilon_bar) {
  geometry.validate();
  const auto& S = geometry.samples;
  if (phi_values.size() != S.size()) throw std::invalid_argument("classify: need one phi value per sample");
  if (constants.n != geometry.n) throw std::invalid_argument("classify: constants computed for another dimension");
  if (!(epsilon_bar > 0.0 && epsilon_bar <= 1.0)) throw std::invalid_argument("classify: epsilon_bar must lie in (0, 1]");
  for (std::size_t k = 0; k < S.size(); ++k)
    if (S[k].pi.squaredNorm() == 0.0)
      throw std::invalid_argument("classify: non-umbilic hypothesis fails, pi = 0 at sample " + sample_name(geometry, k));

  Classification out;
  out.epsilon_bar = epsilon_bar;
  const double cn = compactness_threshold(geometry.n);
  const bool beta_neg = std::all_of(S.begin(), S.end(), [](const auto& q) { return q.beta < 0.0; });
  const bool beta_pos = std::all_of(S.begin(), S.end(), [](const auto& q) { return q.beta > 0.0; });
  const bool alpha_pos = std::all_of(S.begin(), S.end(), [](const auto& q) { return q.alpha > 0.0; });

  if (beta_neg) {
    std::size_t arg = 0;
    double m = -1e300;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double v = S[k].alpha - cn * S[k].pi.squaredNorm();
      if (v > m) { m = v; arg = k; }
    }
    if (m < 0.0) {
      out.verdict = Verdict::Compact;
      out.witness = arg;
      out.margin = -m;
      return out;
    }
  }
  if (beta_pos) {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < S.size(); ++k)
      if (S[k].beta < S[arg].beta) arg = k;
    out.verdict = Verdict::BlowUpRegime1;
    out.witness = arg;
    out.margin = S[arg].beta;
    return out;
  }
  if (beta_neg && alpha_pos) {
    std::size_t arg = 0;
    double m = 1e300;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double v = S[k].alpha + phi_values[k] / constants.B;
      if (v < m) { m = v; arg = k; }
    }
    if (m > 0.0) {
      out.verdict = Verdict::BlowUpRegime2;
      out.witness = arg;
      out.margin = m;
      return out;
    }
  }
  return out;
}

}  // namespace yamabe
