#include "yamabe/pohozaev.hpp"

#include "yamabe/gamma_solver.hpp"
#include "yamabe/reduced_functional.hpp"
#include "yamabe/special_integrals.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

namespace yamabe {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Axisymmetric: return "axisymmetric";
    case Scheme::QuadraticMoment: return "quadratic-moment";
    case Scheme::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

namespace {

int degree_of(AngularStructure a) { return a.type == AngularType::Polynomial ? a.degree : 0; }

struct Plan {
  Scheme scheme = Scheme::Axisymmetric;
  int degree = 0;
};

// all_radial: every field radial and the coefficients isotropic.
Plan make_plan(bool any_general, bool all_radial, int degree, bool force_mc) {
  if (force_mc || any_general) return {Scheme::MonteCarlo, 0};
  if (all_radial) return {Scheme::Axisymmetric, 0};
  return {Scheme::QuadraticMoment, std::max(degree, 2)};
}

template <std::size_t K>
using Acc = std::array<double, K>;

class Integrator {
 public:
  Integrator(int n, double r, double scale, Plan plan, const QuadratureOptions& opt, bool coarse)
      : n_(n), r_(r), scale_(std::min(scale, r)), plan_(plan), opt_(opt) {
    if (plan.scheme == Scheme::MonteCarlo) return;
    sphere_ = plan.scheme == Scheme::Axisymmetric ? SphereRule::single_point(n - 1)
                                                  : SphereRule::product(n - 1, plan.degree);
    radial_ = coarse ? std::max(2, opt.radial_points - 2) : opt.radial_points;
    polar_ = coarse ? std::max(4, opt.polar_points / 2) : opt.polar_points;
    hemi_ = coarse ? std::max(4, opt.hemisphere_points / 2) : opt.hemisphere_points;
  }

  template <std::size_t K, class F>
  Acc<K> volume(F&& f, Acc<K>& se) const {
    if (plan_.scheme == Scheme::MonteCarlo)
      return monte_carlo<K>(1, std::pow(r_, n_) * sphere_volume(n_ - 1) / (2.0 * n_), se, [&](std::mt19937_64& g, Vec& y) {
        direction(g, y, n_);
        y(n_ - 1) = std::abs(y(n_ - 1));
        y *= r_ * std::pow(unif_(g), 1.0 / n_);
      }, f);
    se.fill(0.0);
    Acc<K> acc{};
    HalfBallRule::build(n_, r_, scale_, sphere_, radial_, polar_).for_each([&](const Vec& y, double w) {
      const Acc<K> v = f(y);
      for (std::size_t k = 0; k < K; ++k) acc[k] += w * v[k];
    });
    return acc;
  }

  template <std::size_t K, class F>
  Acc<K> disc(F&& f, Acc<K>& se) const {
    if (plan_.scheme == Scheme::MonteCarlo)
      return monte_carlo<K>(2, std::pow(r_, n_ - 1) * sphere_volume(n_ - 2) / (n_ - 1.0), se,
                            [&](std::mt19937_64& g, Vec& y) {
                              Vec d(n_ - 1);
                              direction(g, d, n_ - 1);
                              y.setZero();
                              y.head(n_ - 1) = r_ * std::pow(unif_(g), 1.0 / (n_ - 1)) * d;
                            }, f);
    se.fill(0.0);
    Acc<K> acc{};
    DiscRule::build(n_, r_, scale_, sphere_, radial_).for_each([&](const Vec& y, double w) {
      const Acc<K> v = f(y);
      for (std::size_t k = 0; k < K; ++k) acc[k] += w * v[k];
    });
    return acc;
  }

  template <std::size_t K, class F>
  Acc<K> hemisphere(F&& f, Acc<K>& se) const {
    if (plan_.scheme == Scheme::MonteCarlo)
      return monte_carlo<K>(3, std::pow(r_, n_ - 1) * sphere_volume(n_ - 1) / 2.0, se,
                            [&](std::mt19937_64& g, Vec& y) {
                              direction(g, y, n_);
                              y(n_ - 1) = std::abs(y(n_ - 1));
                              y *= r_;
                            }, f);
    se.fill(0.0);
    Acc<K> acc{};
    HemisphereRule::build(n_, r_, sphere_, hemi_).for_each([&](const Vec& y, double w) {
      const Acc<K> v = f(y);
      for (std::size_t k = 0; k < K; ++k) acc[k] += w * v[k];
    });
    return acc;
  }

  template <std::size_t K, class F>
  Acc<K> rim(F&& f, Acc<K>& se) const {
    if (plan_.scheme == Scheme::MonteCarlo)
      return monte_carlo<K>(4, std::pow(r_, n_ - 2) * sphere_volume(n_ - 2), se, [&](std::mt19937_64& g, Vec& y) {
        Vec d(n_ - 1);
        direction(g, d, n_ - 1);
        y.setZero();
        y.head(n_ - 1) = r_ * d;
      }, f);
    se.fill(0.0);
    Acc<K> acc{};
    Vec y = Vec::Zero(n_);
    const double area = std::pow(r_, n_ - 2);
    for (std::size_t c = 0; c < sphere_.size(); ++c) {
      y.head(n_ - 1) = r_ * sphere_.node(c);
      const Acc<K> v = f(y);
      for (std::size_t k = 0; k < K; ++k) acc[k] += area * sphere_.weight(c) * v[k];
    }
    return acc;
  }

 private:
  static void direction(std::mt19937_64& g, Vec& y, int dim) {
    std::normal_distribution<double> N01;
    y.resize(std::max<int>(y.size(), dim));
    for (int a = 0; a < dim; ++a) y(a) = N01(g);
    const double nr = y.head(dim).norm();
    y.head(dim) /= nr;
  }

  template <std::size_t K, class S, class F>
  Acc<K> monte_carlo(unsigned stream, double measure, Acc<K>& se, S&& sampler, F&& f) const {
    std::seed_seq seq{static_cast<unsigned>(opt_.seed & 0xffffffffu), static_cast<unsigned>(opt_.seed >> 32), stream};
    std::mt19937_64 g(seq);
    Acc<K> sum{}, sum2{};
    Vec y(n_);
    const std::size_t N = opt_.monte_carlo_samples;
    for (std::size_t i = 0; i < N; ++i) {
      sampler(g, y);
      const Acc<K> v = f(y);
      for (std::size_t k = 0; k < K; ++k) {
        sum[k] += v[k];
        sum2[k] += v[k] * v[k];
      }
    }
    Acc<K> mean{};
    for (std::size_t k = 0; k < K; ++k) {
      mean[k] = measure * sum[k] / N;
      const double var = std::max(0.0, sum2[k] / N - (sum[k] / N) * (sum[k] / N));
      se[k] = measure * std::sqrt(var / (N - 1));
    }
    return mean;
  }

  int n_;
  double r_, scale_;
  Plan plan_;
  QuadratureOptions opt_;
  SphereRule sphere_ = SphereRule::single_point(1);
  int radial_ = 6, polar_ = 20, hemi_ = 24;
  mutable std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

void require_ball(const Field& f, double r, const char* who, const char* name) {
  if (!(r > 0.0)) throw std::domain_error(std::string(who) + ": radius must be > 0");
  if (r > f.max_radius())
    throw std::domain_error(std::string(who) + ": " + name + " is not defined on the half ball of radius " +
                            std::to_string(r));
}

double kernel_part(const FieldJet& u, const Vec& y, int n) { return y.dot(u.gradient) + 0.5 * (n - 2) * u.value; }

struct PParts {
  double value, se;
};

PParts P_parts(const Field& u, double r, const Integrator& in) {
  const int n = u.dimension();
  Acc<1> se1, se2;
  const Acc<1> hemi = in.hemisphere<1>([&](const Vec& y) {
    const FieldJet j = u.evaluate(y, 1);
    const double ur = y.dot(j.gradient) / r;
    return Acc<1>{0.5 * (n - 2) * j.value * ur - 0.5 * r * j.gradient.squaredNorm() + r * ur * ur};
  }, se1);
  const double p = 2.0 * (n - 1.0) / (n - 2.0);
  const Acc<1> rim = in.rim<1>([&](const Vec& y) { return Acc<1>{std::pow(std::abs(u.evaluate(y, 0).value), p)}; }, se2);
  const double c = r * (n - 2.0) * (n - 2.0) / (2.0 * (n - 1.0));
  return {hemi[0] + c * rim[0], std::hypot(se1[0], c * se2[0])};
}

Plan plan_for_P(const Field& u, const QuadratureOptions& opt) {
  const AngularStructure a = u.structure();
  return make_plan(a.type == AngularType::General, a.type == AngularType::Radial, 2 * degree_of(a) + 2,
                   opt.force_monte_carlo);
}

}  // namespace

QuadratureResult compute_P(const Field& u, double r, const QuadratureOptions& opt) {
  require_ball(u, r, "compute_P", "u");
  const Plan plan = plan_for_P(u, opt);
  const int n = u.dimension();
  const Integrator fine(n, r, u.length_scale(), plan, opt, false);
  const PParts v = P_parts(u, r, fine);
  QuadratureResult out{v.value, v.se, plan.scheme, plan.degree};
  if (plan.scheme != Scheme::MonteCarlo && opt.estimate_error)
    out.error = std::abs(v.value - P_parts(u, r, Integrator(n, r, u.length_scale(), plan, opt, true)).value);
  return out;
}

namespace {

struct HatParts {
  double I1, I2, I3, se1, se2, se3;
};

HatParts hat_parts(const Field& u, const MetricJet& jet, double eps1, double eps2, const Field& alpha,
                   const Field& beta, const Integrator& in) {
  const int n = u.dimension();
  const bool flat = jet.is_flat();
  Acc<2> sev, sed;
  const Acc<2> vol = in.volume<2>([&](const Vec& y) {
    const FieldJet j = u.evaluate(y, flat ? 1 : 2);
    const double k = kernel_part(j, y, n);
    const double d = flat ? 0.0 : jet.conformal_deficit(j, y);
    return Acc<2>{-k * d, k * alpha.evaluate(y, 0).value * j.value};
  }, sev);
  const Acc<1> bd = [&] {
    Acc<1> s;
    const Acc<1> v = in.disc<1>([&](const Vec& y) {
      const FieldJet j = u.evaluate(y, 1);
      return Acc<1>{kernel_part(j, y, n) * beta.evaluate(y, 0).value * j.value};
    }, s);
    sed[0] = s[0];
    return v;
  }();
  const double c3 = 0.5 * (n - 2) * eps2;
  return {vol[0], eps1 * vol[1], c3 * bd[0], sev[0], std::abs(eps1) * sev[1], std::abs(c3) * sed[0]};
}

}  // namespace

PohozaevReport compute_P_hat(const Field& u, double r, const MetricJet& jet, double eps1, double eps2,
                             const Field& alpha, const Field& beta, const QuadratureOptions& opt) {
  require_ball(u, r, "compute_P_hat", "u");
  const int n = u.dimension();
  if (jet.n() != n || alpha.dimension() != n || beta.dimension() != n)
    throw std::invalid_argument("compute_P_hat: dimension mismatch between u, jet and coefficients");
  const AngularStructure su = u.structure(), sa = alpha.structure(), sb = beta.structure();
  const bool general = su.type == AngularType::General || sa.type == AngularType::General ||
                       sb.type == AngularType::General;
  const bool radial = su.type == AngularType::Radial && sa.type == AngularType::Radial &&
                      sb.type == AngularType::Radial && jet.isotropic();
  const int du = degree_of(su);
  const int degree = std::max({2 * du + 2 + jet.extra_degree(), 2 * du + degree_of(sa), 2 * du + degree_of(sb),
                               2 * du + 2});
  const Plan plan = make_plan(general, radial, degree, opt.force_monte_carlo);
  const double scale = u.length_scale();
  const Integrator fine(n, r, scale, plan, opt, false);

  PohozaevReport rep;
  rep.r = r;
  rep.scheme = plan.scheme;
  rep.sphere_degree = plan.degree;
  rep.seed = opt.seed;
  const HatParts h = hat_parts(u, jet, eps1, eps2, alpha, beta, fine);
  rep.I1 = h.I1;
  rep.I2 = h.I2;
  rep.I3 = h.I3;
  rep.P_hat = rep.I1 + rep.I2 + rep.I3;
  const PParts p = P_parts(u, r, fine);
  rep.P = p.value;
  if (plan.scheme == Scheme::MonteCarlo) {
    rep.P_error = p.se;
    rep.P_hat_error = std::sqrt(h.se1 * h.se1 + h.se2 * h.se2 + h.se3 * h.se3);
  } else if (opt.estimate_error) {
    const Integrator coarse(n, r, scale, plan, opt, true);
    const HatParts hc = hat_parts(u, jet, eps1, eps2, alpha, beta, coarse);
    rep.P_hat_error = std::abs(rep.P_hat - (hc.I1 + hc.I2 + hc.I3));
    rep.P_error = std::abs(rep.P - P_parts(u, r, coarse).value);
  }
  return rep;
}

namespace {

Acc<1> R_value(const Field& u, const Field& v, const MetricJet& jet, const Integrator& in, Acc<1>& se) {
  const int n = u.dimension();
  if (jet.is_flat()) {
    se[0] = 0.0;
    return {0.0};
  }
  return in.volume<1>([&](const Vec& y) {
    const FieldJet ju = u.evaluate(y, 1);
    return Acc<1>{-kernel_part(ju, y, n) * jet.conformal_deficit(v.evaluate(y, 2), y)};
  }, se);
}

}  // namespace

QuadratureResult curvature_form_R(const Field& u, const Field& v, const MetricJet& jet, double radius,
                                  const QuadratureOptions& opt) {
  require_ball(u, radius, "curvature_form_R", "u");
  require_ball(v, radius, "curvature_form_R", "v");
  const int n = u.dimension();
  if (v.dimension() != n || jet.n() != n) throw std::invalid_argument("curvature_form_R: dimension mismatch");
  const AngularStructure su = u.structure(), sv = v.structure();
  const bool general = su.type == AngularType::General || sv.type == AngularType::General;
  const bool radial = su.type == AngularType::Radial && sv.type == AngularType::Radial && jet.isotropic();
  const Plan plan = make_plan(general, radial, degree_of(su) + degree_of(sv) + 2 + jet.extra_degree(),
                              opt.force_monte_carlo);
  const double scale = std::min(u.length_scale(), v.length_scale());
  Acc<1> se;
  const Acc<1> val = R_value(u, v, jet, Integrator(n, radius, scale, plan, opt, false), se);
  QuadratureResult out{val[0], se[0], plan.scheme, plan.degree};
  if (plan.scheme != Scheme::MonteCarlo && opt.estimate_error && !jet.is_flat()) {
    Acc<1> s2;
    out.error = std::abs(val[0] - R_value(u, v, jet, Integrator(n, radius, scale, plan, opt, true), s2)[0]);
  }
  return out;
}

double flat_I2_limit(int n, double alpha) {
  return -4.0 * (n - 2) * integral_I(n, n) * sphere_volume(n - 2) * alpha / ((n - 3.0) * (n - 4.0));
}

double boundary_kernel_constant(int n, double beta) {
  return 0.5 * (n - 2) * beta * sphere_volume(n - 2) * (integral_I(n - 1, n - 2) - integral_I(n - 1, n));
}

double flat_I3_limit(int n, double beta) { return 0.5 * (n - 2) * boundary_kernel_constant(n, beta); }

double richardson_limit(const std::vector<double>& deltas, const std::vector<double>& values, int leading_power) {
  const int k = static_cast<int>(deltas.size());
  if (k == 0 || values.size() != deltas.size()) throw std::invalid_argument("richardson_limit: need matching non-empty lists");
  Mat A(k, k);
  Vec b(k);
  for (int i = 0; i < k; ++i) {
    A(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) A(i, j) = std::pow(deltas[i], leading_power + j - 1);
    b(i) = values[i];
  }
  return A.fullPivLu().solve(b)(0);
}

double curvature_pi_coefficient(int n) {
  return (n - 6.0) * sphere_volume(n - 2) * integral_I(n, n) / ((n - 1.0) * (n - 2.0) * (n - 3.0) * (n - 4.0));
}

double alpha_coefficient(int n) {
  return 4.0 * (n - 2) * integral_I(n, n) * sphere_volume(n - 2) / ((n - 3.0) * (n - 4.0));
}

SignEstimateReport sign_estimate_check(const MetricJet& jet, const Field& alpha, double eps1,
                                       const std::vector<double>& deltas, const GammaProfile* profile) {
  const int n = jet.n();
  if (n < 7) throw std::domain_error("sign_estimate_check: requires n >= 7");
  if (std::abs(jet.h().trace()) > 1e-12) throw std::domain_error("sign_estimate_check: requires tr h = 0");
  if (!jet.rnn().isZero(0.0) || !jet.dh(0).isZero(0.0) || !jet.scalar_curvature().is_constant())
    throw std::domain_error("sign_estimate_check: requires a pure-h jet");
  SignEstimateReport r;
  r.n = n;
  r.pi_norm_squared = jet.pi_norm_squared();
  if (r.pi_norm_squared == 0.0)
    throw std::domain_error("sign_estimate_check: |pi| = 0, the boundary point is umbilic");
  r.alpha = alpha.evaluate(Vec::Zero(n), 0).value;
  r.eps1 = eps1;
  r.pi_coefficient = curvature_pi_coefficient(n);
  r.alpha_coefficient = alpha_coefficient(n);
  r.coefficient_ratio = r.pi_coefficient / r.alpha_coefficient;
  r.theorem_condition = r.alpha - compactness_threshold(n) * r.pi_norm_squared;
  const double bracket = r.pi_coefficient * r.pi_norm_squared - r.alpha_coefficient * eps1 * r.alpha;
  const double scale = r.pi_coefficient * r.pi_norm_squared + r.alpha_coefficient * std::abs(eps1 * r.alpha);
  r.sign = std::abs(bracket) <= 1e-12 * scale ? 0 : (bracket > 0.0 ? 1 : -1);
  r.deltas = deltas;
  for (double d : deltas) {
    if (!(d > 0.0)) throw std::domain_error("sign_estimate_check: deltas must be positive");
    r.bounds.push_back(d * d * bracket);
  }
  if (profile) r.energy_term = -0.5 * gamma_energy(*profile, jet.h()).value;
  return r;
}

}  // namespace yamabe
