#pragma once

#include "yamabe/field.hpp"
#include "yamabe/metric_jet.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace yamabe {

class GammaProfile;

enum class Scheme { Axisymmetric, QuadraticMoment, MonteCarlo };
std::string to_string(Scheme s);

struct QuadratureOptions {
  int radial_points = 6;      // Gauss points per radial panel
  int polar_points = 20;      // Gauss points in the polar angle of the half ball
  int hemisphere_points = 24; // Gauss points in the polar angle of the hemisphere
  std::size_t monte_carlo_samples = 400000;
  std::uint64_t seed = 20240601;
  bool estimate_error = true;   // repeat on a coarser rule and report the difference
  bool force_monte_carlo = false;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  Scheme scheme = Scheme::Axisymmetric;
  int sphere_degree = 0;
};

struct PohozaevReport {
  double r = 0.0;
  double P = 0.0;
  double P_hat = 0.0;
  double I1 = 0.0, I2 = 0.0, I3 = 0.0;
  double P_error = 0.0;
  double P_hat_error = 0.0;
  Scheme scheme = Scheme::Axisymmetric;
  int sphere_degree = 0;
  std::uint64_t seed = 0;
};

// Surface functional P(u, r): hemisphere term plus the rim term on
// {|ybar| = r, y_n = 0} with Euclidean measures.
QuadratureResult compute_P(const Field& u, double r, const QuadratureOptions& opt = {});

// P_hat split into I1 (metric deficit), I2 (eps1 alpha), I3 (eps2 beta on the
// flat part of the boundary).  P is evaluated in the same call.
PohozaevReport compute_P_hat(const Field& u, double r, const MetricJet& jet, double eps1, double eps2,
                             const Field& alpha, const Field& beta, const QuadratureOptions& opt = {});

// R(u, v) = -int_{B_radius^+} (y.grad u + (n-2)/2 u) (L_g - Delta) v.
QuadratureResult curvature_form_R(const Field& u, const Field& v, const MetricJet& jet, double radius,
                                  const QuadratureOptions& opt = {});

// Limits of the flat-case terms for U_delta with constant coefficients.
double flat_I2_limit(int n, double alpha);         // lim I2/(eps1 delta^2)
double flat_I3_limit(int n, double beta);          // lim I3/(eps2 delta), P_hat's (n-2)/2 prefactor included
double boundary_kernel_constant(int n, double beta);  // (n-2)/2 beta int_{R^{n-1}} (1-|z|^2)/(1+|z|^2)^{n-1}

// Extrapolates q(delta) -> delta = 0 assuming q = L + sum_j c_j delta^{p+j},
// j = 0..k-2 for k samples.
double richardson_limit(const std::vector<double>& deltas, const std::vector<double>& values, int leading_power);

// Coefficient of |pi|^2 delta^2 in R(U + delta^2 gamma, .) minus the energy part.
double curvature_pi_coefficient(int n);
double alpha_coefficient(int n);  // 4(n-2) I_n^n omega_{n-2}/((n-3)(n-4))

struct SignEstimateReport {
  int n = 0;
  double pi_norm_squared = 0.0;
  double alpha = 0.0;
  double eps1 = 0.0;
  double pi_coefficient = 0.0;
  double alpha_coefficient = 0.0;
  double coefficient_ratio = 0.0;    // pi_coefficient / alpha_coefficient
  double theorem_condition = 0.0;    // alpha - (n-6)/(4(n-1)(n-2)^2) |pi|^2
  std::vector<double> deltas;
  std::vector<double> bounds;        // delta^2 [pi_coef |pi|^2 - alpha_coef eps1 alpha]
  std::optional<double> energy_term; // -1/2 int gamma Delta gamma, when a profile is supplied
  int sign = 0;                      // sign of the bracket
};

SignEstimateReport sign_estimate_check(const MetricJet& jet, const Field& alpha, double eps1,
                                       const std::vector<double>& deltas, const GammaProfile* profile = nullptr);

}  // namespace yamabe
