#pragma once

#include "yamabe/quadrature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace yamabe {

class GammaProfile;

struct ExpansionConstants {
  int n = 0;
  double A = 0.0, B = 0.0, C = 0.0;
};

ExpansionConstants expansion_constants(int n);

// (n-6)/(4(n-1)(n-2)^2), the compactness threshold on |pi|^2.
double compactness_threshold(int n);

// Which sphere enters the |pi|^2 coefficient of phi: as printed (omega_{n-1})
// or the radial-slicing one (omega_{n-2}).
enum class OmegaConvention { Printed, Corrected };
OmegaConvention parse_omega_convention(const std::string& s);
std::string to_string(OmegaConvention c);

double phi_pi_coefficient(int n, OmegaConvention c = OmegaConvention::Printed);

// phi = 1/2 int gamma Delta gamma - coefficient |pi|^2.
double phi(const Mat& pi, const GammaProfile& profile, OmegaConvention c = OmegaConvention::Printed);
// Same, from a precomputed energy per unit |pi|^2.
double phi_from_energy(const Mat& pi, int n, double energy_per_norm, OmegaConvention c = OmegaConvention::Printed);

struct BoundarySample {
  std::string label;
  std::vector<double> coordinates;
  Mat pi;
  double alpha = 0.0;
  double beta = 0.0;
};

struct BoundaryGeometry {
  int n = 0;
  std::vector<BoundarySample> samples;
  void validate() const;  // throws std::invalid_argument naming the sample
};

enum class Regime { One = 1, Two = 2 };
enum class CriticalType { Max, Min, Saddle };
std::string to_string(CriticalType t);

struct CriticalPoint {
  std::size_t sample = 0;
  double lambda = 0.0;
  double value = 0.0;
  double derivative = 0.0;  // dG/dlambda at lambda
  CriticalType type = CriticalType::Max;
};

struct LambdaRange {
  double lo = 0.0;
  double hi = 4.0;
  int points = 401;
};

struct ReducedLandscape {
  Regime regime = Regime::One;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> values;  // values[k][i] = G(lambdas[i], q_k)
  std::vector<CriticalPoint> critical;      // closed form, one per sample
  std::size_t selected = 0;                 // index into critical
  std::size_t grid_selected = 0;            // sample chosen by the grid search
  double grid_lambda = 0.0;
  double grid_value = 0.0;
  LambdaRange range;                        // after auto-expansion
};

// G(lambda, q) = lambda beta C + lambda^2 kappa, kappa = phi (regime 1) or alpha B + phi (regime 2).
double reduced_G(Regime regime, const BoundarySample& q, const ExpansionConstants& k, double phi, double lambda);

ReducedLandscape landscape(Regime regime, const BoundaryGeometry& geometry, const ExpansionConstants& constants,
                           const std::vector<double>& phi_values, LambdaRange range = {});

enum class Verdict { Compact, BlowUpRegime1, BlowUpRegime2, Indeterminate };
std::string to_string(Verdict v);

struct Classification {
  Verdict verdict = Verdict::Indeterminate;
  std::optional<std::size_t> witness;
  double margin = 0.0;
  double epsilon_bar = 0.0;
};

Classification classify(const BoundaryGeometry& geometry, const ExpansionConstants& constants,
                        const std::vector<double>& phi_values, double epsilon_bar);

}  // namespace yamabe
