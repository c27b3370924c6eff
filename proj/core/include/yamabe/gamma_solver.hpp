#pragma once

#include "yamabe/field.hpp"

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace yamabe {

// Tensor grid x_k = L sinh(a k/N)/sinh(a), k = 0..N, in s and in t.
struct GridSpec {
  int ns = 300;
  int nt = 300;
  double s_max = 30.0;
  double t_max = 30.0;
  double grading = 6.0;             // a; 0 gives a uniform grid
  double max_truncation = 1.0;      // refuse grids whose truncation residual exceeds this

  std::vector<double> s_nodes() const;
  std::vector<double> t_nodes() const;
  GridSpec halved() const;  // half as many intervals in each direction
  std::string to_string() const;
  static GridSpec parse(const std::string& spec);  // "NSxNT[:FAR[:GRADING]]"
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double last_residual() const { return residual_; }

 private:
  double residual_;
};

class GridTooCoarse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileDiagnostics {
  double algebraic_residual = 0.0;   // max |A b - f| of the solved linear system
  double truncation_residual = 0.0;  // max |L4 b - f| over PDE rows, L4 a fourth-order stencil
  double boundary_truncation = 0.0;  // same for the Robin rows
  int iterations = 1;                // direct solve
  double min_spacing = 0.0;
  double max_spacing = 0.0;
};

// Values and interpolation data of b(s, t); immutable after construction.
class GammaProfile {
 public:
  struct Sample {
    double b = 0, bs = 0, bt = 0, bss = 0, bst = 0, btt = 0;
  };

  GammaProfile(int n, std::vector<double> s, std::vector<double> t, std::vector<double> values,
               ProfileDiagnostics diag, GridSpec spec);

  int dimension() const { return n_; }
  const std::vector<double>& s_nodes() const { return s_; }
  const std::vector<double>& t_nodes() const { return t_; }
  double value(int i, int j) const { return b_[idx(i, j)]; }
  const std::vector<double>& values() const { return b_; }
  const ProfileDiagnostics& diagnostics() const { return diag_; }
  const GridSpec& grid() const { return spec_; }
  double s_max() const { return s_.back(); }
  double t_max() const { return t_.back(); }
  double far_field_radius() const { return std::min(s_max(), t_max()); }
  bool contains(double s, double t) const;

  // Bicubic Hermite interpolant with fourth-order nodal derivatives.
  // order 0: b; 1: + bs, bt; 2: + bss, bst, btt.
  Sample evaluate(double s, double t, int order) const;

  void save(const std::filesystem::path& file) const;
  static GammaProfile load(const std::filesystem::path& file);

  static constexpr int kFormatVersion = 1;

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * t_.size() + j; }
  void build_derivatives();

  int n_;
  std::vector<double> s_, t_, b_, bs_, bt_, bst_;
  ProfileDiagnostics diag_;
  GridSpec spec_;
};

using ProfilePtr = std::shared_ptr<const GammaProfile>;

// Source term of the reduced equation: -2t (U_ss - U_s/s)/s^2 = -2n(n-2) t D^{-(n+2)/2}.
double profile_source(int n, double s, double t);

GammaProfile solve_profile(int n, const GridSpec& grid);

// Fourth-order residual of the reduced PDE for nodal values b on the grid.
ProfileDiagnostics truncation_diagnostics(int n, const std::vector<double>& s, const std::vector<double>& t,
                                          const std::vector<double>& b);

// gamma(y) = (h_ij y_i y_j) b(|ybar|, y_n) with derivatives up to `order`.
FieldJet reconstruct_gamma(const GammaProfile& profile, const Mat& h, const Vec& y, int order);

class GammaField final : public Field {
 public:
  GammaField(ProfilePtr profile, Mat h);
  int dimension() const override { return profile_->dimension(); }
  FieldJet evaluate(const Vec& y, int order) const override;
  AngularStructure structure() const override { return AngularStructure::polynomial(2); }
  double max_radius() const override { return profile_->far_field_radius(); }
  const Mat& h() const { return h_; }

 private:
  ProfilePtr profile_;
  Mat h_;
};

struct QuadValue {
  double value = 0.0;
  double error = 0.0;
};

// int gamma Delta gamma over the profile footprint, using Delta gamma = -2t h:d^2 U.
QuadValue gamma_energy(const GammaProfile& profile, const Mat& h);

// Same integral per unit |h|^2 (the energy is a fixed multiple of |h|^2).
QuadValue gamma_energy_per_norm(const GammaProfile& profile);

struct DecayFit {
  int tau = 0;
  double constant = 0.0;     // max |grad^tau gamma| (1+|y|)^{n-3+tau} on the sample rays
  double exponent = 0.0;     // fitted log-log slope of the envelope on the outer range
  double growth_ratio = 0.0; // weighted envelope max on [10,20] over max on [1,10]
  bool holds = false;        // exponent <= 3-tau-n + kDecaySlack and growth_ratio <= kGrowthSlack

  static constexpr double kDecaySlack = 0.25;
  static constexpr double kGrowthSlack = 1.25;
};

struct GammaInvariantReport {
  double gamma_at_origin = 0.0;
  double tangential_gradient_at_origin = 0.0;  // max_l |d_l gamma(0)|
  double boundary_moment = 0.0;
  double boundary_moment_normalized = 0.0;
  std::vector<double> pairings;             // <gamma, j_b>, b = 1..n
  std::vector<double> pairings_normalized;  // / (|gamma| |j_b|)
  double jn_projection = 0.0;               // <gamma,j_n>/<j_n,j_n>, size of the would-be correction
  double quadrature_tolerance = 0.0;
  DecayFit decay[2];
  QuadValue energy;
};

GammaInvariantReport gamma_invariants(const GammaProfile& profile, const Mat& h);

struct ConvergenceStudy {
  std::vector<GridSpec> grids;
  std::vector<double> truncation;  // per grid
  std::vector<double> b_origin;    // b(0,0) per grid
  double residual_order = 0.0;     // log2 ratio of the two finest truncation norms
  double solution_order = 0.0;     // from three successive b(0,0) values
};

// Solves on `finest` and on successively halved grids (levels >= 2).
ConvergenceStudy convergence_study(int n, const GridSpec& finest, int levels = 3);

// Full n-D residual |Delta gamma + 2t h:d^2 U| at y using the interpolant's Hessian.
double full_residual(const GammaProfile& profile, const Mat& h, const Vec& y);

void require_trace_free(const Mat& h, const char* who);

}  // namespace yamabe
