#pragma once

#include "yamabe/field.hpp"

#include <limits>

namespace yamabe {

// U_delta(y) = delta^{-(n-2)/2} U((ybar - c)/delta, y_n/delta),
// U(y) = ((1+y_n)^2 + |ybar|^2)^{-(n-2)/2}, optionally multiplied by the
// radial cutoff chi(|y|) which is 1 on B_{R/2} and 0 outside B_R.
class BubbleField final : public Field {
 public:
  explicit BubbleField(int n, double delta = 1.0, double cutoff_radius = std::numeric_limits<double>::infinity(),
                       Vec center = Vec());

  int dimension() const override { return n_; }
  FieldJet evaluate(const Vec& y, int order) const override;
  AngularStructure structure() const override;
  double length_scale() const override { return delta_; }

  double delta() const { return delta_; }
  double cutoff_radius() const { return R_; }
  const Vec& center() const { return center_; }

 private:
  int n_;
  double delta_;
  double R_;
  Vec center_;
};

// The quintic cutoff profile in |y|: returns chi, chi', chi'' at radius rho.
struct CutoffValue {
  double value, d1, d2;
};
CutoffValue radial_cutoff(double rho, double R);

// Linearization kernel of the unit bubble: j_l = d_l U (l < n),
// j_n = y . grad U + (n-2)/2 U.  Index b is 1-based.
class KernelField final : public Field {
 public:
  KernelField(int b, int n);
  int dimension() const override { return n_; }
  int index() const { return b_; }
  FieldJet evaluate(const Vec& y, int order) const override;
  AngularStructure structure() const override;

 private:
  int b_;
  int n_;
};

FieldJet eval_bubble(const BubbleField& field, const Vec& y, int order);
double eval_kernel(int b, const Vec& y, int n);

struct BubbleResidualReport {
  int n = 0;
  double fd_step = 0.0;
  std::size_t interior_points = 0;
  std::size_t boundary_points = 0;
  double max_laplacian = 0.0;           // max |Delta U| by finite differences
  double max_boundary = 0.0;            // max |d_t U + (n-2) U^{n/(n-2)}|
  std::vector<double> kernel_laplacian; // per b = 1..n
  std::vector<double> kernel_boundary;  // max |d_t j_b + n U^{2/(n-2)} j_b|
};

// Interior points need y_n >= 2*fd_step for the five-point stencil.
BubbleResidualReport check_bubble_residual(const BubbleField& field, const std::vector<Vec>& interior,
                                           const std::vector<Vec>& boundary, double fd_step);

// Deterministic sample sets used by the CLI and the test suites.
std::vector<Vec> bubble_interior_sample(int n, std::size_t count, unsigned long long seed);
std::vector<Vec> bubble_boundary_sample(int n, std::size_t count, unsigned long long seed);

}  // namespace yamabe
