#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace yamabe {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// k-point Gauss rule for the weight (1-x^2)^a on [-1,1], a > -1, from the
// Golub-Welsch eigenproblem.  a = 0 is Gauss-Legendre.
GaussRule gauss_symmetric_jacobi(int k, double a);

// Gauss-Legendre rule mapped to [lo, hi].
GaussRule gauss_legendre(int k, double lo, double hi);

// Composite Gauss-Legendre over the panels [breaks[i], breaks[i+1]].
GaussRule composite_gauss(const std::vector<double>& breaks, int points_per_panel);

// Panel breaks on [0, R] that refine geometrically toward 0 around `scale`.
std::vector<double> graded_breaks(double R, double scale);

// Cubature on the unit sphere S^{m-1} in R^m.
class SphereRule {
 public:
  // Exact for polynomials of total degree <= degree (product of Gegenbauer
  // rules in nested polar angles and a trapezoid rule on the last circle).
  static SphereRule product(int m, int degree);
  // One node e_1 carrying the full measure; exact for constants only, so use
  // it only for integrands that are invariant under rotations.
  static SphereRule single_point(int m);

  int ambient_dimension() const { return m_; }
  std::size_t size() const { return weights_.size(); }
  const Vec& node(std::size_t i) const { return nodes_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

 private:
  int m_ = 0;
  std::vector<Vec> nodes_;
  std::vector<double> weights_;
};

// Finite-difference weights (Fornberg) for derivatives 0..max_order at z on
// arbitrary nodes x.  Result(k, j) multiplies f(x_j) for the k-th derivative.
Mat fornberg_weights(double z, const std::vector<double>& x, int max_order);

// Tensor rule on the closed upper half ball of radius R in R^n, written as
// y = (rho sin(phi) theta, rho cos(phi)), theta in S^{n-2}, phi in [0, pi/2].
struct HalfBallRule {
  int n = 0;
  GaussRule radial;   // rho nodes, weights include rho^{n-1}
  GaussRule polar;    // phi nodes, weights include sin^{n-2}(phi)
  SphereRule sphere;  // S^{n-2}

  static HalfBallRule build(int n, double R, double scale, const SphereRule& sphere, int radial_points = 6,
                            int polar_points = 20);

  // Calls f(y, w) for every node; returns nothing, accumulation is the caller's.
  template <class F>
  void for_each(F&& f) const {
    Vec y(n);
    for (std::size_t a = 0; a < radial.size(); ++a) {
      const double rho = radial.nodes[a];
      for (std::size_t b = 0; b < polar.size(); ++b) {
        const double s = rho * std::sin(polar.nodes[b]);
        y(n - 1) = rho * std::cos(polar.nodes[b]);
        const double wrb = radial.weights[a] * polar.weights[b];
        for (std::size_t c = 0; c < sphere.size(); ++c) {
          y.head(n - 1) = s * sphere.node(c);
          f(y, wrb * sphere.weight(c));
        }
      }
    }
  }
};

// Rule on the flat disc {|ybar| <= R, y_n = 0} and its rim sphere.
struct DiscRule {
  int n = 0;
  GaussRule radial;  // weights include s^{n-2}
  SphereRule sphere;

  static DiscRule build(int n, double R, double scale, const SphereRule& sphere, int radial_points = 6);

  template <class F>
  void for_each(F&& f) const {
    Vec y = Vec::Zero(n);
    for (std::size_t a = 0; a < radial.size(); ++a)
      for (std::size_t c = 0; c < sphere.size(); ++c) {
        y.head(n - 1) = radial.nodes[a] * sphere.node(c);
        f(y, radial.weights[a] * sphere.weight(c));
      }
  }
};

// Rule on the hemisphere {|y| = r, y_n >= 0}; weights carry r^{n-1}.
struct HemisphereRule {
  int n = 0;
  double r = 0.0;
  GaussRule polar;
  SphereRule sphere;

  static HemisphereRule build(int n, double r, const SphereRule& sphere, int polar_points = 24);

  template <class F>
  void for_each(F&& f) const {
    Vec y(n);
    const double area = std::pow(r, n - 1);
    for (std::size_t b = 0; b < polar.size(); ++b) {
      const double s = r * std::sin(polar.nodes[b]);
      y(n - 1) = r * std::cos(polar.nodes[b]);
      for (std::size_t c = 0; c < sphere.size(); ++c) {
        y.head(n - 1) = s * sphere.node(c);
        f(y, area * polar.weights[b] * sphere.weight(c));
      }
    }
  }
};

}  // namespace yamabe
