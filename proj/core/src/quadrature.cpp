#include "yamabe/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>

namespace yamabe {

GaussRule gauss_symmetric_jacobi(int k, double a) {
  if (k < 1) throw std::invalid_argument("gauss_symmetric_jacobi: need k >= 1");
  if (a <= -1.0) throw std::invalid_argument("gauss_symmetric_jacobi: need a > -1");
  Mat J = Mat::Zero(k, k);
  for (int i = 1; i < k; ++i) {
    const double beta = i * (i + 2.0 * a) / ((2.0 * i + 2.0 * a + 1.0) * (2.0 * i + 2.0 * a - 1.0));
    J(i, i - 1) = J(i - 1, i) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  const double mu0 = std::sqrt(std::numbers::pi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  GaussRule r;
  r.nodes.resize(k);
  r.weights.resize(k);
  for (int i = 0; i < k; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v * v;
  }
  // symmetric weight: clean the middle node of odd rules
  if (k % 2 == 1) r.nodes[k / 2] = 0.0;
  return r;
}

GaussRule gauss_legendre(int k, double lo, double hi) {
  GaussRule r = gauss_symmetric_jacobi(k, 0.0);
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  for (int i = 0; i < k; ++i) {
    r.nodes[i] = c + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

GaussRule composite_gauss(const std::vector<double>& breaks, int points_per_panel) {
  GaussRule ref = gauss_symmetric_jacobi(points_per_panel, 0.0);
  GaussRule out;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double c = 0.5 * (breaks[p] + breaks[p + 1]), h = 0.5 * (breaks[p + 1] - breaks[p]);
    for (int i = 0; i < points_per_panel; ++i) {
      out.nodes.push_back(c + h * ref.nodes[i]);
      out.weights.push_back(h * ref.weights[i]);
    }
  }
  return out;
}

std::vector<double> graded_breaks(double R, double scale) {
  if (!(R > 0.0) || !(scale > 0.0)) throw std::invalid_argument("graded_breaks: need R, scale > 0");
  std::vector<double> b{0.0};
  for (double x = 0.25 * scale; x < R * (1.0 - 1e-12); x *= 2.0) b.push_back(x);
  b.push_back(R);
  return b;
}

SphereRule SphereRule::single_point(int m) {
  if (m < 1) throw std::invalid_argument("SphereRule: need m >= 1");
  SphereRule r;
  r.m_ = m;
  Vec e = Vec::Zero(m);
  e(0) = 1.0;
  r.nodes_.push_back(e);
  r.weights_.push_back(m == 1 ? 2.0 : 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m));
  return r;
}

SphereRule SphereRule::product(int m, int degree) {
  if (m < 1) throw std::invalid_argument("SphereRule: need m >= 1");
  if (degree < 0) throw std::invalid_argument("SphereRule: need degree >= 0");
  SphereRule r;
  r.m_ = m;
  if (m == 1) {
    r.nodes_ = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    r.weights_ = {1.0, 1.0};
    return r;
  }
  if (m == 2) {
    const int N = degree + 1;
    for (int k = 0; k < N; ++k) {
      const double a = 2.0 * std::numbers::pi * k / N;
      Vec x(2);
      x << std::cos(a), std::sin(a);
      r.nodes_.push_back(x);
      r.weights_.push_back(2.0 * std::numbers::pi / N);
    }
    return r;
  }
  // x = (u, sqrt(1-u^2) xi), dS = (1-u^2)^{(m-3)/2} du dS(xi)
  const SphereRule sub = product(m - 1, degree);
  const GaussRule g = gauss_symmetric_jacobi(degree / 2 + 1, 0.5 * (m - 3));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = g.nodes[i], c = std::sqrt(std::max(0.0, 1.0 - u * u));
    for (std::size_t j = 0; j < sub.size(); ++j) {
      Vec x(m);
      x(0) = u;
      x.tail(m - 1) = c * sub.node(j);
      r.nodes_.push_back(std::move(x));
      r.weights_.push_back(g.weights[i] * sub.weight(j));
    }
  }
  return r;
}

Mat fornberg_weights(double z, const std::vector<double>& x, int max_order) {
  const int N = static_cast<int>(x.size()) - 1;
  const int M = max_order;
  Mat c = Mat::Zero(M + 1, N + 1);
  double c1 = 1.0, c4 = x[0] - z;
  c(0, 0) = 1.0;
  for (int i = 1; i <= N; ++i) {
    const int mn = std::min(i, M);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c(k, i) = c1 * (k * c(k - 1, i - 1) - c5 * c(k, i - 1)) / c2;
        c(0, i) = -c1 * c5 * c(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k) c(k, j) = (c4 * c(k, j) - k * c(k - 1, j)) / c3;
      c(0, j) = c4 * c(0, j) / c3;
    }
    c1 = c2;
  }
  return c;
}

HalfBallRule HalfBallRule::build(int n, double R, double scale, const SphereRule& sphere, int radial_points,
                                 int polar_points) {
  if (sphere.ambient_dimension() != n - 1) throw std::invalid_argument("HalfBallRule: sphere must live in R^{n-1}");
  HalfBallRule h;
  h.n = n;
  h.sphere = sphere;
  h.radial = composite_gauss(graded_breaks(R, scale), radial_points);
  for (std::size_t i = 0; i < h.radial.size(); ++i) h.radial.weights[i] *= std::pow(h.radial.nodes[i], n - 1);
  h.polar = gauss_legendre(polar_points, 0.0, 0.5 * std::numbers::pi);
  for (std::size_t i = 0; i < h.polar.size(); ++i) h.polar.weights[i] *= std::pow(std::sin(h.polar.nodes[i]), n - 2);
  return h;
}

DiscRule DiscRule::build(int n, double R, double scale, const SphereRule& sphere, int radial_points) {
  if (sphere.ambient_dimension() != n - 1) throw std::invalid_argument("DiscRule: sphere must live in R^{n-1}");
  DiscRule d;
  d.n = n;
  d.sphere = sphere;
  d.radial = composite_gauss(graded_breaks(R, scale), radial_points);
  for (std::size_t i = 0; i < d.radial.size(); ++i) d.radial.weights[i] *= std::pow(d.radial.nodes[i], n - 2);
  return d;
}

HemisphereRule HemisphereRule::build(int n, double r, const SphereRule& sphere, int polar_points) {
  if (sphere.ambient_dimension() != n - 1)
    throw std::invalid_argument("HemisphereRule: sphere must live in R^{n-1}");
  HemisphereRule h;
  h.n = n;
  h.r = r;
  h.sphere = sphere;
  h.polar = gauss_legendre(polar_points, 0.0, 0.5 * std::numbers::pi);
  for (std::size_t i = 0; i < h.polar.size(); ++i) h.polar.weights[i] *= std::pow(std::sin(h.polar.nodes[i]), n - 2);
  return h;
}

}  // namespace yamabe
