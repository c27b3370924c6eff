#include "yamabe/special_integrals.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace yamabe {

namespace {

void require_convergent_I(int m, int alpha) {
  if (m < 1) throw std::domain_error("integral_I: requires m >= 1, got m = " + std::to_string(m));
  if (alpha < 0)
    throw std::domain_error("integral_I: requires alpha >= 0, got alpha = " + std::to_string(alpha));
  if (2 * m - alpha - 1 <= 0)
    throw std::domain_error("integral_I: divergent pair, requires 2m - alpha - 1 > 0 (m = " +
                            std::to_string(m) + ", alpha = " + std::to_string(alpha) + ")");
}

void require_convergent_J(int k, int m) {
  if (k < 0) throw std::domain_error("integral_J: requires k >= 0, got k = " + std::to_string(k));
  if (m - 1 - k < 1)
    throw std::domain_error("integral_J: nonconvergent pair, requires m - 1 - k >= 1 (k = " +
                            std::to_string(k) + ", m = " + std::to_string(m) + ")");
}

template <class F>
double adaptive(F f, double a, double b, double* err) {
  double e = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 10, 1e-13, &e);
  if (err) *err += e;
  return v;
}

}  // namespace

double integral_I(int m, int alpha) {
  require_convergent_I(m, alpha);
  // u = s^2 gives (1/2) B((alpha+1)/2, m - (alpha+1)/2); boost evaluates it
  // through Lanczos-scaled gamma ratios, so large m does not overflow.
  const double a = 0.5 * (alpha + 1);
  return 0.5 * boost::math::beta(a, m - a);
}

double integral_I_quadrature(int m, int alpha, double* error) {
  require_convergent_I(m, alpha);
  if (error) *error = 0.0;
  auto near = [=](double s) { return std::pow(s, alpha) * std::pow(1.0 + s * s, -m); };
  // s = 1/u on [1, inf): s^alpha (1+s^2)^-m s^2/... = u^(2m-alpha-2) (1+u^2)^-m
  const int p = 2 * m - alpha - 2;
  auto far = [=](double u) { return std::pow(u, p) * std::pow(1.0 + u * u, -m); };
  return adaptive(near, 0.0, 1.0, error) + adaptive(far, 0.0, 1.0, error);
}

double integral_J(int k, int m) {
  require_convergent_J(k, m);
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v *= static_cast<double>(i) / (m - i);
  return v / (m - 1 - k);
}

double integral_J_quadrature(int k, int m, double* error) {
  require_convergent_J(k, m);
  if (error) *error = 0.0;
  auto near = [=](double t) { return std::pow(t, k) * std::pow(1.0 + t, -m); };
  const int p = m - k - 2;
  auto far = [=](double u) { return std::pow(u, p) * std::pow(1.0 + u, -m); };
  return adaptive(near, 0.0, 1.0, error) + adaptive(far, 0.0, 1.0, error);
}

double sphere_volume(int k) {
  if (k <= 0) throw std::domain_error("sphere_volume: requires k >= 1, got k = " + std::to_string(k));
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / boost::math::tgamma(h);
}

const IntegralEntry& IntegralTable::insert(int m, int alpha, EvalMethod method) {
  IntegralEntry e{m, alpha, 0.0, method};
  e.value = method == EvalMethod::ClosedForm ? integral_I(m, alpha) : integral_I_quadrature(m, alpha);
  if (!std::isfinite(e.value) || e.value <= 0.0)
    throw std::runtime_error("IntegralTable: non-positive value for (m, alpha) = (" + std::to_string(m) +
                             ", " + std::to_string(alpha) + ")");
  return entries_[{m, alpha}] = e;
}

bool IntegralTable::contains(int m, int alpha) const { return entries_.count({m, alpha}) != 0; }

double IntegralTable::at(int m, int alpha) const {
  auto it = entries_.find({m, alpha});
  if (it == entries_.end())
    throw std::out_of_range("IntegralTable: no entry for (m, alpha) = (" + std::to_string(m) + ", " +
                            std::to_string(alpha) + ")");
  return it->second.value;
}

IntegralTable IntegralTable::for_dimension(int n) {
  if (n < 3) throw std::domain_error("IntegralTable::for_dimension: requires n >= 3");
  IntegralTable t;
  t.insert(n, n);
  t.insert(n - 1, n);
  t.insert(n - 1, n - 2);
  return t;
}

}  // namespace yamabe
