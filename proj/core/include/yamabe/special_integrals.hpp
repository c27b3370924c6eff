#pragma once

#include <map>
#include <utility>
#include <vector>

namespace yamabe {

// I_m^alpha = int_0^inf s^alpha / (1+s^2)^m ds, convergent iff 2m - alpha - 1 > 0.
double integral_I(int m, int alpha);

// Independent numerical evaluation of I_m^alpha (adaptive Gauss-Kronrod on
// [0,1] and on the image of [1,inf) under s = 1/u).  `error` receives the
// quadrature's own error estimate when non-null.
double integral_I_quadrature(int m, int alpha, double* error = nullptr);

// J(k, m) = int_0^inf t^k / (1+t)^m dt = k! / ((m-1)(m-2)...(m-1-k)).
double integral_J(int k, int m);
double integral_J_quadrature(int k, int m, double* error = nullptr);

// Surface measure of the unit k-sphere S^k in R^{k+1}.
double sphere_volume(int k);

enum class EvalMethod { ClosedForm, Quadrature };

struct IntegralEntry {
  int m = 0;
  int alpha = 0;
  double value = 0.0;
  EvalMethod method = EvalMethod::ClosedForm;
};

class IntegralTable {
 public:
  using Key = std::pair<int, int>;

  // Inserts (m, alpha) evaluated with the requested method.  Throws
  // std::domain_error for divergent pairs.
  const IntegralEntry& insert(int m, int alpha, EvalMethod method = EvalMethod::ClosedForm);
  bool contains(int m, int alpha) const;
  double at(int m, int alpha) const;
  const std::map<Key, IntegralEntry>& entries() const { return entries_; }

  // Every pair that enters the constants used for dimension n.
  static IntegralTable for_dimension(int n);

 private:
  std::map<Key, IntegralEntry> entries_;
};

}  // namespace yamabe
