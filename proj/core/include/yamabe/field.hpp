#pragma once

#include "yamabe/quadrature.hpp"

#include <memory>
#include <utility>
#include <vector>

namespace yamabe {

struct FieldJet {
  double value = 0.0;
  Vec gradient;  // size n when order >= 1
  Mat hessian;   // n x n when order >= 2
};

// Angular structure of a field on the half space seen from the chart origin.
// Radial: depends on (|ybar|, y_n) only.  Polynomial(d): for fixed
// (|ybar|, y_n) the value is a polynomial of degree <= d in ybar/|ybar|.
enum class AngularType { Radial, Polynomial, General };

struct AngularStructure {
  AngularType type = AngularType::General;
  int degree = 0;
  static AngularStructure radial() { return {AngularType::Radial, 0}; }
  static AngularStructure polynomial(int d) { return {AngularType::Polynomial, d}; }
  static AngularStructure general() { return {AngularType::General, 0}; }
};

AngularStructure combine(AngularStructure a, AngularStructure b);

class Field {
 public:
  virtual ~Field() = default;
  virtual int dimension() const = 0;
  // order in {0,1,2}; members above `order` are left empty.
  virtual FieldJet evaluate(const Vec& y, int order) const = 0;
  virtual AngularStructure structure() const { return AngularStructure::general(); }
  // Length over which the field varies near the origin; used to grade radial panels.
  virtual double length_scale() const { return 1.0; }
  // Largest radius r for which the closed half ball B_r^+ lies in the domain.
  virtual double max_radius() const;
};

using FieldPtr = std::shared_ptr<const Field>;

class ConstantField final : public Field {
 public:
  ConstantField(int n, double c);
  int dimension() const override { return n_; }
  FieldJet evaluate(const Vec& y, int order) const override;
  AngularStructure structure() const override { return AngularStructure::radial(); }

 private:
  int n_;
  double c_;
};

// c0 + g.y + 1/2 y^T H y
class QuadraticField final : public Field {
 public:
  QuadraticField(double c0, Vec g, Mat H);
  int dimension() const override { return static_cast<int>(g_.size()); }
  FieldJet evaluate(const Vec& y, int order) const override;
  AngularStructure structure() const override;

 private:
  double c0_;
  Vec g_;
  Mat H_;
};

// sum_k c_k f_k
class LinearCombination final : public Field {
 public:
  LinearCombination() = default;
  LinearCombination& add(double c, FieldPtr f);
  int dimension() const override;
  FieldJet evaluate(const Vec& y, int order) const override;
  AngularStructure structure() const override;
  double length_scale() const override;
  double max_radius() const override;

 private:
  std::vector<std::pair<double, FieldPtr>> terms_;
};

FieldPtr operator+(const FieldPtr& a, const FieldPtr& b);
FieldPtr scaled(double c, const FieldPtr& f);

}  // namespace yamabe
