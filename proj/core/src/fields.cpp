#include "yamabe/field.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace yamabe {

AngularStructure combine(AngularStructure a, AngularStructure b) {
  if (a.type == AngularType::General || b.type == AngularType::General) return AngularStructure::general();
  if (a.type == AngularType::Radial && b.type == AngularType::Radial) return AngularStructure::radial();
  return AngularStructure::polynomial(std::max(a.degree, b.degree));
}

double Field::max_radius() const { return std::numeric_limits<double>::infinity(); }

ConstantField::ConstantField(int n, double c) : n_(n), c_(c) {
  if (n < 2) throw std::invalid_argument("ConstantField: dimension must be >= 2");
}

FieldJet ConstantField::evaluate(const Vec&, int order) const {
  FieldJet j;
  j.value = c_;
  if (order >= 1) j.gradient = Vec::Zero(n_);
  if (order >= 2) j.hessian = Mat::Zero(n_, n_);
  return j;
}

QuadraticField::QuadraticField(double c0, Vec g, Mat H) : c0_(c0), g_(std::move(g)), H_(std::move(H)) {
  if (H_.rows() != g_.size() || H_.cols() != g_.size())
    throw std::invalid_argument("QuadraticField: gradient and Hessian sizes disagree");
  if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    throw std::invalid_argument("QuadraticField: Hessian must be symmetric");
}

FieldJet QuadraticField::evaluate(const Vec& y, int order) const {
  FieldJet j;
  const Vec Hy = H_ * y;
  j.value = c0_ + g_.dot(y) + 0.5 * y.dot(Hy);
  if (order >= 1) j.gradient = g_ + Hy;
  if (order >= 2) j.hessian = H_;
  return j;
}

AngularStructure QuadraticField::structure() const {
  const int n = dimension();
  const Mat Hb = H_.topLeftCorner(n - 1, n - 1);
  const bool isotropic = g_.head(n - 1).isZero(0.0) && H_.topRightCorner(n - 1, 1).isZero(0.0) &&
                         (Hb - Hb(0, 0) * Mat::Identity(n - 1, n - 1)).isZero(0.0);
  return isotropic ? AngularStructure::radial() : AngularStructure::polynomial(2);
}

LinearCombination& LinearCombination::add(double c, FieldPtr f) {
  if (!f) throw std::invalid_argument("LinearCombination: null field");
  if (!terms_.empty() && f->dimension() != terms_.front().second->dimension())
    throw std::invalid_argument("LinearCombination: dimension mismatch");
  terms_.emplace_back(c, std::move(f));
  return *this;
}

int LinearCombination::dimension() const {
  if (terms_.empty()) throw std::logic_error("LinearCombination: empty");
  return terms_.front().second->dimension();
}

FieldJet LinearCombination::evaluate(const Vec& y, int order) const {
  const int n = dimension();
  FieldJet out;
  if (order >= 1) out.gradient = Vec::Zero(n);
  if (order >= 2) out.hessian = Mat::Zero(n, n);
  for (const auto& [c, f] : terms_) {
    FieldJet j = f->evaluate(y, order);
    out.value += c * j.value;
    if (order >= 1) out.gradient += c * j.gradient;
    if (order >= 2) out.hessian += c * j.hessian;
  }
  return out;
}

AngularStructure LinearCombination::structure() const {
  AngularStructure s = AngularStructure::radial();
  for (const auto& t : terms_) s = combine(s, t.second->structure());
  return s;
}

double LinearCombination::length_scale() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) s = std::min(s, t.second->length_scale());
  return s;
}

double LinearCombination::max_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) r = std::min(r, t.second->max_radius());
  return r;
}

FieldPtr operator+(const FieldPtr& a, const FieldPtr& b) {
  auto s = std::make_shared<LinearCombination>();
  s->add(1.0, a).add(1.0, b);
  return s;
}

FieldPtr scaled(double c, const FieldPtr& f) {
  auto s = std::make_shared<LinearCombination>();
  s->add(c, f);
  return s;
}

}  // namespace yamabe
