#include "yamabe/metric_jet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace yamabe {

namespace {

constexpr double kSymTol = 1e-12;

std::string idx(std::initializer_list<int> v) {
  std::ostringstream os;
  os << "(";
  bool first = true;
  for (int i : v) {
    os << (first ? "" : ",") << i;
    first = false;
  }
  os << ")";
  return os.str();
}

}  // namespace

double ScalarCurvatureModel::at(const Vec& y) const {
  double v = value;
  if (gradient.size()) v += gradient.dot(y);
  if (hessian.size()) v += 0.5 * y.dot(hessian * y);
  return v;
}

bool ScalarCurvatureModel::is_constant() const {
  return (gradient.size() == 0 || gradient.isZero(0.0)) && (hessian.size() == 0 || hessian.isZero(0.0));
}

MetricJet::MetricJet(MetricJetComponents c) : c_(std::move(c)) {
  n_ = c_.n;
  if (n_ < 3) throw std::domain_error("MetricJet: dimension must be >= 3");
  m_ = n_ - 1;
  h_ = c_.h.size() ? c_.h : Mat::Zero(m_, m_);
  rnn_ = c_.rnn.size() ? c_.rnn : Mat::Zero(m_, m_);
  if (h_.rows() != m_ || h_.cols() != m_) throw std::invalid_argument("MetricJet: h must be (n-1)x(n-1)");
  if (rnn_.rows() != m_ || rnn_.cols() != m_) throw std::invalid_argument("MetricJet: R_injn must be (n-1)x(n-1)");
  has_dh_ = !c_.dh.empty();
  dh_ = has_dh_ ? c_.dh : std::vector<Mat>(m_, Mat::Zero(m_, m_));
  if (static_cast<int>(dh_.size()) != m_) throw std::invalid_argument("MetricJet: dh needs n-1 matrices");
  for (const Mat& d : dh_)
    if (d.rows() != m_ || d.cols() != m_) throw std::invalid_argument("MetricJet: each dh[k] must be (n-1)x(n-1)");
  has_rbar_ = !c_.rbar.empty();
  rbar_ = has_rbar_ ? c_.rbar : std::vector<double>(static_cast<std::size_t>(m_) * m_ * m_ * m_, 0.0);
  if (rbar_.size() != static_cast<std::size_t>(m_) * m_ * m_ * m_)
    throw std::invalid_argument("MetricJet: Rbar needs (n-1)^4 components");
  scalar_ = c_.scalar_curvature;
  if (scalar_.gradient.size() && scalar_.gradient.size() != n_)
    throw std::invalid_argument("MetricJet: scalar curvature gradient must have n entries");
  if (scalar_.hessian.size() && (scalar_.hessian.rows() != n_ || scalar_.hessian.cols() != n_))
    throw std::invalid_argument("MetricJet: scalar curvature Hessian must be n x n");
  mean_curvature_zero_ = c_.mean_curvature_zero;
  guard_ = c_.density_guard;
  if (!(guard_ >= 0.0 && guard_ < 1.0)) throw std::invalid_argument("MetricJet: density guard must lie in [0,1)");
  validate();
  rbar_ij_ = Mat::Zero(m_, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      for (int k = 0; k < m_; ++k) rbar_ij_(i, j) += rbar(i, k, j, k);
  has_rbar_ = has_rbar_ && std::any_of(rbar_.begin(), rbar_.end(), [](double v) { return v != 0.0; });
  has_dh_ = has_dh_ && std::any_of(dh_.begin(), dh_.end(), [](const Mat& d) { return !d.isZero(0.0); });
}

void MetricJet::validate() const {
  for (int i = 0; i < m_; ++i)
    for (int j = i + 1; j < m_; ++j) {
      if (std::abs(h_(i, j) - h_(j, i)) > kSymTol)
        throw JetSymmetryError("h is not symmetric at " + idx({i + 1, j + 1}), {i + 1, j + 1});
      if (std::abs(rnn_(i, j) - rnn_(j, i)) > kSymTol)
        throw JetSymmetryError("R_injn is not symmetric in (i,j) at " + idx({i + 1, j + 1}), {i + 1, j + 1});
      for (int k = 0; k < m_; ++k)
        if (std::abs(dh_[k](i, j) - dh_[k](j, i)) > kSymTol)
          throw JetSymmetryError("dh_ij/dy_k is not symmetric in (i,j) at " + idx({i + 1, j + 1, k + 1}),
                                 {i + 1, j + 1, k + 1});
    }
  if (mean_curvature_zero_ && std::abs(h_.trace()) > kSymTol)
    throw std::invalid_argument("MetricJet: flagged mean-curvature-zero but tr h = " + std::to_string(h_.trace()));
  for (int i = 0; i < m_; ++i)
    for (int k = 0; k < m_; ++k)
      for (int j = 0; j < m_; ++j)
        for (int l = 0; l < m_; ++l) {
          const double v = rbar(i, k, j, l);
          const std::vector<int> q{i + 1, k + 1, j + 1, l + 1};
          const std::string s = idx({i + 1, k + 1, j + 1, l + 1});
          if (std::abs(v + rbar(k, i, j, l)) > kSymTol)
            throw JetSymmetryError("Rbar violates antisymmetry in the first pair at " + s, q);
          if (std::abs(v + rbar(i, k, l, j)) > kSymTol)
            throw JetSymmetryError("Rbar violates antisymmetry in the last pair at " + s, q);
          if (std::abs(v - rbar(j, l, i, k)) > kSymTol)
            throw JetSymmetryError("Rbar violates pair symmetry at " + s, q);
        }
}

MetricJet MetricJet::flat(int n) {
  MetricJetComponents c;
  c.n = n;
  return MetricJet(c);
}

MetricJet MetricJet::pure_h(const Mat& h) {
  MetricJetComponents c;
  c.n = static_cast<int>(h.rows()) + 1;
  c.h = h;
  return MetricJet(c);
}

double MetricJet::pi_norm_squared() const {
  const Mat pi = h_ - (h_.trace() / m_) * Mat::Identity(m_, m_);
  return pi.squaredNorm();
}

double MetricJet::normal_ricci() const { return rnn_.trace(); }

bool MetricJet::is_flat() const {
  return h_.isZero(0.0) && rnn_.isZero(0.0) && !has_dh_ && !has_rbar_ && scalar_.is_constant() &&
         scalar_.value == 0.0;
}

bool MetricJet::isotropic() const {
  return h_.isZero(0.0) && !has_dh_ && !has_rbar_ && scalar_.is_constant() &&
         (rnn_ - rnn_(0, 0) * Mat::Identity(m_, m_)).isZero(0.0);
}

int MetricJet::extra_degree() const {
  int d = 0;
  if (has_dh_) d = 1;
  if (scalar_.gradient.size() && !scalar_.gradient.isZero(0.0)) d = std::max(d, 1);
  if (has_rbar_) d = 2;
  if (scalar_.hessian.size() && !scalar_.hessian.isZero(0.0)) d = 2;
  return d;
}

MetricJet MetricJet::rescaled(double delta) const {
  if (!(delta > 0.0)) throw std::domain_error("MetricJet::rescaled: delta must be > 0");
  MetricJetComponents c = c_;
  const double d2 = delta * delta;
  c.h = delta * h_;
  c.rnn = d2 * rnn_;
  if (!c.dh.empty())
    for (Mat& d : c.dh) d *= d2;
  for (double& v : c.rbar) v *= d2;
  c.scalar_curvature.value *= d2;
  if (c.scalar_curvature.gradient.size()) c.scalar_curvature.gradient *= d2 * delta;
  if (c.scalar_curvature.hessian.size()) c.scalar_curvature.hessian *= d2 * d2;
  return MetricJet(std::move(c));
}

MetricSample MetricJet::metric_at(const Vec& y) const {
  if (y.size() != n_) throw std::invalid_argument("metric_at: point has wrong dimension");
  const double t = y(m_);
  const auto yb = y.head(m_);
  MetricSample s;
  s.inverse = Mat::Identity(n_, n_);
  auto G = s.inverse.topLeftCorner(m_, m_);
  G += 2.0 * t * h_ + t * t * (rnn_ + 3.0 * h_ * h_);
  if (has_dh_)
    for (int k = 0; k < m_; ++k) G += 2.0 * t * yb(k) * dh_[k];
  if (has_rbar_)
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        double a = 0.0;
        for (int k = 0; k < m_; ++k)
          for (int l = 0; l < m_; ++l) a += rbar(i, k, j, l) * yb(k) * yb(l);
        G(i, j) += a / 3.0;
      }
  s.density = 1.0 - 0.5 * (pi_norm_squared() + normal_ricci()) * t * t - yb.dot(rbar_ij_ * yb) / 6.0;
  if (!(s.density > guard_))
    throw std::range_error("metric_at: expanded volume density " + std::to_string(s.density) +
                           " left the validity guard " + std::to_string(guard_));
  return s;
}

double MetricJet::conformal_deficit(const FieldJet& u, const Vec& y) const {
  if (u.gradient.size() != n_ || u.hessian.rows() != n_)
    throw std::invalid_argument("conformal_deficit: field jet must carry gradient and Hessian");
  const MetricSample g = metric_at(y);
  const double t = y(m_);
  const auto yb = y.head(m_);

  // (g - I) : Hess u
  double acc = ((g.inverse - Mat::Identity(n_, n_)).cwiseProduct(u.hessian)).sum();

  // (d_i g^{ij}) d_j u over tangential i, j
  for (int j = 0; j < m_; ++j) {
    double div = 0.0;
    if (has_dh_)
      for (int i = 0; i < m_; ++i) div += 2.0 * t * dh_[i](i, j);
    if (has_rbar_)
      for (int i = 0; i < m_; ++i)
        for (int l = 0; l < m_; ++l) div += (rbar(i, i, j, l) + rbar(i, l, j, i)) * yb(l) / 3.0;
    acc += div * u.gradient(j);
  }

  // g^{ab} (d_a rho / rho) d_b u
  Vec drho(n_);
  drho.head(m_) = -(rbar_ij_ + rbar_ij_.transpose()) * yb / 6.0;
  drho(m_) = -(pi_norm_squared() + normal_ricci()) * t;
  acc += drho.dot(g.inverse * u.gradient) / g.density;

  acc -= (n_ - 2.0) / (4.0 * (n_ - 1.0)) * scalar_.at(y) * u.value;
  return acc;
}

MetricSample metric_at(const MetricJet& jet, const Vec& y) { return jet.metric_at(y); }
double conformal_deficit(const MetricJet& jet, const FieldJet& u, const Vec& y) {
  return jet.conformal_deficit(u, y);
}
double conformal_deficit(const MetricJet& jet, const Field& u, const Vec& y) {
  return jet.conformal_deficit(u.evaluate(y, 2), y);
}

}  // namespace yamabe
