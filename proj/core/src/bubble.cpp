#include "yamabe/bubble.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace yamabe {

namespace {

void require_half_space(const Vec& y, int n, const char* who) {
  if (y.size() != n) throw std::invalid_argument(std::string(who) + ": point has wrong dimension");
  if (y(n - 1) < 0.0) throw std::domain_error(std::string(who) + ": requires y_n >= 0");
}

// Unit bubble at the origin and its derivatives up to `order` (<= 3 via the
// returned w and D so callers can build third derivatives).
struct UnitBubble {
  double D;
  Vec w;  // (ybar, 1 + y_n)
  double U;
};

UnitBubble unit_bubble(const Vec& z, int n) {
  UnitBubble b;
  b.w = z;
  b.w(n - 1) += 1.0;
  b.D = b.w.squaredNorm();
  b.U = std::pow(b.D, -0.5 * (n - 2));
  return b;
}

FieldJet unit_bubble_jet(const Vec& z, int n, int order) {
  const UnitBubble b = unit_bubble(z, n);
  FieldJet j;
  j.value = b.U;
  if (order >= 1) {
    const double Dn = std::pow(b.D, -0.5 * n);
    j.gradient = -(n - 2) * Dn * b.w;
    if (order >= 2) {
      j.hessian = -(n - 2) * Dn * (Mat::Identity(n, n) - (n / b.D) * b.w * b.w.transpose());
    }
  }
  return j;
}

}  // namespace

CutoffValue radial_cutoff(double rho, double R) {
  if (!std::isfinite(R) || rho <= 0.5 * R) return {1.0, 0.0, 0.0};
  if (rho >= R) return {0.0, 0.0, 0.0};
  const double h = 0.5 * R, x = (rho - h) / h;
  const double x2 = x * x;
  // 1 - (10 x^3 - 15 x^4 + 6 x^5): C^2 at both ends
  return {1.0 - x2 * x * (10.0 - 15.0 * x + 6.0 * x2), -30.0 * x2 * (1.0 - x) * (1.0 - x) / h,
          -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (h * h)};
}

BubbleField::BubbleField(int n, double delta, double cutoff_radius, Vec center)
    : n_(n), delta_(delta), R_(cutoff_radius), center_(std::move(center)) {
  if (n < 3) throw std::domain_error("BubbleField: requires n >= 3");
  if (!(delta > 0.0)) throw std::domain_error("BubbleField: requires delta > 0");
  if (!(cutoff_radius > 0.0)) throw std::domain_error("BubbleField: requires cutoff radius > 0");
  if (center_.size() == 0) center_ = Vec::Zero(n - 1);
  if (center_.size() != n - 1) throw std::invalid_argument("BubbleField: center must lie in R^{n-1}");
}

AngularStructure BubbleField::structure() const {
  return center_.isZero(0.0) ? AngularStructure::radial() : AngularStructure::general();
}

FieldJet BubbleField::evaluate(const Vec& y, int order) const {
  require_half_space(y, n_, "eval_bubble");
  if (order < 0 || order > 2) throw std::domain_error("eval_bubble: order must be 0, 1 or 2");
  Vec z = y / delta_;
  z.head(n_ - 1) -= center_ / delta_;
  FieldJet j = unit_bubble_jet(z, n_, order);
  const double s0 = std::pow(delta_, -0.5 * (n_ - 2));
  j.value *= s0;
  if (order >= 1) j.gradient *= s0 / delta_;
  if (order >= 2) j.hessian *= s0 / (delta_ * delta_);
  if (!std::isfinite(R_)) return j;

  const double rho = y.norm();
  const CutoffValue c = radial_cutoff(rho, R_);
  if (c.d1 == 0.0 && c.d2 == 0.0) {
    j.value *= c.value;
    if (order >= 1) j.gradient *= c.value;
    if (order >= 2) j.hessian *= c.value;
    return j;
  }
  const Vec e = y / rho;
  const Vec gchi = c.d1 * e;
  FieldJet out;
  out.value = j.value * c.value;
  if (order >= 1) out.gradient = j.gradient * c.value + j.value * gchi;
  if (order >= 2) {
    const Mat P = e * e.transpose();
    const Mat Hchi = c.d2 * P + (c.d1 / rho) * (Mat::Identity(n_, n_) - P);
    out.hessian = j.hessian * c.value + j.gradient * gchi.transpose() + gchi * j.gradient.transpose() +
                  j.value * Hchi;
  }
  return out;
}

FieldJet eval_bubble(const BubbleField& field, const Vec& y, int order) { return field.evaluate(y, order); }

KernelField::KernelField(int b, int n) : b_(b), n_(n) {
  if (n < 3) throw std::domain_error("KernelField: requires n >= 3");
  if (b < 1 || b > n)
    throw std::domain_error("eval_kernel: index b = " + std::to_string(b) + " outside 1.." + std::to_string(n));
}

AngularStructure KernelField::structure() const {
  return b_ == n_ ? AngularStructure::radial() : AngularStructure::polynomial(1);
}

FieldJet KernelField::evaluate(const Vec& y, int order) const {
  require_half_space(y, n_, "eval_kernel");
  const int n = n_;
  const UnitBubble u = unit_bubble(y, n);
  const double D = u.D;
  const Vec& w = u.w;
  const double g = std::pow(D, -0.5 * n);  // D^{-n/2}
  FieldJet j;
  if (b_ < n) {
    const int l = b_ - 1;
    // d_l U = -(n-2) D^{-n/2} w_l
    j.value = -(n - 2) * g * w(l);
    if (order >= 1) {
      Vec col = -(n / D) * w(l) * w;
      col(l) += 1.0;
      j.gradient = -(n - 2) * g * col;
    }
    if (order >= 2) {
      // d_l d_a d_b U = (n-2) n D^{-n/2-1} (d_ab w_l + d_al w_b + d_bl w_a) - (n-2) n (n+2) D^{-n/2-2} w_a w_b w_l
      const double g1 = g / D, g2 = g1 / D;
      Mat H = -(n - 2.0) * n * (n + 2.0) * g2 * w(l) * (w * w.transpose());
      H += (n - 2.0) * n * g1 * w(l) * Mat::Identity(n, n);
      H.col(l) += (n - 2.0) * n * g1 * w;
      H.row(l) += (n - 2.0) * n * g1 * w.transpose();
      j.hessian = H;
    }
    return j;
  }
  // j_n = -(n-2)/2 (|y|^2 - 1) D^{-n/2}
  const double p = 0.5 * (n - 2);
  const double f = y.squaredNorm() - 1.0;
  j.value = -p * f * g;
  if (order >= 1) {
    const Vec dg = -n * (g / D) * w;
    j.gradient = -p * (2.0 * g * y + f * dg);
    if (order >= 2) {
      const Mat Hg = -n * (g / D) * (Mat::Identity(n, n) - ((n + 2.0) / D) * w * w.transpose());
      j.hessian = -p * (2.0 * g * Mat::Identity(n, n) + 2.0 * (y * dg.transpose() + dg * y.transpose()) + f * Hg);
    }
  }
  return j;
}

double eval_kernel(int b, const Vec& y, int n) { return KernelField(b, n).evaluate(y, 0).value; }

namespace {

template <class F>
double fd_laplacian(F&& f, const Vec& y, double h) {
  const double c = f(y);
  double acc = 0.0;
  Vec p = y;
  for (int a = 0; a < y.size(); ++a) {
    const double ya = y(a);
    p(a) = ya + 2 * h; const double fp2 = f(p);
    p(a) = ya + h;     const double fp1 = f(p);
    p(a) = ya - h;     const double fm1 = f(p);
    p(a) = ya - 2 * h; const double fm2 = f(p);
    p(a) = ya;
    acc += (-fp2 + 16.0 * fp1 - 30.0 * c + 16.0 * fm1 - fm2) / (12.0 * h * h);
  }
  return acc;
}

}  // namespace

BubbleResidualReport check_bubble_residual(const BubbleField& field, const std::vector<Vec>& interior,
                                           const std::vector<Vec>& boundary, double fd_step) {
  if (!(fd_step > 0.0)) throw std::domain_error("check_bubble_residual: fd_step must be > 0");
  const int n = field.dimension();
  if (std::isfinite(field.cutoff_radius()))
    throw std::invalid_argument("check_bubble_residual: the cutoff bubble does not solve the model problem");
  BubbleResidualReport r;
  r.n = n;
  r.fd_step = fd_step;
  r.interior_points = interior.size();
  r.boundary_points = boundary.size();
  r.kernel_laplacian.assign(n, 0.0);
  r.kernel_boundary.assign(n, 0.0);
  std::vector<KernelField> kernels;
  for (int b = 1; b <= n; ++b) kernels.emplace_back(b, n);

  for (const Vec& y : interior) {
    if (y(n - 1) < 2.0 * fd_step)
      throw std::domain_error("check_bubble_residual: interior point closer than 2*fd_step to the boundary");
    r.max_laplacian =
        std::max(r.max_laplacian, std::abs(fd_laplacian([&](const Vec& p) { return field.evaluate(p, 0).value; }, y, fd_step)));
    for (int b = 0; b < n; ++b)
      r.kernel_laplacian[b] = std::max(
          r.kernel_laplacian[b],
          std::abs(fd_laplacian([&](const Vec& p) { return kernels[b].evaluate(p, 0).value; }, y, fd_step)));
  }
  const BubbleField unit(n);
  for (const Vec& z : boundary) {
    if (z(n - 1) != 0.0) throw std::domain_error("check_bubble_residual: boundary point must have y_n = 0");
    const FieldJet u = field.evaluate(z, 1);
    r.max_boundary = std::max(r.max_boundary, std::abs(u.gradient(n - 1) + (n - 2) * std::pow(u.value, double(n) / (n - 2))));
    const double U = unit.evaluate(z, 0).value;
    const double pot = n * std::pow(U, 2.0 / (n - 2));
    for (int b = 0; b < n; ++b) {
      const FieldJet k = kernels[b].evaluate(z, 1);
      r.kernel_boundary[b] = std::max(r.kernel_boundary[b], std::abs(k.gradient(n - 1) + pot * k.value));
    }
  }
  return r;
}

std::vector<Vec> bubble_interior_sample(int n, std::size_t count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tang(-1.5, 1.5), normal(0.05, 3.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vec y(n);
    for (int i = 0; i < n - 1; ++i) y(i) = tang(rng);
    y(n - 1) = normal(rng);
    out.push_back(std::move(y));
  }
  return out;
}

std::vector<Vec> bubble_boundary_sample(int n, std::size_t count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tang(-3.0, 3.0);
  std::vector<Vec> out;
  out.reserve(count + 1);
  out.push_back(Vec::Zero(n));
  for (std::size_t k = 1; k < count; ++k) {
    Vec y = Vec::Zero(n);
    for (int i = 0; i < n - 1; ++i) y(i) = tang(rng);
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace yamabe
