#pragma once

#include "yamabe/field.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace yamabe {

// Raised when a jet component lacks a required symmetry; `indices` holds the
// offending 1-based index pair or quadruple.
class JetSymmetryError : public std::invalid_argument {
 public:
  JetSymmetryError(const std::string& what, std::vector<int> indices)
      : std::invalid_argument(what), indices_(std::move(indices)) {}
  const std::vector<int>& indices() const { return indices_; }

 private:
  std::vector<int> indices_;
};

// R_g(y) = value + gradient.y + 1/2 y^T hessian y
struct ScalarCurvatureModel {
  double value = 0.0;
  Vec gradient;  // empty means zero
  Mat hessian;   // empty means zero
  double at(const Vec& y) const;
  bool is_constant() const;
};

struct MetricJetComponents {
  int n = 0;
  Mat h;                      // h_ij(0), (n-1)x(n-1)
  std::vector<Mat> dh;        // dh[k](i,j) = d h_ij / d y_k (0); empty or n-1 entries
  std::vector<double> rbar;   // Rbar_ikjl(0) flattened ((i*m + k)*m + j)*m + l, m = n-1; empty = 0
  Mat rnn;                    // R_injn(0), (n-1)x(n-1); empty = 0
  ScalarCurvatureModel scalar_curvature;
  bool mean_curvature_zero = true;
  double density_guard = 0.1;
};

struct MetricSample {
  Mat inverse;     // g^{ab}, n x n
  double density;  // |g|^{1/2}
};

class MetricJet {
 public:
  explicit MetricJet(MetricJetComponents c);

  static MetricJet flat(int n);
  static MetricJet pure_h(const Mat& h);

  int n() const { return n_; }
  const Mat& h() const { return h_; }
  const Mat& dh(int k) const { return dh_[k]; }
  double rbar(int i, int k, int j, int l) const { return rbar_[((i * m_ + k) * m_ + j) * m_ + l]; }
  const Mat& rnn() const { return rnn_; }
  const ScalarCurvatureModel& scalar_curvature() const { return scalar_; }
  bool mean_curvature_zero() const { return mean_curvature_zero_; }
  double density_guard() const { return guard_; }

  double pi_norm_squared() const;  // |trace-free part of h|^2
  double normal_ricci() const;     // Ric(0) = sum_i R_inin
  const Mat& boundary_ricci() const { return rbar_ij_; }  // Rbar_ij = sum_k Rbar_ikjk

  bool is_flat() const;
  // Angular structure contributed by the coefficients: isotropic() means the
  // deficit of a radial field is radial; extra_degree() bounds the ybar-degree
  // the coefficients add to a contraction with derivatives of a field.
  bool isotropic() const;
  int extra_degree() const;

  // Jet of the dilated metric y -> g(delta y).
  MetricJet rescaled(double delta) const;

  MetricSample metric_at(const Vec& y) const;

  // (L_g - Delta) u at y with L_g u = Delta_g u - (n-2)/(4(n-1)) R_g u.
  double conformal_deficit(const FieldJet& u, const Vec& y) const;

  const MetricJetComponents& components() const { return c_; }

 private:
  void validate() const;

  MetricJetComponents c_;
  int n_, m_;
  Mat h_;
  std::vector<Mat> dh_;
  std::vector<double> rbar_;
  Mat rnn_, rbar_ij_;
  ScalarCurvatureModel scalar_;
  bool mean_curvature_zero_;
  double guard_;
  bool has_dh_ = false, has_rbar_ = false;
};

MetricSample metric_at(const MetricJet& jet, const Vec& y);
double conformal_deficit(const MetricJet& jet, const FieldJet& u, const Vec& y);
double conformal_deficit(const MetricJet& jet, const Field& u, const Vec& y);

}  // namespace yamabe
