#include "yamabe/gamma_solver.hpp"

#include "yamabe/bubble.hpp"
#include "yamabe/special_integrals.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace yamabe {

using json = nlohmann::json;

namespace {

std::vector<double> graded_nodes(int N, double L, double a) {
  std::vector<double> x(N + 1);
  for (int k = 0; k <= N; ++k) x[k] = a > 0.0 ? L * std::sinh(a * k / N) / std::sinh(a) : L * k / double(N);
  x[N] = L;
  return x;
}

// Five-node window around k for a derivative along an axis; at the lower end
// either reflect (even symmetry about x = 0) or shift the window inward.
struct Window {
  std::vector<double> x;
  std::vector<int> node;
};

Window window5(const std::vector<double>& x, int k, bool even_at_zero) {
  const int N = static_cast<int>(x.size()) - 1;
  Window w;
  if (even_at_zero && k < 2) {
    for (int d = -2; d <= 2; ++d) {
      const int q = k + d;
      w.x.push_back(q < 0 ? -x[-q] : x[q]);
      w.node.push_back(std::abs(q));
    }
    return w;
  }
  int lo = std::clamp(k - 2, 0, N - 4);
  for (int q = lo; q < lo + 5; ++q) {
    w.x.push_back(x[q]);
    w.node.push_back(q);
  }
  return w;
}

// Precomputed stencils (derivative orders 0..2) for every node of an axis.
struct AxisStencils {
  std::vector<std::vector<int>> node;
  std::vector<Mat> weights;
};

AxisStencils axis_stencils(const std::vector<double>& x, bool even_at_zero) {
  AxisStencils a;
  for (int k = 0; k < static_cast<int>(x.size()); ++k) {
    Window w = window5(x, k, even_at_zero);
    a.weights.push_back(fornberg_weights(x[k], w.x, 2));
    a.node.push_back(std::move(w.node));
  }
  return a;
}

void validate_grid(int n, const GridSpec& g) {
  if (n < 7) throw std::domain_error("solve_profile: requires n >= 7");
  if (g.ns < 8 || g.nt < 8) throw std::invalid_argument("solve_profile: need at least 8 intervals per direction");
  if (g.s_max < 30.0 || g.t_max < 30.0)
    throw std::invalid_argument("solve_profile: far field must satisfy S_max, T_max >= 30");
  const auto s = g.s_nodes(), t = g.t_nodes();
  if (s[1] - s[0] > 0.1 || t[1] - t[0] > 0.1)
    throw std::invalid_argument("solve_profile: spacing near the origin must be <= 0.1, refine or grade the grid");
}

}  // namespace

std::vector<double> GridSpec::s_nodes() const { return graded_nodes(ns, s_max, grading); }
std::vector<double> GridSpec::t_nodes() const { return graded_nodes(nt, t_max, grading); }

GridSpec GridSpec::halved() const {
  GridSpec g = *this;
  g.ns = ns / 2;
  g.nt = nt / 2;
  return g;
}

std::string GridSpec::to_string() const {
  std::ostringstream os;
  os << ns << "x" << nt << ":" << s_max << ":" << grading;
  return os.str();
}

GridSpec GridSpec::parse(const std::string& spec) {
  GridSpec g;
  std::string body = spec;
  std::vector<std::string> parts;
  std::stringstream ss(body);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty() || parts.size() > 3) throw std::invalid_argument("grid spec '" + spec + "': expected NSxNT[:FAR[:GRADING]]");
  const auto x = parts[0].find('x');
  try {
    if (x == std::string::npos) {
      g.ns = g.nt = std::stoi(parts[0]);
    } else {
      g.ns = std::stoi(parts[0].substr(0, x));
      g.nt = std::stoi(parts[0].substr(x + 1));
    }
    if (parts.size() > 1) g.s_max = g.t_max = std::stod(parts[1]);
    if (parts.size() > 2) g.grading = std::stod(parts[2]);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("grid spec '" + spec + "': expected NSxNT[:FAR[:GRADING]]");
  }
  if (g.ns <= 0 || g.nt <= 0 || g.grading < 0.0) throw std::invalid_argument("grid spec '" + spec + "': bad values");
  return g;
}

double profile_source(int n, double s, double t) {
  const double D = (1.0 + t) * (1.0 + t) + s * s;
  return -2.0 * n * (n - 2.0) * t * std::pow(D, -0.5 * (n + 2));
}

GammaProfile::GammaProfile(int n, std::vector<double> s, std::vector<double> t, std::vector<double> values,
                           ProfileDiagnostics diag, GridSpec spec)
    : n_(n), s_(std::move(s)), t_(std::move(t)), b_(std::move(values)), diag_(diag), spec_(spec) {
  if (s_.size() < 5 || t_.size() < 5) throw std::invalid_argument("GammaProfile: need at least 5 nodes per axis");
  if (b_.size() != s_.size() * t_.size()) throw std::invalid_argument("GammaProfile: value count mismatch");
  if (s_.front() != 0.0 || t_.front() != 0.0) throw std::invalid_argument("GammaProfile: grid must start at 0");
  for (std::size_t k = 1; k < s_.size(); ++k)
    if (!(s_[k] > s_[k - 1])) throw std::invalid_argument("GammaProfile: s nodes must increase");
  for (std::size_t k = 1; k < t_.size(); ++k)
    if (!(t_[k] > t_[k - 1])) throw std::invalid_argument("GammaProfile: t nodes must increase");
  for (double v : b_)
    if (!std::isfinite(v)) throw std::invalid_argument("GammaProfile: non-finite value");
  build_derivatives();
}

void GammaProfile::build_derivatives() {
  const int Ns = static_cast<int>(s_.size()), Nt = static_cast<int>(t_.size());
  const AxisStencils as = axis_stencils(s_, true), at = axis_stencils(t_, false);
  bs_.assign(b_.size(), 0.0);
  bt_.assign(b_.size(), 0.0);
  bst_.assign(b_.size(), 0.0);
  for (int i = 0; i < Ns; ++i)
    for (int j = 0; j < Nt; ++j) {
      double vs = 0.0, vt = 0.0;
      for (int q = 0; q < 5; ++q) {
        vs += as.weights[i](1, q) * b_[idx(as.node[i][q], j)];
        vt += at.weights[j](1, q) * b_[idx(i, at.node[j][q])];
      }
      bs_[idx(i, j)] = vs;
      bt_[idx(i, j)] = vt;
    }
  for (int i = 0; i < Ns; ++i)
    for (int j = 0; j < Nt; ++j) {
      double v = 0.0;
      for (int q = 0; q < 5; ++q) v += as.weights[i](1, q) * bt_[idx(as.node[i][q], j)];
      bst_[idx(i, j)] = v;
    }
  // the even extension makes these vanish up to rounding; pin them
  for (int j = 0; j < Nt; ++j) bs_[idx(0, j)] = bst_[idx(0, j)] = 0.0;
}

bool GammaProfile::contains(double s, double t) const {
  return s >= 0.0 && t >= 0.0 && s <= s_max() && t <= t_max();
}

namespace {

struct Hermite {
  double v[4], d[4], dd[4];
};

// Basis for (left value, left slope * h, right value, right slope * h).
Hermite hermite(double u, double h) {
  const double u2 = u * u, u3 = u2 * u;
  Hermite b;
  b.v[0] = 2 * u3 - 3 * u2 + 1;
  b.v[1] = (u3 - 2 * u2 + u) * h;
  b.v[2] = -2 * u3 + 3 * u2;
  b.v[3] = (u3 - u2) * h;
  b.d[0] = (6 * u2 - 6 * u) / h;
  b.d[1] = 3 * u2 - 4 * u + 1;
  b.d[2] = (-6 * u2 + 6 * u) / h;
  b.d[3] = 3 * u2 - 2 * u;
  b.dd[0] = (12 * u - 6) / (h * h);
  b.dd[1] = (6 * u - 4) / h;
  b.dd[2] = (-12 * u + 6) / (h * h);
  b.dd[3] = (6 * u - 2) / h;
  return b;
}

int locate(const std::vector<double>& x, double v) {
  auto it = std::upper_bound(x.begin(), x.end(), v);
  int i = static_cast<int>(it - x.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(x.size()) - 2);
}

}  // namespace

GammaProfile::Sample GammaProfile::evaluate(double s, double t, int order) const {
  if (!contains(s, t))
    throw std::range_error("GammaProfile: point (s,t) = (" + std::to_string(s) + "," + std::to_string(t) +
                           ") outside the grid footprint");
  const int i = locate(s_, s), j = locate(t_, t);
  const double hs = s_[i + 1] - s_[i], ht = t_[j + 1] - t_[j];
  const Hermite P = hermite((s - s_[i]) / hs, hs), R = hermite((t - t_[j]) / ht, ht);
  double c[4][4];
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const std::size_t k = idx(i + p / 2, j + q / 2);
      const bool ds = p % 2, dt = q % 2;
      c[p][q] = ds ? (dt ? bst_[k] : bs_[k]) : (dt ? bt_[k] : b_[k]);
    }
  Sample out;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const double cc = c[p][q];
      out.b += cc * P.v[p] * R.v[q];
      if (order >= 1) {
        out.bs += cc * P.d[p] * R.v[q];
        out.bt += cc * P.v[p] * R.d[q];
      }
      if (order >= 2) {
        out.bss += cc * P.dd[p] * R.v[q];
        out.bst += cc * P.d[p] * R.d[q];
        out.btt += cc * P.v[p] * R.dd[q];
      }
    }
  return out;
}

void GammaProfile::save(const std::filesystem::path& file) const {
  json j;
  j["format"] = "yamabe-gamma-profile";
  j["version"] = kFormatVersion;
  j["n"] = n_;
  j["grid"] = {{"ns", spec_.ns}, {"nt", spec_.nt}, {"s_max", spec_.s_max}, {"t_max", spec_.t_max},
               {"grading", spec_.grading}};
  j["s"] = s_;
  j["t"] = t_;
  j["values"] = b_;
  j["diagnostics"] = {{"algebraic_residual", diag_.algebraic_residual},
                      {"truncation_residual", diag_.truncation_residual},
                      {"boundary_truncation", diag_.boundary_truncation},
                      {"iterations", diag_.iterations},
                      {"min_spacing", diag_.min_spacing},
                      {"max_spacing", diag_.max_spacing}};
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("GammaProfile::save: cannot write " + tmp.string());
    os << j.dump();
  }
  std::filesystem::rename(tmp, file);
}

GammaProfile GammaProfile::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("GammaProfile::load: cannot open " + file.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("GammaProfile::load: " + file.string() + ": " + e.what());
  }
  if (j.value("format", "") != "yamabe-gamma-profile")
    throw std::runtime_error("GammaProfile::load: " + file.string() + " is not a profile artifact");
  if (j.value("version", 0) != kFormatVersion)
    throw std::runtime_error("GammaProfile::load: unsupported artifact version in " + file.string());
  GridSpec g;
  const auto& jg = j.at("grid");
  g.ns = jg.at("ns");
  g.nt = jg.at("nt");
  g.s_max = jg.at("s_max");
  g.t_max = jg.at("t_max");
  g.grading = jg.at("grading");
  ProfileDiagnostics d;
  const auto& jd = j.at("diagnostics");
  d.algebraic_residual = jd.at("algebraic_residual");
  d.truncation_residual = jd.at("truncation_residual");
  d.boundary_truncation = jd.at("boundary_truncation");
  d.iterations = jd.at("iterations");
  d.min_spacing = jd.at("min_spacing");
  d.max_spacing = jd.at("max_spacing");
  return GammaProfile(j.at("n"), j.at("s").get<std::vector<double>>(), j.at("t").get<std::vector<double>>(),
                      j.at("values").get<std::vector<double>>(), d, g);
}

ProfileDiagnostics truncation_diagnostics(int n, const std::vector<double>& s, const std::vector<double>& t,
                                          const std::vector<double>& b) {
  const int Ns = static_cast<int>(s.size()) - 1, Nt = static_cast<int>(t.size()) - 1;
  const double K = n + 2.0;
  const AxisStencils as = axis_stencils(s, true), at = axis_stencils(t, false);
  auto B = [&](int i, int j) { return b[static_cast<std::size_t>(i) * (Nt + 1) + j]; };
  ProfileDiagnostics d;
  for (int i = 0; i < Ns; ++i) {
    for (int j = 1; j < Nt; ++j) {
      double bss = 0, bs = 0, btt = 0;
      for (int q = 0; q < 5; ++q) {
        const double vs = B(as.node[i][q], j), vt = B(i, at.node[j][q]);
        bss += as.weights[i](2, q) * vs;
        bs += as.weights[i](1, q) * vs;
        btt += at.weights[j](2, q) * vt;
      }
      const double L = i == 0 ? (K + 1.0) * bss + btt : bss + K / s[i] * bs + btt;
      d.truncation_residual = std::max(d.truncation_residual, std::abs(L - profile_source(n, s[i], t[j])));
    }
    double bt = 0;
    for (int q = 0; q < 5; ++q) bt += at.weights[0](1, q) * B(i, at.node[0][q]);
    d.boundary_truncation = std::max(d.boundary_truncation, std::abs(bt + n / (1.0 + s[i] * s[i]) * B(i, 0)));
  }
  double hmin = 1e300, hmax = 0.0;
  for (const auto* x : {&s, &t})
    for (std::size_t k = 1; k < x->size(); ++k) {
      hmin = std::min(hmin, (*x)[k] - (*x)[k - 1]);
      hmax = std::max(hmax, (*x)[k] - (*x)[k - 1]);
    }
  d.min_spacing = hmin;
  d.max_spacing = hmax;
  return d;
}

GammaProfile solve_profile(int n, const GridSpec& grid) {
  validate_grid(n, grid);
  const std::vector<double> s = grid.s_nodes(), t = grid.t_nodes();
  const int Ns = grid.ns, Nt = grid.nt;
  const double K = n + 2.0;
  const std::size_t N = static_cast<std::size_t>(Ns + 1) * (Nt + 1);
  auto id = [&](int i, int j) { return static_cast<int>(i * (Nt + 1) + j); };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(N * 5);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  auto w3 = [](const std::vector<double>& x, int k) {
    return fornberg_weights(x[k], {x[k - 1], x[k], x[k + 1]}, 2);
  };
  const Mat robin = fornberg_weights(t[0], {t[0], t[1], t[2]}, 1);

  for (int i = 0; i <= Ns; ++i)
    for (int j = 0; j <= Nt; ++j) {
      const int r = id(i, j);
      if (i == Ns || j == Nt) {
        trip.emplace_back(r, r, 1.0);
        continue;
      }
      if (j == 0) {
        for (int q = 0; q < 3; ++q) trip.emplace_back(r, id(i, q), robin(1, q));
        trip.emplace_back(r, r, n / (1.0 + s[i] * s[i]));
        continue;
      }
      const Mat wt = w3(t, j);
      for (int q = 0; q < 3; ++q) trip.emplace_back(r, id(i, j - 1 + q), wt(2, q));
      if (i == 0) {
        // b_s = 0 on the axis, K b_s / s -> K b_ss, even ghost gives b_ss = 2(b_1 - b_0)/s_1^2
        const double c = (K + 1.0) * 2.0 / (s[1] * s[1]);
        trip.emplace_back(r, id(1, j), c);
        trip.emplace_back(r, r, -c);
      } else {
        const Mat ws = w3(s, i);
        for (int q = 0; q < 3; ++q)
          trip.emplace_back(r, id(i - 1 + q, j), ws(2, q) + K / s[i] * ws(1, q));
      }
      f(r) = profile_source(n, s[i], t[j]);
    }

  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw SolverError("solve_profile: sparse LU factorization failed: " + lu.lastErrorMessage(), f.lpNorm<Eigen::Infinity>());
  Eigen::VectorXd x = lu.solve(f);
  const double res = (A * x - f).lpNorm<Eigen::Infinity>();
  if (lu.info() != Eigen::Success || !std::isfinite(res) || res > 1e-8 * std::max(1.0, f.lpNorm<Eigen::Infinity>()))
    throw SolverError("solve_profile: direct solve did not converge", res);

  std::vector<double> b(x.data(), x.data() + x.size());
  ProfileDiagnostics d = truncation_diagnostics(n, s, t, b);
  d.algebraic_residual = res;
  d.iterations = 1;
  if (d.truncation_residual > grid.max_truncation)
    throw GridTooCoarse("solve_profile: truncation residual " + std::to_string(d.truncation_residual) +
                        " exceeds " + std::to_string(grid.max_truncation) + "; refine the grid or increase grading");
  return GammaProfile(n, s, t, std::move(b), d, grid);
}

void require_trace_free(const Mat& h, const char* who) {
  if (h.rows() != h.cols()) throw std::invalid_argument(std::string(who) + ": h must be square");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument(std::string(who) + ": h must be symmetric");
  if (std::abs(h.trace()) > 1e-12)
    throw std::domain_error(std::string(who) + ": h must be trace-free (|tr h| <= 1e-12), got tr h = " +
                            std::to_string(h.trace()));
}

FieldJet reconstruct_gamma(const GammaProfile& profile, const Mat& h, const Vec& y, int order) {
  const int n = profile.dimension(), m = n - 1;
  if (h.rows() != m) throw std::invalid_argument("reconstruct_gamma: h must be (n-1)x(n-1)");
  require_trace_free(h, "reconstruct_gamma");
  if (y.size() != n) throw std::invalid_argument("reconstruct_gamma: point has wrong dimension");
  if (y(m) < 0.0) throw std::domain_error("reconstruct_gamma: requires y_n >= 0");
  if (order < 0 || order > 2) throw std::domain_error("reconstruct_gamma: order must be 0, 1 or 2");
  const auto yb = y.head(m);
  const double s = yb.norm(), t = y(m);
  const GammaProfile::Sample b = profile.evaluate(s, t, order);
  const Vec hy = h * yb;
  const double Q = yb.dot(hy);
  FieldJet g;
  g.value = Q * b.b;
  if (order == 0) return g;
  Vec th = s > 0.0 ? Vec(yb / s) : Vec(Vec::Zero(m));
  g.gradient.resize(n);
  g.gradient.head(m) = 2.0 * b.b * hy + Q * b.bs * th;
  g.gradient(m) = Q * b.bt;
  if (order == 1) return g;
  const double bs_over_s = s > 1e-12 ? b.bs / s : b.bss;
  const Mat I = Mat::Identity(m, m);
  const Vec db = b.bs * th;
  Mat H(n, n);
  H.topLeftCorner(m, m) = 2.0 * b.b * h + 2.0 * (hy * db.transpose() + db * hy.transpose()) +
                          Q * (bs_over_s * I + (b.bss - bs_over_s) * th * th.transpose());
  const Vec mixed = 2.0 * b.bt * hy + Q * b.bst * th;
  H.topRightCorner(m, 1) = mixed;
  H.bottomLeftCorner(1, m) = mixed.transpose();
  H(m, m) = Q * b.btt;
  g.hessian = std::move(H);
  return g;
}

GammaField::GammaField(ProfilePtr profile, Mat h) : profile_(std::move(profile)), h_(std::move(h)) {
  if (!profile_) throw std::invalid_argument("GammaField: null profile");
  if (h_.rows() != profile_->dimension() - 1) throw std::invalid_argument("GammaField: h must be (n-1)x(n-1)");
  require_trace_free(h_, "GammaField");
}

FieldJet GammaField::evaluate(const Vec& y, int order) const { return reconstruct_gamma(*profile_, h_, y, order); }

double full_residual(const GammaProfile& profile, const Mat& h, const Vec& y) {
  const int n = profile.dimension(), m = n - 1;
  const FieldJet g = reconstruct_gamma(profile, h, y, 2);
  const FieldJet u = BubbleField(n).evaluate(y, 2);
  const double src = 2.0 * y(m) * (h.cwiseProduct(u.hessian.topLeftCorner(m, m))).sum();
  return std::abs(g.hessian.trace() + src);
}

namespace {

// int_0^S int_0^T s^{n+2} t b D^{-(n+2)/2} ds dt with k x k Gauss per cell.
double energy_kernel(const GammaProfile& p, int k) {
  const int n = p.dimension();
  const GaussRule g = gauss_symmetric_jacobi(k, 0.0);
  const auto& s = p.s_nodes();
  const auto& t = p.t_nodes();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    for (std::size_t j = 0; j + 1 < t.size(); ++j) {
      const double cs = 0.5 * (s[i] + s[i + 1]), hs = 0.5 * (s[i + 1] - s[i]);
      const double ct = 0.5 * (t[j] + t[j + 1]), ht = 0.5 * (t[j + 1] - t[j]);
      double cell = 0.0;
      for (int a = 0; a < k; ++a)
        for (int c = 0; c < k; ++c) {
          const double ss = cs + hs * g.nodes[a], tt = ct + ht * g.nodes[c];
          const double D = (1.0 + tt) * (1.0 + tt) + ss * ss;
          cell += g.weights[a] * g.weights[c] * std::pow(ss, n + 2) * tt * p.evaluate(ss, tt, 0).b *
                  std::pow(D, -0.5 * (n + 2));
        }
      acc += hs * ht * cell;
    }
  return acc;
}

}  // namespace

QuadValue gamma_energy_per_norm(const GammaProfile& profile) {
  const int n = profile.dimension();
  // int_{S^{n-2}} Q(theta)^2 = 2 omega_{n-2} |h|^2 / ((n-1)(n+1)) for trace-free h
  const double moment = 2.0 * sphere_volume(n - 2) / ((n - 1.0) * (n + 1.0));
  const double c = -2.0 * n * (n - 2.0) * moment;
  const double e4 = c * energy_kernel(profile, 4), e3 = c * energy_kernel(profile, 3);
  return {e4, std::abs(e4 - e3) + 1e-14 * std::abs(e4)};
}

QuadValue gamma_energy(const GammaProfile& profile, const Mat& h) {
  require_trace_free(h, "gamma_energy");
  if (h.rows() != profile.dimension() - 1) throw std::invalid_argument("gamma_energy: h must be (n-1)x(n-1)");
  const double h2 = h.squaredNorm();
  if (h2 == 0.0) return {0.0, 0.0};
  const QuadValue e = gamma_energy_per_norm(profile);
  return {e.value * h2, e.error * h2};
}

GammaInvariantReport gamma_invariants(const GammaProfile& profile, const Mat& h) {
  const int n = profile.dimension(), m = n - 1;
  require_trace_free(h, "gamma_invariants");
  if (h.rows() != m) throw std::invalid_argument("gamma_invariants: h must be (n-1)x(n-1)");
  GammaInvariantReport r;
  const GammaField gamma(std::make_shared<GammaProfile>(profile), h);

  const FieldJet g0 = gamma.evaluate(Vec::Zero(n), 1);
  r.gamma_at_origin = g0.value;
  r.tangential_gradient_at_origin = g0.gradient.head(m).cwiseAbs().maxCoeff();

  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double R = profile.far_field_radius();
  const SphereRule sphere = SphereRule::product(m, 4);

  // boundary moment over the disc of radius R in {y_n = 0}
  {
    const DiscRule disc = DiscRule::build(n, R, 1.0, sphere);
    const BubbleField U(n);
    double mom = 0.0, abs_sum = 0.0, nu = 0.0, ng = 0.0;
    disc.for_each([&](const Vec& y, double w) {
      const double a = std::pow(U.evaluate(y, 0).value, double(n) / (n - 2));
      const double g = gamma.evaluate(y, 0).value;
      mom += w * a * g;
      abs_sum += w * std::abs(a * g);
      nu += w * a * a;
      ng += w * g * g;
    });
    r.boundary_moment = mom;
    const double norm = std::sqrt(nu * ng);
    r.boundary_moment_normalized = norm > 0.0 ? std::abs(mom) / norm : 0.0;
    r.quadrature_tolerance = std::max(r.quadrature_tolerance, norm > 0.0 ? 64 * eps * abs_sum / norm : 0.0);
  }

  // L^2 pairings over the half ball of radius R
  {
    const HalfBallRule rule = HalfBallRule::build(n, R, 1.0, sphere);
    std::vector<KernelField> kernels;
    for (int b = 1; b <= n; ++b) kernels.emplace_back(b, n);
    std::vector<double> pair(n, 0.0), abs_pair(n, 0.0), nj(n, 0.0);
    double ng = 0.0;
    rule.for_each([&](const Vec& y, double w) {
      const double g = gamma.evaluate(y, 0).value;
      ng += w * g * g;
      for (int b = 0; b < n; ++b) {
        const double j = kernels[b].evaluate(y, 0).value;
        pair[b] += w * g * j;
        abs_pair[b] += w * std::abs(g * j);
        nj[b] += w * j * j;
      }
    });
    r.pairings = pair;
    r.pairings_normalized.resize(n);
    for (int b = 0; b < n; ++b) {
      const double norm = std::sqrt(ng * nj[b]);
      r.pairings_normalized[b] = norm > 0.0 ? std::abs(pair[b]) / norm : 0.0;
      if (norm > 0.0) r.quadrature_tolerance = std::max(r.quadrature_tolerance, 64 * eps * abs_pair[b] / norm);
    }
    r.jn_projection = nj[m] > 0.0 ? pair[m] / nj[m] : 0.0;
  }

  // decay envelopes along fixed rays
  {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> N01;
    std::vector<Vec> dirs;
    while (dirs.size() < 16) {
      Vec d(n);
      for (int a = 0; a < n; ++a) d(a) = N01(rng);
      d(m) = std::abs(d(m));
      dirs.push_back(d.normalized());
    }
    const double rmax = std::min(20.0, 0.99 * R);
    const int samples = 48;
    std::vector<double> rho(samples);
    for (int k = 0; k < samples; ++k) rho[k] = std::pow(rmax, double(k) / (samples - 1));
    for (int tau = 0; tau < 2; ++tau) {
      std::vector<double> env(samples, 0.0);
      for (int k = 0; k < samples; ++k)
        for (const Vec& d : dirs) {
          const FieldJet g = gamma.evaluate(rho[k] * d, tau);
          env[k] = std::max(env[k], tau == 0 ? std::abs(g.value) : g.gradient.norm());
        }
      DecayFit& f = r.decay[tau];
      f.tau = tau;
      double inner = 0.0, outer = 0.0;
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int cnt = 0;
      for (int k = 0; k < samples; ++k) {
        const double wgt = env[k] * std::pow(1.0 + rho[k], n - 3 + tau);
        f.constant = std::max(f.constant, wgt);
        double& slot = rho[k] < 10.0 ? inner : outer;
        slot = std::max(slot, wgt);
        if (rho[k] >= 4.0 && rho[k] <= 16.0 && env[k] > 0.0) {
          const double x = std::log(1.0 + rho[k]), yv = std::log(env[k]);
          sx += x; sy += yv; sxx += x * x; sxy += x * yv;
          ++cnt;
        }
      }
      f.exponent = cnt > 1 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
      f.growth_ratio = inner > 0.0 ? outer / inner : 0.0;
      f.holds = std::isfinite(f.constant) && f.exponent <= 3.0 - tau - n + DecayFit::kDecaySlack &&
                f.growth_ratio <= DecayFit::kGrowthSlack;
    }
  }

  r.energy = gamma_energy(profile, h);
  return r;
}

ConvergenceStudy convergence_study(int n, const GridSpec& finest, int levels) {
  if (levels < 2) throw std::invalid_argument("convergence_study: need at least 2 levels");
  ConvergenceStudy c;
  GridSpec g = finest;
  for (int l = 0; l < levels; ++l) {
    GridSpec cur = g;
    cur.max_truncation = std::numeric_limits<double>::infinity();
    const GammaProfile p = solve_profile(n, cur);
    c.grids.push_back(cur);
    c.truncation.push_back(p.diagnostics().truncation_residual);
    c.b_origin.push_back(p.value(0, 0));
    g = g.halved();
  }
  c.residual_order = std::log2(c.truncation[1] / c.truncation[0]);
  if (levels >= 3) {
    const double d1 = std::abs(c.b_origin[2] - c.b_origin[1]), d0 = std::abs(c.b_origin[1] - c.b_origin[0]);
    c.solution_order = d0 > 0.0 ? std::log2(d1 / d0) : 0.0;
  }
  return c;
}

}  // namespace yamabe
