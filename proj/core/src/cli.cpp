#include "yamabe/cli.hpp"

#include "yamabe/bubble.hpp"
#include "yamabe/io.hpp"
#include "yamabe/metric_jet.hpp"
#include "yamabe/pohozaev.hpp"
#include "yamabe/special_integrals.hpp"

#include "detail/json_util.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#ifndef YAMABE_VERSION
#define YAMABE_VERSION "0.0.0"
#endif

namespace yamabe::cli {

using detail::json;
using detail::Reader;
namespace fs = std::filesystem;

namespace {

class MissingProfile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const json& module_versions() {
  static const json v = {{"yamabe", YAMABE_VERSION},     {"special_integrals", "1.0"}, {"bubble", "1.0"},
                         {"metric_jet", "1.0"},          {"gamma_solver", "1.1"},      {"pohozaev", "1.0"},
                         {"reduced_functional", "1.0"},  {"cli", "1.0"}};
  return v;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string file_hash(const fs::path& p) { return fs::exists(p) ? sha256_hex(read_text_file(p)) : "missing"; }

Mat default_pi(int n) {
  Mat p = Mat::Zero(n - 1, n - 1);
  p(0, 0) = 1.0;
  p(1, 1) = -1.0;
  return p;
}

json to_json(const BubbleResidualReport& r) {
  return {{"n", r.n},
          {"fd_step", r.fd_step},
          {"interior_points", r.interior_points},
          {"boundary_points", r.boundary_points},
          {"max_laplacian", r.max_laplacian},
          {"max_boundary", r.max_boundary},
          {"kernel_laplacian", r.kernel_laplacian},
          {"kernel_boundary", r.kernel_boundary}};
}

json to_json(const ProfileDiagnostics& d) {
  return {{"algebraic_residual", d.algebraic_residual}, {"truncation_residual", d.truncation_residual},
          {"boundary_truncation", d.boundary_truncation}, {"iterations", d.iterations},
          {"min_spacing", d.min_spacing},                 {"max_spacing", d.max_spacing}};
}

json to_json(const GammaInvariantReport& r) {
  json decay = json::array();
  for (const auto& d : r.decay)
    decay.push_back({{"tau", d.tau}, {"constant", d.constant}, {"exponent", d.exponent},
                     {"growth_ratio", d.growth_ratio}, {"holds", d.holds}});
  return {{"gamma_at_origin", r.gamma_at_origin},
          {"tangential_gradient_at_origin", r.tangential_gradient_at_origin},
          {"boundary_moment", r.boundary_moment},
          {"boundary_moment_normalized", r.boundary_moment_normalized},
          {"pairings", r.pairings},
          {"pairings_normalized", r.pairings_normalized},
          {"jn_projection", r.jn_projection},
          {"quadrature_tolerance", r.quadrature_tolerance},
          {"decay", decay},
          {"energy", {{"value", r.energy.value}, {"error", r.energy.error}}}};
}

json to_json(const PohozaevReport& r) {
  return {{"r", r.r},         {"P", r.P},         {"P_hat", r.P_hat},     {"I1", r.I1},
          {"I2", r.I2},       {"I3", r.I3},       {"P_error", r.P_error}, {"P_hat_error", r.P_hat_error},
          {"scheme", to_string(r.scheme)}, {"sphere_degree", r.sphere_degree}, {"seed", r.seed}};
}

json to_json(const Classification& c, const BoundaryGeometry& g) {
  json j = {{"verdict", to_string(c.verdict)}, {"margin", c.margin}, {"epsilon_bar", c.epsilon_bar}};
  if (c.witness) {
    j["witness"] = *c.witness;
    j["witness_label"] = g.samples[*c.witness].label;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Report files: deterministic content plus a separate metadata file.
class Writer {
 public:
  Writer(Command c, const RunConfig& cfg) : cmd_(c), cfg_(cfg), hash_(config_hash(c, cfg)) {}

  void json_report(const std::string& name, json body) {
    body["command"] = to_string(cmd_);
    body["config_hash"] = hash_;
    body["module_versions"] = module_versions();
    body["seed"] = cfg_.seed;
    body["n"] = cfg_.dimension();
    file(name, body.dump(2) + "\n");
  }

  void file(const std::string& name, const std::string& content) {
    write_file_atomic(cfg_.out / name, content);
    files_.push_back(name);
  }

  void finish() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    json meta = {{"command", to_string(cmd_)}, {"config_hash", hash_},      {"timestamp", ts.str()},
                 {"files", files_},            {"version", YAMABE_VERSION}};
    write_file_atomic(cfg_.out / ("metadata-" + to_string(cmd_) + ".json"), meta.dump(2) + "\n");
  }

 private:
  Command cmd_;
  const RunConfig& cfg_;
  std::string hash_;
  std::vector<std::string> files_;
};

ProfilePtr require_profile(const RunConfig& cfg) {
  const fs::path p = cfg.profile ? *cfg.profile : default_profile_path(cfg);
  if (!fs::exists(p))
    throw MissingProfile("no gamma profile at " + p.string() + "; run `yamabe-lab gamma --n " +
                         std::to_string(cfg.dimension()) + " --out " + cfg.out.string() +
                         "` first or pass --profile");
  auto prof = std::make_shared<const GammaProfile>(GammaProfile::load(p));
  if (prof->dimension() != cfg.dimension())
    throw std::invalid_argument("profile " + p.string() + " was computed for n = " + std::to_string(prof->dimension()) +
                                ", this run uses n = " + std::to_string(cfg.dimension()));
  return prof;
}

BoundaryGeometry require_geometry(const RunConfig& cfg) {
  if (!cfg.geometry) throw std::invalid_argument("this command needs --geometry <file>");
  BoundaryGeometry g = load_geometry(*cfg.geometry);
  if (g.n != cfg.dimension())
    throw std::invalid_argument("geometry is for n = " + std::to_string(g.n) + " but the run uses n = " +
                                std::to_string(cfg.dimension()));
  return g;
}

std::vector<double> phi_values(const BoundaryGeometry& g, double energy_per_norm, OmegaConvention c) {
  std::vector<double> v;
  for (const auto& q : g.samples) v.push_back(phi_from_energy(q.pi, g.n, energy_per_norm, c));
  return v;
}

// ---------------------------------------------------------------- integrals

int cmd_integrals(const RunConfig& cfg, Writer& w, std::ostream& out) {
  const int n = cfg.dimension();
  const IntegralTable table = IntegralTable::for_dimension(n);
  std::ostringstream csv;
  csv << "m,alpha,closed_form,quadrature,relative_difference\n";
  json rows = json::array();
  for (const auto& [key, e] : table.entries()) {
    double err = 0.0;
    const double q = integral_I_quadrature(e.m, e.alpha, &err);
    const double rel = std::abs(q - e.value) / std::abs(e.value);
    csv << e.m << ',' << e.alpha << ',' << csv_number(e.value) << ',' << csv_number(q) << ',' << csv_number(rel) << '\n';
    rows.push_back({{"m", e.m}, {"alpha", e.alpha}, {"closed_form", e.value}, {"quadrature", q},
                    {"quadrature_error", err}, {"relative_difference", rel}});
  }
  out << csv.str();
  w.file("integrals-n" + std::to_string(n) + ".csv", csv.str());
  w.json_report("integrals-n" + std::to_string(n) + ".json", {{"entries", rows}});
  return 0;
}

// ---------------------------------------------------------------- bubble

constexpr double kLaplacianTol = 1e-5;
constexpr double kBoundaryTol = 1e-12;
constexpr double kFdStep = 1e-3;

BubbleResidualReport bubble_report(int n, std::uint64_t seed) {
  BubbleField U(n);
  return check_bubble_residual(U, bubble_interior_sample(n, 100, seed), bubble_boundary_sample(n, 100, seed + 1), kFdStep);
}

bool bubble_ok(const BubbleResidualReport& r) {
  bool ok = r.max_laplacian <= kLaplacianTol && r.max_boundary <= kBoundaryTol;
  for (double v : r.kernel_laplacian) ok = ok && v <= kLaplacianTol;
  for (double v : r.kernel_boundary) ok = ok && v <= kBoundaryTol;
  return ok;
}

int cmd_bubble(const RunConfig& cfg, Writer& w, std::ostream& out) {
  const auto r = bubble_report(cfg.dimension(), cfg.seed);
  json j = to_json(r);
  j["laplacian_tolerance"] = kLaplacianTol;
  j["boundary_tolerance"] = kBoundaryTol;
  j["passed"] = bubble_ok(r);
  out << j.dump(2) << '\n';
  w.json_report("bubble-n" + std::to_string(cfg.dimension()) + ".json", j);
  return cfg.check && !bubble_ok(r) ? 1 : 0;
}

// ---------------------------------------------------------------- gamma

int cmd_gamma(const RunConfig& cfg, Writer& w, std::ostream& out) {
  const int n = cfg.dimension();
  const GammaProfile prof = solve_profile(n, cfg.grid);
  const fs::path dest = cfg.profile ? *cfg.profile : default_profile_path(cfg);
  prof.save(dest);

  Mat h = default_pi(n);
  if (cfg.geometry) h = require_geometry(cfg).samples.front().pi;
  const auto inv = gamma_invariants(prof, h);
  const auto e = gamma_energy_per_norm(prof);

  // far-field truncation estimate: same node counts, doubled box
  GridSpec wide = cfg.grid;
  wide.s_max *= 2.0;
  wide.t_max *= 2.0;
  const GammaProfile far = solve_profile(n, wide);
  const json truncation = {{"grid", wide.to_string()},
                           {"b_origin_change", std::abs(far.value(0, 0) - prof.value(0, 0))},
                           {"energy_per_norm_change", std::abs(gamma_energy_per_norm(far).value - e.value)}};
  json j = {{"grid", cfg.grid.to_string()},
            {"far_field_check", truncation},
            {"profile_file", dest.filename().string()},
            {"b_origin", prof.value(0, 0)},
            {"diagnostics", to_json(prof.diagnostics())},
            {"energy_per_norm", {{"value", e.value}, {"error", e.error}}},
            {"h", detail::to_json(h)},
            {"invariants", to_json(inv)}};
  out << "profile written to " << dest.string() << "\n"
      << "b(0,0) = " << prof.value(0, 0) << ", truncation residual " << prof.diagnostics().truncation_residual
      << ", energy/|h|^2 = " << e.value << '\n';
  w.json_report("gamma-n" + std::to_string(n) + ".json", j);
  return 0;
}

// ---------------------------------------------------------------- pohozaev

FieldPtr coefficient_field(const Reader& r, const std::string& key, int n) {
  if (!r.has(key)) return std::make_shared<ConstantField>(n, 0.0);
  if (r.j.at(key).is_number()) return std::make_shared<ConstantField>(n, r.number(key));
  const Reader c = r.child(key);
  Vec g = Vec::Zero(n);
  Mat H = Mat::Zero(n, n);
  if (c.has("g")) {
    g = c.vector("g");
    if (g.size() != n) c.fail("g", "expected n entries");
  }
  if (c.has("H")) H = c.matrix("H", n, n);
  return std::make_shared<QuadraticField>(c.number_or("c0", 0.0), g, H);
}

FieldPtr make_field(const Reader& r, const RunConfig& cfg, ProfilePtr& profile) {
  const int n = cfg.dimension();
  const std::string type = r.string_or("type", "");
  if (type == "bubble") {
    Vec center;
    if (r.has("center")) {
      center = r.vector("center");
      if (center.size() != n - 1) r.fail("center", "expected n-1 entries");
    }
    return std::make_shared<BubbleField>(n, r.number_or("delta", 1.0),
                                         r.number_or("cutoff", std::numeric_limits<double>::infinity()), center);
  }
  if (type == "constant") return std::make_shared<ConstantField>(n, r.number("value"));
  if (type == "kernel") {
    const int b = r.integer("b");
    if (b < 1 || b > n) r.fail("b", "kernel index must lie in 1..n");
    return std::make_shared<KernelField>(b, n);
  }
  if (type == "quadratic") return coefficient_field(Reader{json{{"q", r.j}}, r.path, r.source}, "q", n);
  if (type == "gamma") {
    if (!profile) profile = require_profile(cfg);
    return std::make_shared<GammaField>(profile, r.matrix("h", n - 1, n - 1));
  }
  if (type == "sum") {
    if (!r.has("terms") || !r.j.at("terms").is_array()) r.fail("terms", "expected an array of {coef, field}");
    auto lc = std::make_shared<LinearCombination>();
    const json& t = r.j.at("terms");
    for (std::size_t k = 0; k < t.size(); ++k) {
      const Reader e{t[k], r.at_path("terms[" + std::to_string(k) + "]"), r.source};
      lc->add(e.number_or("coef", 1.0), make_field(e.child("field"), cfg, profile));
    }
    return lc;
  }
  r.fail("type", "unknown field type '" + type + "' (bubble, constant, kernel, quadratic, gamma, sum)");
}

QuadratureOptions quadrature_options(const Reader& r, std::uint64_t seed) {
  QuadratureOptions o;
  o.seed = seed;
  if (!r.has("quadrature")) return o;
  const Reader q = r.child("quadrature");
  o.radial_points = q.integer_or("radial_points", o.radial_points);
  o.polar_points = q.integer_or("polar_points", o.polar_points);
  o.hemisphere_points = q.integer_or("hemisphere_points", o.hemisphere_points);
  o.monte_carlo_samples = static_cast<std::size_t>(q.integer_or("monte_carlo_samples", int(o.monte_carlo_samples)));
  o.estimate_error = q.boolean_or("estimate_error", o.estimate_error);
  o.force_monte_carlo = q.boolean_or("force_monte_carlo", o.force_monte_carlo);
  return o;
}

int cmd_pohozaev(const RunConfig& cfg, Writer& w, std::ostream& out) {
  if (!cfg.config) throw std::invalid_argument("pohozaev needs --config <file> describing the field and metric");
  const int n = cfg.dimension();
  const std::string source = cfg.config->string();
  const json root = detail::parse_json(read_text_file(*cfg.config), source);
  const Reader top{root, "", source};
  const Reader r = top.has("pohozaev") ? top.child("pohozaev") : top;

  MetricJet jet = MetricJet::flat(n);
  if (r.has("jet")) {
    if (r.j.at("jet").is_string()) {
      fs::path p = r.j.at("jet").get<std::string>();
      if (p.is_relative()) p = cfg.config->parent_path() / p;
      jet = load_metric_jet(p);
    } else {
      jet = detail::metric_jet_from(r.child("jet"));
    }
    if (jet.n() != n) r.fail("jet", "jet dimension differs from the run's n");
  }
  const double eps1 = r.number_or("eps1", 0.0), eps2 = r.number_or("eps2", 0.0);
  const FieldPtr alpha = coefficient_field(r, "alpha", n), beta = coefficient_field(r, "beta", n);
  const QuadratureOptions opt = quadrature_options(r, cfg.seed);
  std::vector<double> radii;
  if (r.has("radii")) radii = r.list("radii");
  else radii.push_back(r.number_or("r", 1.0));
  for (double rr : radii)
    if (!(rr > 0.0)) r.fail("r", "radius must be > 0");

  ProfilePtr profile;
  json j;
  const Vec origin = Vec::Zero(n);

  if (!cfg.delta_sweep.empty()) {
    const Reader f = r.child("field");
    if (f.string_or("type", "") != "bubble") f.fail("type", "the delta sweep rescales a bubble field; use type 'bubble'");
    std::ostringstream csv;
    csv << "delta,r,I1,I2,I3,P,P_hat\n";
    json rows = json::array();
    json extrap = json::array();
    for (double rr : radii) {
      std::vector<double> q2, q3;
      for (double d : cfg.delta_sweep) {
        json fj = f.j;
        fj["delta"] = d;
        const FieldPtr u = make_field(Reader{fj, f.path, f.source}, cfg, profile);
        const PohozaevReport rep = compute_P_hat(*u, rr, jet, eps1, eps2, *alpha, *beta, opt);
        csv << csv_number(d) << ',' << csv_number(rr) << ',' << csv_number(rep.I1) << ',' << csv_number(rep.I2) << ','
            << csv_number(rep.I3) << ',' << csv_number(rep.P) << ',' << csv_number(rep.P_hat) << '\n';
        json row = to_json(rep);
        row["delta"] = d;
        rows.push_back(row);
        q2.push_back(eps1 != 0.0 ? rep.I2 / (eps1 * d * d) : 0.0);
        q3.push_back(eps2 != 0.0 ? rep.I3 / (eps2 * d) : 0.0);
      }
      json e = {{"r", rr}};
      if (eps1 != 0.0) {
        const double lim = richardson_limit(cfg.delta_sweep, q2, n - 4);
        const double target = flat_I2_limit(n, alpha->evaluate(origin, 0).value);
        e["I2_over_eps1_delta2"] = {{"extrapolated", lim}, {"flat_limit", target},
                                    {"relative_difference", std::abs(lim - target) / std::abs(target)}};
      }
      if (eps2 != 0.0) {
        const double lim = richardson_limit(cfg.delta_sweep, q3, n - 3);
        const double target = flat_I3_limit(n, beta->evaluate(origin, 0).value);
        e["I3_over_eps2_delta"] = {{"extrapolated", lim}, {"flat_limit", target},
                                   {"relative_difference", std::abs(lim - target) / std::abs(target)}};
      }
      extrap.push_back(e);
    }
    out << csv.str();
    w.file("pohozaev-sweep.csv", csv.str());
    j = {{"delta_sweep", cfg.delta_sweep}, {"reports", rows}, {"extrapolation", extrap}};
  } else {
    const FieldPtr u = make_field(r.child("field"), cfg, profile);
    json rows = json::array();
    for (double rr : radii) rows.push_back(to_json(compute_P_hat(*u, rr, jet, eps1, eps2, *alpha, *beta, opt)));
    if (r.has("curvature_form")) {
      const Reader c = r.child("curvature_form");
      const FieldPtr v = c.has("v") ? make_field(c.child("v"), cfg, profile) : u;
      const double rad = c.number_or("radius", radii.front());
      const auto R = curvature_form_R(*u, *v, jet, rad, opt);
      j["curvature_form"] = {{"radius", rad}, {"value", R.value}, {"error", R.error}, {"scheme", to_string(R.scheme)}};
    }
    j["reports"] = rows;
    out << rows.dump(2) << '\n';
  }
  j["eps1"] = eps1;
  j["eps2"] = eps2;
  w.json_report("pohozaev.json", j);
  return 0;
}

// ---------------------------------------------------------------- landscape / classify

Regime infer_regime(const BoundaryGeometry& g) {
  bool pos = true, two = true;
  for (const auto& q : g.samples) {
    pos = pos && q.beta > 0.0;
    two = two && q.beta < 0.0 && q.alpha > 0.0;
  }
  if (pos) return Regime::One;
  if (two) return Regime::Two;
  throw std::invalid_argument("landscape: geometry fits neither regime (beta > 0 everywhere, or beta < 0 and alpha > 0 "
                              "everywhere)");
}

json constants_json(const ExpansionConstants& k) { return {{"A", k.A}, {"B", k.B}, {"C", k.C}}; }

int cmd_landscape(const RunConfig& cfg, Writer& w, std::ostream& out) {
  const BoundaryGeometry g = require_geometry(cfg);
  const auto prof = require_profile(cfg);
  const double e = gamma_energy_per_norm(*prof).value;
  const auto k = expansion_constants(g.n);
  const auto phis = phi_values(g, e, cfg.omega);
  const Regime regime = infer_regime(g);
  const ReducedLandscape L = landscape(regime, g, k, phis);

  json crit = json::array();
  for (const auto& c : L.critical)
    crit.push_back({{"sample", c.sample}, {"label", g.samples[c.sample].label}, {"lambda", c.lambda},
                    {"value", c.value}, {"derivative", c.derivative}, {"type", to_string(c.type)}});
  const auto& sel = L.critical[L.selected];
  json j = {{"regime", int(regime)},
            {"omega_convention", to_string(cfg.omega)},
            {"constants", constants_json(k)},
            {"energy_per_norm", e},
            {"phi", phis},
            {"critical_points", crit},
            {"selected", {{"sample", sel.sample}, {"label", g.samples[sel.sample].label}, {"lambda", sel.lambda},
                          {"value", sel.value}}},
            {"grid", {{"sample", L.grid_selected}, {"lambda", L.grid_lambda}, {"value", L.grid_value},
                      {"lo", L.range.lo}, {"hi", L.range.hi}, {"points", L.range.points}}}};
  if (cfg.csv) {
    std::ostringstream csv;
    csv << "lambda,sample,label,G\n";
    for (std::size_t s = 0; s < L.values.size(); ++s)
      for (std::size_t i = 0; i < L.lambdas.size(); ++i)
        csv << csv_number(L.lambdas[i]) << ',' << s << ',' << g.samples[s].label << ',' << csv_number(L.values[s][i])
            << '\n';
    w.file("landscape.csv", csv.str());
  }
  out << "regime " << int(regime) << ": selected sample " << sel.sample << " at lambda* = " << sel.lambda
      << ", G* = " << sel.value << " (" << to_string(sel.type) << ")\n";
  w.json_report("landscape.json", j);
  return 0;
}

int cmd_classify(const RunConfig& cfg, Writer& w, std::ostream& out) {
  const BoundaryGeometry g = require_geometry(cfg);
  const auto prof = require_profile(cfg);
  const double e = gamma_energy_per_norm(*prof).value;
  const auto k = expansion_constants(g.n);
  const auto phis = phi_values(g, e, cfg.omega);
  json verdicts = json::array();
  std::string first;
  for (double eb : cfg.epsilon_bar) {
    const Classification c = classify(g, k, phis, eb);
    if (first.empty()) first = to_string(c.verdict);
    verdicts.push_back(to_json(c, g));
    out << "epsilon_bar = " << eb << ": " << to_string(c.verdict) << '\n';
  }
  w.json_report("classify.json", {{"omega_convention", to_string(cfg.omega)},
                                  {"constants", constants_json(k)},
                                  {"phi", phis},
                                  {"verdicts", verdicts}});
  w.file("verdict.txt", first + "\n");
  return 0;
}

// ---------------------------------------------------------------- verify-all

struct Check {
  std::string id, suite, description, reference;
  double value = 0.0, tolerance = 0.0;
  bool passed = false;
};

class Suite {
 public:
  explicit Suite(std::ostream& out) : out_(out) {}

  void add(std::string id, std::string suite, std::string description, std::string reference, double value,
           double tolerance, bool passed) {
    checks_.push_back({std::move(id), std::move(suite), std::move(description), std::move(reference), value, tolerance,
                       passed});
    const auto& c = checks_.back();
    out_ << (passed ? "PASS " : "FAIL ") << c.id << "  " << c.description << "  [" << c.reference << "]  value "
         << std::setprecision(6) << c.value << " tol " << c.tolerance << '\n';
  }
  // value <= tol
  void le(std::string id, std::string suite, std::string d, std::string ref, double v, double tol) {
    add(std::move(id), std::move(suite), std::move(d), std::move(ref), v, tol, v <= tol);
  }

  bool all_passed() const {
    for (const auto& c : checks_)
      if (!c.passed) return false;
    return true;
  }

  json to_json() const {
    json a = json::array();
    for (const auto& c : checks_)
      a.push_back({{"id", c.id}, {"suite", c.suite}, {"description", c.description}, {"reference", c.reference},
                   {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}});
    return a;
  }

  std::vector<std::string> failures() const {
    std::vector<std::string> f;
    for (const auto& c : checks_)
      if (!c.passed) f.push_back(c.id);
    return f;
  }

 private:
  std::ostream& out_;
  std::vector<Check> checks_;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void suite_integrals(Suite& s) {
  double r1 = 0, r2 = 0, quad = 0, comp = 0, sign = -1e300;
  for (int m = 1; m <= 12; ++m)
    for (int a = 0; a <= 12; ++a) {
      if (2 * m - a - 1 <= 0) continue;
      const double I = integral_I(m, a);
      quad = std::max(quad, rel(integral_I_quadrature(m, a), I));
      if (m <= 11) r1 = std::max(r1, rel(I, 2.0 * m / (2.0 * m - a - 1.0) * integral_I(m + 1, a)));
      if (2 * m - a - 3 > 0) r2 = std::max(r2, rel(I, (2.0 * m - a - 3.0) / (a + 1.0) * integral_I(m, a + 2)));
    }
  for (int n = 7; n <= 12; ++n) {
    const double lhs = (n - 5.0) * integral_I(n - 1, n - 2) / ((n - 3.0) * (n - 4.0)) - integral_I(n - 1, n) / (n - 4.0);
    comp = std::max(comp, rel(lhs, -8.0 * integral_I(n, n) / ((n - 3.0) * (n - 4.0))));
  }
  for (int n = 5; n <= 12; ++n)
    sign = std::max(sign, sphere_volume(n - 2) * (integral_I(n - 1, n - 2) - integral_I(n - 1, n)));
  s.le("I.1", "integrals", "index-raising recurrence in m", "integral recurrences", r1, 1e-12);
  s.le("I.2", "integrals", "recurrence in alpha", "integral recurrences", r2, 1e-12);
  s.le("I.3", "integrals", "composite identity, 7 <= n <= 12", "leading Pohozaev constant", comp, 1e-12);
  s.le("I.4", "integrals", "closed form vs quadrature, m, alpha <= 12", "Beta-function form", quad, 1e-10);
  s.add("I.5", "integrals", "omega_{n-2}(I_{n-1}^{n-2} - I_{n-1}^n) < 0, 5 <= n <= 12", "boundary kernel sign", sign, 0.0,
        sign < 0.0);
}

void suite_bubble(Suite& s, int n, std::uint64_t seed) {
  std::vector<int> dims{7, 8, 10};
  if (std::find(dims.begin(), dims.end(), n) == dims.end()) dims.push_back(n);
  double lap = 0, bnd = 0, klap = 0, kbnd = 0;
  for (int d : dims) {
    const auto r = bubble_report(d, seed);
    lap = std::max(lap, r.max_laplacian);
    bnd = std::max(bnd, r.max_boundary);
    for (double v : r.kernel_laplacian) klap = std::max(klap, v);
    for (double v : r.kernel_boundary) kbnd = std::max(kbnd, v);
  }
  double cov = 0.0;
  const BubbleField unit(n);
  for (const double d : {0.5, 2.0, 0.1}) {
    const BubbleField Ud(n, d);
    for (const Vec& y : bubble_interior_sample(n, 50, seed + 7)) {
      const double a = Ud.evaluate(y, 0).value;
      const double b = std::pow(d, -0.5 * (n - 2)) * unit.evaluate(y / d, 0).value;
      cov = std::max(cov, rel(a, b));
    }
  }
  s.le("B.1", "bubble", "finite-difference Laplacian of U, h = 1e-3", "bubble is harmonic", lap, kLaplacianTol);
  s.le("B.2", "bubble", "boundary equation of U", "bubble boundary equation", bnd, kBoundaryTol);
  s.le("B.3", "bubble", "Laplacian of every kernel field", "linearized problem, interior", klap, kLaplacianTol);
  s.le("B.4", "bubble", "linearized boundary condition of every kernel field", "linearized problem, boundary", kbnd,
       kBoundaryTol);
  s.le("B.5", "bubble", "scaling covariance of U_delta", "bubble rescaling", cov, 1e-14);
}

void suite_metric(Suite& s, int n) {
  const MetricJet flat = MetricJet::flat(n);
  const BubbleField U(n);
  double dev = 0.0;
  for (const Vec& y : bubble_interior_sample(n, 20, 3)) dev = std::max(dev, std::abs(conformal_deficit(flat, U, y)));
  s.le("M.1", "metric_jet", "flat jet has zero conformal deficit", "metric expansion", dev, 0.0);
  bool rejected = false;
  try {
    Mat h = default_pi(n);
    h(0, 1) = 1e-3;
    MetricJet::pure_h(h);
  } catch (const JetSymmetryError&) {
    rejected = true;
  }
  s.add("M.2", "metric_jet", "asymmetric h rejected at construction", "metric symmetries", rejected ? 0.0 : 1.0, 0.0,
        rejected);
}

ProfilePtr suite_gamma(Suite& s, int n, const GridSpec& grid) {
  const ConvergenceStudy st = convergence_study(n, grid, 3);
  s.add("G.1", "gamma", "reduced PDE residual order under grid halving", "correction function equation",
        st.residual_order, 1.8, st.residual_order >= 1.8);

  auto prof = std::make_shared<const GammaProfile>(solve_profile(n, grid));
  const Mat h = default_pi(n);
  const double tau = prof->diagnostics().truncation_residual;
  double worst = 0.0;
  for (const Vec& y : bubble_interior_sample(n, 40, 11)) {
    const double s2 = y.head(n - 1).squaredNorm();
    if (s2 == 0.0) continue;
    worst = std::max(worst, full_residual(*prof, h, y) / (h.norm() * s2 * tau));
  }
  s.le("G.2", "gamma", "full-coordinate residual over |h| s^2 times the discrete norm", "reconstruction", worst, 10.0);

  const auto inv = gamma_invariants(*prof, h);
  s.le("G.3", "gamma", "gamma and its tangential gradient vanish at 0", "correction function at the origin",
       std::max(std::abs(inv.gamma_at_origin), inv.tangential_gradient_at_origin), 1e-12);
  s.le("G.4", "gamma", "normalized boundary moment against U^{n/(n-2)}", "correction function orthogonality",
       std::abs(inv.boundary_moment_normalized), 1e-6);
  double pair = 0.0;
  for (double v : inv.pairings_normalized) pair = std::max(pair, std::abs(v));
  s.le("G.5", "gamma", "normalized pairings with the kernel fields", "correction function orthogonality", pair, 1e-6);
  s.le("G.6", "gamma", "energy int gamma Delta gamma is nonpositive", "correction function energy", inv.energy.value,
       0.0);
  for (int k = 0; k < 2; ++k)
    s.add("G." + std::to_string(7 + k), "gamma", "decay of the " + std::to_string(k) + "-th derivatives",
          "correction function decay", inv.decay[k].exponent, 3.0 - k - n + DecayFit::kDecaySlack, inv.decay[k].holds);
  return prof;
}

void suite_pohozaev(Suite& s, int n, const ProfilePtr& prof) {
  const MetricJet flat = MetricJet::flat(n);
  const ConstantField zero(n, 0.0), minus_one(n, -1.0);
  double pmax = 0.0, exact = 0.0;
  for (const double d : {0.5, 1.0})
    for (const double r : {1.0, 2.0}) {
      const BubbleField U(n, d);
      const auto rep = compute_P_hat(U, r, flat, 0.0, 0.0, zero, zero);
      pmax = std::max(pmax, std::abs(rep.P));
      exact = std::max(exact, std::abs(rep.P_hat - (rep.I1 + rep.I2 + rep.I3)));
    }
  s.le("P.1", "pohozaev", "|P(U_delta, r)| for r in {1,2}, delta in {0.5,1}", "flat Pohozaev identity", pmax, 1e-8);
  s.le("P.2", "pohozaev", "P_hat equals I1 + I2 + I3", "term split", exact, 0.0);

  double i3 = 1e300;
  for (const double d : {0.1, 0.05, 0.025}) {
    const auto rep = compute_P_hat(BubbleField(n, d), 1.0, flat, 0.0, 1.0, zero, minus_one);
    i3 = std::min(i3, rep.I3);
  }
  s.add("P.3", "pohozaev", "I3 > 0 for beta = -1", "boundary term sign", i3, 0.0, i3 > 0.0);

  double prop = 0.0;
  for (int d = 7; d <= 12; ++d)
    prop = std::max(prop, rel(curvature_pi_coefficient(d) / alpha_coefficient(d), compactness_threshold(d)));
  s.le("P.4", "pohozaev", "coefficient ratio equals the compactness threshold, 7 <= n <= 12",
       "sign estimate vs compactness condition", prop, 1e-12);

  // I1 is R(u, u) by definition
  const Mat h = default_pi(n);
  const double delta = 0.1;
  const MetricJet jet = MetricJet::pure_h(h).rescaled(delta);
  auto u = std::make_shared<LinearCombination>();
  u->add(1.0, std::make_shared<BubbleField>(n)).add(delta * delta, std::make_shared<GammaField>(prof, h));
  const double radius = 0.5 / delta;
  const auto rep = compute_P_hat(*u, radius, jet, 0.0, 0.0, zero, zero);
  const auto R = curvature_form_R(*u, *u, jet, radius);
  s.le("P.5", "pohozaev", "I1 agrees with R(u, u)", "curvature form", rel(rep.I1, R.value), 1e-12);
}

void suite_landscape(Suite& s, int n, double energy, OmegaConvention omega, const std::optional<BoundaryGeometry>& geo) {
  const double pi3 = std::pow(std::numbers::pi, 3);
  const auto k7 = expansion_constants(7);
  s.le("L.1", "reduced_functional", "A(7) = pi^3/144 and C(7) = pi^3/48", "expansion constants",
       std::max(rel(k7.A, pi3 / 144.0), rel(k7.C, pi3 / 48.0)), 1e-12);
  double mn = 1e300;
  for (int d = 7; d <= 12; ++d) {
    const auto k = expansion_constants(d);
    mn = std::min({mn, k.A, k.B, k.C});
  }
  s.add("L.2", "reduced_functional", "A, B, C > 0 for 7 <= n <= 12", "expansion constants", mn, 0.0, mn > 0.0);

  double phimax = phi_from_energy(default_pi(n), n, energy, omega);
  if (geo)
    for (double v : phi_values(*geo, energy, omega)) phimax = std::max(phimax, v);
  s.le("L.3", "reduced_functional", "phi <= 0 on every sample", "expansion lemma", phimax, 0.0);

  const auto k = expansion_constants(n);
  auto make = [&](double alpha, double beta) {
    BoundaryGeometry g;
    g.n = n;
    for (int i = 0; i < 3; ++i) {
      BoundarySample q;
      q.label = "q" + std::to_string(i);
      q.pi = (1.0 + 0.5 * i) * default_pi(n);
      q.alpha = alpha;
      q.beta = beta;
      g.samples.push_back(q);
    }
    return g;
  };
  const BoundaryGeometry compact = make(-1.0, -1.0), one = make(-1.0, 1.0);
  BoundaryGeometry two = make(0.0, -1.0);
  const auto phi_two = phi_values(two, energy, omega);
  for (std::size_t i = 0; i < two.samples.size(); ++i) two.samples[i].alpha = -phi_two[i] / k.B + 0.1;
  const bool table = classify(compact, k, phi_values(compact, energy, omega), 1.0).verdict == Verdict::Compact &&
                     classify(one, k, phi_values(one, energy, omega), 1.0).verdict == Verdict::BlowUpRegime1 &&
                     classify(two, k, phi_two, 1.0).verdict == Verdict::BlowUpRegime2;
  s.add("L.4", "reduced_functional", "classifier truth table", "compactness and blow-up theorems", table ? 0.0 : 1.0, 0.0,
        table);

  bool exclusive = true;
  for (const BoundaryGeometry* g : {&compact, static_cast<const BoundaryGeometry*>(&two)})
    for (const double eps : {-1e-9, 1e-9}) {
      BoundaryGeometry p = *g;
      for (auto& q : p.samples) q.alpha += eps;
      const Verdict v = classify(p, k, phi_values(p, energy, omega), 1.0).verdict;
      exclusive = exclusive && (g == &compact ? v != Verdict::BlowUpRegime2 : v != Verdict::Compact);
    }
  s.add("L.5", "reduced_functional", "Compact and regime 2 never coincide under alpha +- 1e-9", "verdict exclusivity",
        exclusive ? 0.0 : 1.0, 0.0, exclusive);

  const auto L = landscape(Regime::One, one, k, phi_values(one, energy, omega));
  const bool agree = L.grid_selected == L.critical[L.selected].sample;
  s.add("L.6", "reduced_functional", "grid search selects the closed-form sample", "reduced landscape",
        agree ? 0.0 : 1.0, 0.0, agree);
}

int cmd_verify_all(const RunConfig& cfg, Writer& w, std::ostream& out) {
  const int n = cfg.dimension();
  std::optional<BoundaryGeometry> geo;
  if (cfg.geometry) geo = require_geometry(cfg);
  Suite s(out);
  suite_integrals(s);
  suite_bubble(s, n, cfg.seed);
  suite_metric(s, n);
  const ProfilePtr prof = suite_gamma(s, n, cfg.grid);
  suite_pohozaev(s, n, prof);
  suite_landscape(s, n, gamma_energy_per_norm(*prof).value, cfg.omega, geo);
  const auto failed = s.failures();
  w.json_report("verify-all.json", {{"grid", cfg.grid.to_string()}, {"invariants", s.to_json()},
                                    {"passed", failed.empty()}, {"failed", failed}});
  if (!failed.empty()) {
    out << failed.size() << " invariant(s) violated:";
    for (const auto& f : failed) out << ' ' << f;
    out << '\n';
    return 1;
  }
  out << "all invariants hold\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------- public

Command parse_command(const std::string& s) {
  if (s == "integrals") return Command::Integrals;
  if (s == "bubble") return Command::Bubble;
  if (s == "gamma") return Command::Gamma;
  if (s == "pohozaev") return Command::Pohozaev;
  if (s == "landscape") return Command::Landscape;
  if (s == "classify") return Command::Classify;
  if (s == "verify-all") return Command::VerifyAll;
  throw std::invalid_argument("unknown command '" + s + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Integrals: return "integrals";
    case Command::Bubble: return "bubble";
    case Command::Gamma: return "gamma";
    case Command::Pohozaev: return "pohozaev";
    case Command::Landscape: return "landscape";
    case Command::Classify: return "classify";
    case Command::VerifyAll: return "verify-all";
  }
  return "unknown";
}

int RunConfig::dimension() const { return n.value_or(7); }

void RunConfig::validate() const {
  const int d = dimension();
  if (d < 7)
    throw std::domain_error("n = " + std::to_string(d) +
                            ": the analysis assumes n >= 7 (the correction term and the constants degenerate below)");
  for (std::size_t i = 0; i < delta_sweep.size(); ++i) {
    if (!(delta_sweep[i] > 0.0)) throw std::invalid_argument("delta sweep entries must be positive");
    if (i > 0 && !(delta_sweep[i] < delta_sweep[i - 1]))
      throw std::invalid_argument("delta sweep must be strictly decreasing");
  }
  if (epsilon_bar.empty()) throw std::invalid_argument("need at least one epsilon_bar value");
  for (double e : epsilon_bar)
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("epsilon_bar values must lie in (0, 1]");
}

fs::path default_profile_path(const RunConfig& cfg) {
  return cfg.out / ("gamma-profile-n" + std::to_string(cfg.dimension()) + ".json");
}

RunConfig load_run_config(const fs::path& file) {
  const std::string src = file.string();
  const json j = detail::parse_json(read_text_file(file), src);
  const Reader r{j, "", src};
  if (!j.is_object()) r.fail("", "expected a JSON object");
  RunConfig c;
  c.config = file;
  const fs::path base = file.parent_path();
  auto path_of = [&](const std::string& key) {
    fs::path p = r.string_or(key, "");
    if (p.empty()) r.fail(key, "expected a non-empty path");
    return p.is_relative() ? base / p : p;
  };
  if (r.has("n")) c.n = r.integer("n");
  if (r.has("geometry")) c.geometry = path_of("geometry");
  if (r.has("profile")) c.profile = path_of("profile");
  if (r.has("out")) c.out = path_of("out");
  if (r.has("grid")) {
    try {
      c.grid = GridSpec::parse(r.string_or("grid", ""));
    } catch (const std::invalid_argument& e) {
      r.fail("grid", e.what());
    }
  }
  if (r.has("delta_sweep")) c.delta_sweep = r.list("delta_sweep");
  if (r.has("epsilon_bar")) c.epsilon_bar = r.list("epsilon_bar");
  if (r.has("seed")) {
    if (!j.at("seed").is_number_unsigned()) r.fail("seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (r.has("omega_convention")) {
    try {
      c.omega = parse_omega_convention(r.string_or("omega_convention", ""));
    } catch (const std::invalid_argument& e) {
      r.fail("omega_convention", e.what());
    }
  }
  c.csv = r.boolean_or("csv", false);
  return c;
}

std::string config_hash(Command c, const RunConfig& cfg) {
  json j = {{"command", to_string(c)},
            {"n", cfg.dimension()},
            {"grid", cfg.grid.to_string()},
            {"delta_sweep", cfg.delta_sweep},
            {"epsilon_bar", cfg.epsilon_bar},
            {"seed", cfg.seed},
            {"omega_convention", to_string(cfg.omega)},
            {"csv", cfg.csv},
            {"check", cfg.check}};
  if (cfg.geometry) j["geometry_sha256"] = file_hash(*cfg.geometry);
  if (cfg.config) j["config_sha256"] = file_hash(*cfg.config);
  if (c == Command::Landscape || c == Command::Classify || c == Command::Pohozaev) {
    const fs::path p = cfg.profile ? *cfg.profile : default_profile_path(cfg);
    if (fs::exists(p)) j["profile_sha256"] = file_hash(p);
  }
  return sha256_hex(j.dump());
}

int run(Command c, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
    Writer w(c, cfg);
    int status = 0;
    switch (c) {
      case Command::Integrals: status = cmd_integrals(cfg, w, out); break;
      case Command::Bubble: status = cmd_bubble(cfg, w, out); break;
      case Command::Gamma: status = cmd_gamma(cfg, w, out); break;
      case Command::Pohozaev: status = cmd_pohozaev(cfg, w, out); break;
      case Command::Landscape: status = cmd_landscape(cfg, w, out); break;
      case Command::Classify: status = cmd_classify(cfg, w, out); break;
      case Command::VerifyAll: status = cmd_verify_all(cfg, w, out); break;
    }
    w.finish();
    return status;
  } catch (const std::domain_error& e) {
    err << "domain error: " << e.what() << '\n';
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const MissingProfile& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 2;
}

}  // namespace yamabe::cli
