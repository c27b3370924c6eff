#include "yamabe/io.hpp"

#include "detail/json_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace yamabe {

namespace detail {

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source, "line " + std::to_string(line) + ", column " + std::to_string(col),
                      "malformed JSON");
  }
}

void Reader::fail(const std::string& key, const std::string& what) const {
  throw ConfigError(source, key.empty() ? (path.empty() ? "<root>" : path) : at_path(key), what);
}

Reader Reader::child(const std::string& key) const {
  if (!has(key)) fail(key, "missing required field");
  return Reader{j.at(key), at_path(key), source};
}

double Reader::number(const std::string& key) const {
  if (!has(key)) fail(key, "missing required field");
  if (!j.at(key).is_number()) fail(key, "expected a number");
  return j.at(key).get<double>();
}

double Reader::number_or(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

int Reader::integer(const std::string& key) const {
  if (!has(key)) fail(key, "missing required field");
  if (!j.at(key).is_number_integer()) fail(key, "expected an integer");
  return j.at(key).get<int>();
}

int Reader::integer_or(const std::string& key, int fallback) const { return has(key) ? integer(key) : fallback; }

bool Reader::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(key, "expected true or false");
  return j.at(key).get<bool>();
}

std::string Reader::string_or(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  if (!j.at(key).is_string()) fail(key, "expected a string");
  return j.at(key).get<std::string>();
}

std::vector<double> Reader::list(const std::string& key) const {
  if (!has(key)) fail(key, "missing required field");
  const json& a = j.at(key);
  if (!a.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) fail(key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

Vec Reader::vector(const std::string& key) const {
  const auto v = list(key);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Mat Reader::matrix(const std::string& key, int rows, int cols) const {
  if (!has(key)) fail(key, "missing required field");
  const json& a = j.at(key);
  if (!a.is_array() || static_cast<int>(a.size()) != rows)
    fail(key, "expected " + std::to_string(rows) + " rows of " + std::to_string(cols) + " numbers");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = a[i];
    const std::string rk = key + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != cols) fail(rk, "expected " + std::to_string(cols) + " numbers");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number()) fail(rk + "[" + std::to_string(c) + "]", "expected a number");
      m(i, c) = row[c].get<double>();
    }
  }
  return m;
}

json to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Mat& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (int c = 0; c < m.cols(); ++c) row[c] = m(i, c);
    a.push_back(row);
  }
  return a;
}

MetricJet metric_jet_from(const Reader& r) {
  if (!r.j.is_object()) r.fail("", "expected a JSON object describing the metric jet");
  MetricJetComponents c;
  c.n = r.integer("n");
  if (c.n < 3) r.fail("n", "dimension must be >= 3");
  const int m = c.n - 1;
  if (r.has("h")) c.h = r.matrix("h", m, m);
  if (r.has("rnn")) c.rnn = r.matrix("rnn", m, m);
  if (r.has("dh")) {
    const json& a = r.j.at("dh");
    if (!a.is_array() || static_cast<int>(a.size()) != m) r.fail("dh", "expected n-1 matrices dh[k][i][j]");
    for (int k = 0; k < m; ++k) {
      const std::string key = "dh[" + std::to_string(k) + "]";
      const json wrap = {{key, a[k]}};
      c.dh.push_back(Reader{wrap, r.path, r.source}.matrix(key, m, m));
    }
  }
  if (r.has("rbar")) {
    const json& a = r.j.at("rbar");
    if (!a.is_array()) r.fail("rbar", "expected a list of [i, k, j, l, value] entries");
    c.rbar.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
    for (std::size_t e = 0; e < a.size(); ++e) {
      const std::string key = "rbar[" + std::to_string(e) + "]";
      const json& t = a[e];
      if (!t.is_array() || t.size() != 5) r.fail(key, "expected [i, k, j, l, value]");
      int q[4];
      for (int d = 0; d < 4; ++d) {
        if (!t[d].is_number_integer()) r.fail(key, "indices must be integers");
        q[d] = t[d].get<int>();
        if (q[d] < 1 || q[d] > m) r.fail(key, "index out of range 1.." + std::to_string(m));
      }
      if (!t[4].is_number()) r.fail(key, "value must be a number");
      c.rbar[(((q[0] - 1) * m + (q[1] - 1)) * m + (q[2] - 1)) * m + (q[3] - 1)] = t[4].get<double>();
    }
  }
  if (r.has("scalar_curvature")) {
    const Reader s = r.child("scalar_curvature");
    c.scalar_curvature.value = s.number_or("value", 0.0);
    if (s.has("gradient")) {
      c.scalar_curvature.gradient = s.vector("gradient");
      if (c.scalar_curvature.gradient.size() != c.n) s.fail("gradient", "expected n entries");
    }
    if (s.has("hessian")) c.scalar_curvature.hessian = s.matrix("hessian", c.n, c.n);
  }
  c.mean_curvature_zero = r.boolean_or("mean_curvature_zero", true);
  c.density_guard = r.number_or("density_guard", 0.1);
  try {
    return MetricJet(std::move(c));
  } catch (const JetSymmetryError& e) {
    throw ConfigError(r.source, r.path.empty() ? "<jet>" : r.path, e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.source, r.path.empty() ? "<jet>" : r.path, e.what());
  }
}

BoundaryGeometry geometry_from(const Reader& r) {
  if (!r.j.is_object()) r.fail("", "expected a JSON object describing the boundary geometry");
  BoundaryGeometry g;
  g.n = r.integer("n");
  if (g.n < 7) r.fail("n", "the analysis requires n >= 7");
  const int m = g.n - 1;
  if (!r.has("samples") || !r.j.at("samples").is_array()) r.fail("samples", "expected an array of samples");
  const json& a = r.j.at("samples");
  if (a.empty()) r.fail("samples", "sample list is empty");
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Reader s{a[k], r.at_path("samples[" + std::to_string(k) + "]"), r.source};
    if (!s.j.is_object()) s.fail("", "expected an object");
    BoundarySample q;
    q.label = s.string_or("label", "");
    if (s.has("coordinates")) q.coordinates = s.list("coordinates");
    if (s.has("pi_diagonal")) {
      const Vec d = s.vector("pi_diagonal");
      if (d.size() != m) s.fail("pi_diagonal", "expected n-1 entries");
      q.pi = d.asDiagonal();
    } else {
      q.pi = s.matrix("pi", m, m);
    }
    if ((q.pi - q.pi.transpose()).cwiseAbs().maxCoeff() > 1e-12) s.fail("pi", "matrix is not symmetric");
    if (std::abs(q.pi.trace()) > 1e-12)
      s.fail("pi", "not trace-free (tr = " + std::to_string(q.pi.trace()) + "); refusing to project");
    q.alpha = s.number("alpha");
    q.beta = s.number("beta");
    g.samples.push_back(std::move(q));
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.source, r.path.empty() ? "<geometry>" : r.path, e.what());
  }
  return g;
}

}  // namespace detail

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& file, const std::string& content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

MetricJet metric_jet_from_json(const std::string& text, const std::string& source) {
  const detail::json j = detail::parse_json(text, source);
  return detail::metric_jet_from(detail::Reader{j, "", source});
}

MetricJet load_metric_jet(const std::filesystem::path& file) {
  return metric_jet_from_json(read_text_file(file), file.string());
}

BoundaryGeometry geometry_from_json(const std::string& text, const std::string& source) {
  const detail::json j = detail::parse_json(text, source);
  return detail::geometry_from(detail::Reader{j, "", source});
}

BoundaryGeometry load_geometry(const std::filesystem::path& file) {
  return geometry_from_json(read_text_file(file), file.string());
}

}  // namespace yamabe
