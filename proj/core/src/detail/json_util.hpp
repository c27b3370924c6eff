#pragma once

#include "yamabe/io.hpp"
#include "yamabe/quadrature.hpp"

#include <json.hpp>

#include <string>

namespace yamabe::detail {

using json = nlohmann::json;

json parse_json(const std::string& text, const std::string& source);

// Reads field `key` of object j; `path` is the JSON path of j for messages.
struct Reader {
  const json& j;
  std::string path;
  std::string source;

  bool has(const std::string& key) const { return j.is_object() && j.contains(key) && !j.at(key).is_null(); }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
  std::string at_path(const std::string& key) const { return path.empty() ? key : path + "." + key; }
  Reader child(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer_or(const std::string& key, int fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  Vec vector(const std::string& key) const;
  Mat matrix(const std::string& key, int rows, int cols) const;
  std::vector<double> list(const std::string& key) const;
};

json to_json(const Vec& v);
json to_json(const Mat& m);

MetricJet metric_jet_from(const Reader& r);
BoundaryGeometry geometry_from(const Reader& r);

}  // namespace yamabe::detail
