#pragma once

#include "yamabe/metric_jet.hpp"
#include "yamabe/reduced_functional.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace yamabe {

// Malformed input: `where` is a JSON path such as "samples[2].pi" or
// "line 4, column 7" for syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, const std::string& where, const std::string& what)
      : std::runtime_error(source + ": " + where + ": " + what), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// {"n": 7, "h": [[...]], "dh": [[[...]]], "rbar": [[i,k,j,l,value], ...],
//  "rnn": [[...]], "scalar_curvature": {"value": 0, "gradient": [...], "hessian": [[...]]},
//  "mean_curvature_zero": true, "density_guard": 0.1}
// Indices in "rbar" are 1-based; every nonzero component must be listed.
MetricJet metric_jet_from_json(const std::string& text, const std::string& source = "<jet>");
MetricJet load_metric_jet(const std::filesystem::path& file);

// {"n": 7, "samples": [{"label": "q0", "coordinates": [..], "pi": [[...]], "alpha": -1, "beta": -1}, ...]}
BoundaryGeometry geometry_from_json(const std::string& text, const std::string& source = "<geometry>");
BoundaryGeometry load_geometry(const std::filesystem::path& file);

std::string read_text_file(const std::filesystem::path& file);
// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& file, const std::string& content);

}  // namespace yamabe
