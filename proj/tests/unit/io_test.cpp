#include "yamabe/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace yamabe;

namespace {

const char* kJet = R"({"n": 5, "h": [[1,0,0,0],[0,-1,0,0],[0,0,0,0],[0,0,0,0]],
 "rbar": [[1,2,1,2,0.5],[2,1,2,1,0.5],[1,2,2,1,-0.5],[2,1,1,2,-0.5]],
 "rnn": [[0.1,0,0,0],[0,0.1,0,0],[0,0,0.1,0],[0,0,0,0.1]],
 "scalar_curvature": {"value": 0.3}})";

}  // namespace

TEST(Io, ParsesAJet) {
  const MetricJet j = metric_jet_from_json(kJet);
  EXPECT_EQ(j.n(), 5);
  EXPECT_EQ(j.h()(1, 1), -1.0);
  EXPECT_EQ(j.rbar(0, 1, 0, 1), 0.5);
  EXPECT_EQ(j.rbar(1, 0, 0, 1), -0.5);
  EXPECT_NEAR(j.boundary_ricci()(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(j.normal_ricci(), 0.4, 1e-15);
  EXPECT_EQ(j.scalar_curvature().value, 0.3);
}

TEST(Io, CurvatureSymmetryViolationNamesTheQuadruple) {
  const std::string bad = R"({"n": 5, "rbar": [[1,2,1,2,0.5]]})";
  try {
    metric_jet_from_json(bad, "jet.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("(1,2,1,2)"), std::string::npos) << e.what();
  }
}

TEST(Io, SyntaxErrorsReportLineAndColumn) {
  try {
    metric_jet_from_json("{\n  \"n\": 5,\n  \"h\": [1, 2,,]\n}", "x.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.where().rfind("line 3", 0), 0u) << e.where();
  }
}

TEST(Io, FieldErrorsReportThePath) {
  const std::string g = R"({"n": 7, "samples": [
    {"label": "a", "pi_diagonal": [1,-1,0,0,0,0], "alpha": 1, "beta": 1},
    {"label": "b", "pi": [[1]], "alpha": 1, "beta": 1}]})";
  try {
    geometry_from_json(g, "g.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.where(), "samples[1].pi") << e.what();
  }
  const std::string missing = R"({"n": 7, "samples": [{"pi_diagonal": [1,-1,0,0,0,0], "beta": 1}]})";
  try {
    geometry_from_json(missing);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.where(), "samples[0].alpha");
  }
}

TEST(Io, TraceFreeIsRefusedNotProjected) {
  const std::string g = R"({"n": 7, "samples": [{"pi_diagonal": [1,-0.5,0,0,0,0], "alpha": 1, "beta": 1}]})";
  try {
    geometry_from_json(g);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("trace-free"), std::string::npos);
  }
}

TEST(Io, DimensionGuard) {
  EXPECT_THROW(geometry_from_json(R"({"n": 6, "samples": []})"), ConfigError);
}

TEST(Io, AtomicWrite) {
  const auto dir = std::filesystem::temp_directory_path() / "yamabe-io-test";
  std::filesystem::remove_all(dir);
  write_file_atomic(dir / "a" / "b.txt", "hello");
  EXPECT_EQ(read_text_file(dir / "a" / "b.txt"), "hello");
  EXPECT_FALSE(std::filesystem::exists(dir / "a" / "b.txt.tmp"));
  std::filesystem::remove_all(dir);
}
