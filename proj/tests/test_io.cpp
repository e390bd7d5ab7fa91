#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "sfga/io.hpp"

using namespace sfga;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sfga_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ScenarioJson, RoundTripPreservesEveryField) {
  ExperimentScenario s = gen_path_scenario(3, 45, 123456789012345ull);
  s.path.corridor_bandwidth = 7.5;
  s.path.obstacles.push_back(Vec2(12.25, -3.125));
  s.plane.nw_bandwidth.reset();
  s.ga.blend_extension = 0.2;
  s.circles.radius_is_squared = true;
  const json once = to_json(s);
  const ExperimentScenario back = scenario_from_json(once);
  EXPECT_EQ(to_json(back), once);
  EXPECT_EQ(back.seed, s.seed);
  EXPECT_EQ(*back.path.corridor_bandwidth, 7.5);
  EXPECT_FALSE(back.plane.nw_bandwidth.has_value());
  EXPECT_EQ(back.path.obstacles.back(), Vec2(12.25, -3.125));
}

TEST(ScenarioJson, TextRoundTripOfEachKind) {
  for (const ExperimentScenario& s : {gen_circle_scenario(7, 10, 3), gen_plane_scenario(30, 100, 4),
                                      gen_path_scenario(1, 10, 5)}) {
    const std::string text = dump(to_json(s));
    EXPECT_EQ(dump(to_json(scenario_from_json(parse_json_text(text)))), text);
  }
}

TEST(ScenarioJson, MalformedTextReportsLineAndColumn) {
  const std::string text = "{\n  \"kind\": \"circles\",\n  \"seed\": ,\n}";
  const std::string msg = message_of([&] { parse_json_text(text, "bad.json"); });
  EXPECT_EQ(msg.rfind("bad.json:3:", 0), 0u) << msg;
  EXPECT_NE(msg.find("malformed JSON"), std::string::npos);
}

TEST(ScenarioJson, MissingFieldIsNamed) {
  json j = to_json(gen_circle_scenario());
  j["ga"].erase("mutation_prob");
  const std::string msg = message_of([&] { scenario_from_json(j); });
  EXPECT_NE(msg.find("ga.mutation_prob"), std::string::npos) << msg;
  EXPECT_NE(msg.find("missing"), std::string::npos) << msg;
}

TEST(ScenarioJson, WrongTypesAndValuesAreRejected) {
  json j = to_json(gen_circle_scenario());
  j["circles"]["m"] = -3;
  EXPECT_NE(message_of([&] { scenario_from_json(j); }).find("circles.m"), std::string::npos);
  json k = to_json(gen_circle_scenario());
  k["kind"] = "triangles";
  EXPECT_THROW(scenario_from_json(k), FormatError);
  json v = to_json(gen_path_scenario());
  v["path"]["variant"] = 9;
  EXPECT_THROW(scenario_from_json(v), std::invalid_argument);
  json o = to_json(gen_path_scenario());
  o["path"]["obstacles"][0] = json::array({1.0});
  EXPECT_NE(message_of([&] { scenario_from_json(o); }).find("path.obstacles[0]"), std::string::npos);
}

TEST(ScenarioJson, LoadFromFile) {
  const fs::path dir = scratch_dir("load");
  const ExperimentScenario s = gen_plane_scenario(30, 100, 17);
  write_atomic(dir / "s.json", dump(to_json(s)));
  EXPECT_EQ(to_json(load_scenario(dir / "s.json")), to_json(s));
  EXPECT_THROW(load_scenario(dir / "absent.json"), std::runtime_error);
  write_atomic(dir / "broken.json", "{\"kind\": ");
  const std::string msg = message_of([&] { load_scenario(dir / "broken.json"); });
  EXPECT_NE(msg.find("broken.json:1:"), std::string::npos) << msg;
}

TEST(HistoryCsv, OneRowPerGenerationPlusHeader) {
  ExperimentScenario s = gen_circle_scenario(7, 10, 2);
  s.ga.generations = 17;
  const ExperimentReport r = run_experiment(s);
  const std::string csv = history_csv(r.history);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "generation,best,mean");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    EXPECT_EQ(std::stoul(line.substr(0, comma)), rows);
    const auto second = line.find(',', comma + 1);
    EXPECT_EQ(std::stod(line.substr(comma + 1, second - comma - 1)), r.history[rows].best);
    ++rows;
  }
  EXPECT_EQ(rows, s.ga.generations + 1);
}

TEST(FormatDouble, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, -7197.123456789, 1e-300}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(ReportJson, ShapeAndDeterminism) {
  const ExperimentScenario s = gen_path_scenario(2, 10, 9);
  const json a = to_json(run_experiment(s));
  const json b = to_json(run_experiment(s));
  EXPECT_EQ(dump(a), dump(b));
  EXPECT_FALSE(a.contains("wall_seconds"));
  EXPECT_EQ(a["kind"], "path_planning");
  EXPECT_EQ(a["seed"], 9u);
  EXPECT_EQ(a["history"].size(), s.ga.generations + 1);
  EXPECT_EQ(a["scenario"], to_json(s));
  const json& t = a["trajectory"];
  EXPECT_EQ(t["samples"].size(), 400u);
  EXPECT_EQ(t["ellipses"].size(), 3u);
  EXPECT_EQ(t["corridor"].size(), 400u);
  EXPECT_TRUE(to_json(run_experiment(s), true).contains("wall_seconds"));
}

TEST(ReportJson, NonFiniteNumbersBecomeNull) {
  ObjectiveBreakdown b;
  const json j = to_json(b);
  EXPECT_TRUE(j["obstacle_distance"].is_null());
  EXPECT_EQ(j["total"], 0.0);
}

TEST(WriteAtomic, CreatesDirectoriesAndReplaces) {
  const fs::path dir = scratch_dir("atomic");
  const fs::path target = dir / "nested" / "deeper" / "out.txt";
  write_atomic(target, "first");
  EXPECT_EQ(read_text_file(target), "first");
  write_atomic(target, "second");
  EXPECT_EQ(read_text_file(target), "second");
  EXPECT_FALSE(fs::exists(fs::path(target).concat(".tmp")));
}

TEST(WriteAtomic, FailureLeavesNoTemporary) {
  const fs::path dir = scratch_dir("atomic_fail");
  fs::create_directories(dir / "occupied" / "child");
  // Renaming a file over a non-empty directory fails.
  EXPECT_THROW(write_atomic(dir / "occupied", "x"), std::runtime_error);
  EXPECT_FALSE(fs::exists(dir / "occupied.tmp"));
}
