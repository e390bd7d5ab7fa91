#pragma once

// JSON serialization of scenarios and reports, CSV fitness histories, and
// atomic file output.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "sfga/benchmarks.hpp"

namespace sfga {

using json = nlohmann::ordered_json;

/// Malformed scenario input; what() names the offending line or field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace io_detail {

// Non-finite values have no JSON literal; they are written as null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vec2(const Vec2& v) { return json::array({v.x(), v.y()}); }

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Field access with a dotted path for diagnostics.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Reader at(const char* key) const {
    if (!j_.is_object()) fail(path_, "expected an object");
    if (!j_.contains(key)) fail(child(key), "missing field");
    return {j_.at(key), child(key)};
  }

  Reader at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t size() const {
    if (!j_.is_array()) fail(path_, "expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail(path_, "expected a number");
    return j_.get<double>();
  }

  std::optional<double> optional_number() const {
    if (j_.is_null()) return std::nullopt;
    return number();
  }

  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned()) fail(path_, "expected a nonnegative integer");
    return j_.get<std::uint64_t>();
  }

  std::size_t count() const { return static_cast<std::size_t>(unsigned_integer()); }

  int integer() const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    return j_.get<int>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }

  Vec2 vec2() const {
    if (size() != 2) fail(path_, "expected a [x, y] pair");
    return {at(std::size_t{0}).number(), at(std::size_t{1}).number()};
  }

  [[noreturn]] void fail(const std::string& msg) const { fail(path_, msg); }

 private:
  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw FormatError("field '" + path + "': " + msg);
  }
  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

}  // namespace io_detail

inline ScenarioKind parse_kind(const std::string& s) {
  if (s == "circles") return ScenarioKind::circles;
  if (s == "plane_division") return ScenarioKind::plane_division;
  if (s == "path_planning") return ScenarioKind::path_planning;
  throw FormatError("field 'kind': unknown scenario kind '" + s + "'");
}

inline json to_json(const GaConfig& c) {
  return {{"population_size", c.population_size}, {"generations", c.generations},
          {"crossover_prob", c.crossover_prob},   {"mutation_prob", c.mutation_prob},
          {"elite_count", c.elite_count},         {"blend_extension", c.blend_extension},
          {"threads", c.threads}};
}

inline json to_json(const SmoothPenaltyParams& p) {
  return {{"psi", p.psi}, {"alpha", p.alpha}, {"alpha_tilde", p.alpha_tilde}, {"H", p.H}};
}

inline json to_json(const PathPenaltyConfig& p) {
  return {{"psi", p.psi},       {"alpha", p.alpha}, {"H", p.H},
          {"radius", p.radius}, {"gamma", p.gamma}, {"corridor_alpha_tilde", p.corridor_alpha_tilde}};
}

inline json to_json(const ExperimentScenario& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["seed"] = s.seed;
  j["ga"] = to_json(s.ga);
  j["penalty"] = to_json(s.penalty);
  const auto& c = s.circles;
  j["circles"] = {{"m", c.m},
                  {"n", c.n},
                  {"radius", c.radius},
                  {"radius_is_squared", c.radius_is_squared},
                  {"noise_sd", c.noise_sd},
                  {"known_covariance", c.known_covariance},
                  {"box", c.box}};
  const auto& p = s.plane;
  j["plane"] = {{"n1", p.n1},
                {"n2", p.n2},
                {"sd1", p.sd1},
                {"sd2", p.sd2},
                {"noiseless", p.noiseless},
                {"nw_bandwidth", io_detail::optional_number(p.nw_bandwidth)},
                {"box", p.box}};
  const auto& q = s.path;
  json obstacles = json::array();
  for (const auto& o : q.obstacles) obstacles.push_back(io_detail::vec2(o));
  j["path"] = {{"variant", q.variant},
               {"readings", q.readings},
               {"b", q.b},
               {"sigma1", q.sigma1},
               {"sigma2", q.sigma2},
               {"rho", q.rho},
               {"obstacles", obstacles},
               {"use_corridor", q.use_corridor},
               {"corridor_bandwidth", io_detail::optional_number(q.corridor_bandwidth)},
               {"estimate_covariance", q.estimate_covariance},
               {"free_coeffs", q.free_coeffs},
               {"theta_bound", q.theta_bound},
               {"penalty", to_json(q.penalty)}};
  return j;
}

/// Inverse of to_json; every field is required so that a scenario file is a
/// complete record. Throws FormatError naming the offending field.
inline ExperimentScenario scenario_from_json(const json& root) {
  using io_detail::Reader;
  const Reader r(root, "");
  ExperimentScenario s;
  s.kind = parse_kind(r.at("kind").string());
  s.seed = r.at("seed").unsigned_integer();

  const Reader ga = r.at("ga");
  s.ga.population_size = ga.at("population_size").count();
  s.ga.generations = ga.at("generations").count();
  s.ga.crossover_prob = ga.at("crossover_prob").number();
  s.ga.mutation_prob = ga.at("mutation_prob").number();
  s.ga.elite_count = ga.at("elite_count").count();
  s.ga.blend_extension = ga.at("blend_extension").number();
  s.ga.threads = static_cast<unsigned>(ga.at("threads").count());

  const Reader pen = r.at("penalty");
  s.penalty = {pen.at("psi").number(), pen.at("alpha").number(), pen.at("alpha_tilde").number(),
               pen.at("H").number()};

  const Reader c = r.at("circles");
  s.circles.m = c.at("m").count();
  s.circles.n = c.at("n").count();
  s.circles.radius = c.at("radius").number();
  s.circles.radius_is_squared = c.at("radius_is_squared").boolean();
  s.circles.noise_sd = c.at("noise_sd").number();
  s.circles.known_covariance = c.at("known_covariance").boolean();
  s.circles.box = c.at("box").number();

  const Reader p = r.at("plane");
  s.plane.n1 = p.at("n1").count();
  s.plane.n2 = p.at("n2").count();
  s.plane.sd1 = p.at("sd1").number();
  s.plane.sd2 = p.at("sd2").number();
  s.plane.noiseless = p.at("noiseless").boolean();
  s.plane.nw_bandwidth = p.at("nw_bandwidth").optional_number();
  s.plane.box = p.at("box").number();

  const Reader q = r.at("path");
  s.path.variant = q.at("variant").integer();
  s.path.readings = q.at("readings").count();
  s.path.b = q.at("b").number();
  s.path.sigma1 = q.at("sigma1").number();
  s.path.sigma2 = q.at("sigma2").number();
  s.path.rho = q.at("rho").number();
  const Reader obs = q.at("obstacles");
  s.path.obstacles.clear();
  for (std::size_t i = 0; i < obs.size(); ++i) s.path.obstacles.push_back(obs.at(i).vec2());
  s.path.use_corridor = q.at("use_corridor").boolean();
  s.path.corridor_bandwidth = q.at("corridor_bandwidth").optional_number();
  s.path.estimate_covariance = q.at("estimate_covariance").boolean();
  s.path.free_coeffs = q.at("free_coeffs").count();
  s.path.theta_bound = q.at("theta_bound").number();
  const Reader pp = q.at("penalty");
  s.path.penalty.psi = pp.at("psi").number();
  s.path.penalty.alpha = pp.at("alpha").number();
  s.path.penalty.H = pp.at("H").number();
  s.path.penalty.radius = pp.at("radius").number();
  s.path.penalty.gamma = pp.at("gamma").number();
  s.path.penalty.corridor_alpha_tilde = pp.at("corridor_alpha_tilde").number();

  validate_scenario(s);
  return s;
}

/// Parses JSON text, reporting syntax errors by line and column.
inline json parse_json_text(const std::string& text, const std::string& source = "<input>") {
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
    throw FormatError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON (" +
                      e.what() + ")");
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExperimentScenario load_scenario(const std::filesystem::path& path) {
  const json j = parse_json_text(read_text_file(path), path.string());
  try {
    return scenario_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline json to_json(const std::vector<GenerationRecord>& history) {
  json out = json::array();
  for (std::size_t g = 0; g < history.size(); ++g) {
    out.push_back({{"generation", g}, {"best", io_detail::number(history[g].best)},
                   {"mean", io_detail::number(history[g].mean)}});
  }
  return out;
}

inline json to_json(const ObjectiveBreakdown& b) {
  return {{"arc_length", b.arc_length},
          {"obstacle_penalty", b.obstacle_penalty},
          {"corridor_penalty", b.corridor_penalty},
          {"obstacle_distance", io_detail::number(b.obstacle_distance)},
          {"corridor_gamma", b.corridor_gamma},
          {"total", b.total()}};
}

inline json to_json(const TrajectoryExport& t) {
  json samples = json::array();
  for (const auto& p : t.samples) samples.push_back(io_detail::vec2(p));
  json ellipses = json::array();
  for (const auto& e : t.ellipses) {
    ellipses.push_back({{"center", io_detail::vec2(e.center)},
                        {"semi_major", e.semi_major},
                        {"semi_minor", e.semi_minor},
                        {"rotation", e.rotation}});
  }
  json obstacles = json::array();
  for (const auto& o : t.true_obstacles) obstacles.push_back(io_detail::vec2(o));
  json corridor = json::array();
  for (const auto& row : t.corridor) corridor.push_back(json::array({row[0], row[1], row[2]}));
  return {{"samples", samples},   {"theta", t.theta},         {"knots", t.knots},
          {"ellipses", ellipses}, {"true_obstacles", obstacles}, {"radius", t.radius},
          {"corridor", corridor}, {"objective", to_json(t.objective)}};
}

/// Full report. Wall-clock time is included only on request so that reruns
/// stay byte-identical.
inline json to_json(const ExperimentReport& r, bool include_timing = false) {
  json j;
  j["kind"] = to_string(r.kind);
  j["seed"] = r.seed;
  j["best_candidate"] = r.best_candidate;
  j["best_objective"] = io_detail::number(r.best_objective);
  j["penalty"] = io_detail::number(r.penalty);
  j["best_fitness"] = io_detail::number(r.best_fitness);
  j["history"] = to_json(r.history);
  if (include_timing) j["wall_seconds"] = r.wall_seconds;
  j["scenario"] = to_json(r.scenario);
  if (r.trajectory) j["trajectory"] = to_json(*r.trajectory);
  return j;
}

inline json to_json(const ReplicatedReport& rep, bool include_timing = false) {
  json runs = json::array();
  for (const auto& r : rep.runs) runs.push_back(to_json(r, include_timing));
  return {{"runs", runs}, {"mean_history", to_json(rep.mean_history)}};
}

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// "generation,best,mean" header plus one row per history entry.
inline std::string history_csv(const std::vector<GenerationRecord>& history) {
  std::string out = "generation,best,mean\n";
  for (std::size_t g = 0; g < history.size(); ++g) {
    out += std::to_string(g) + "," + format_double(history[g].best) + "," + format_double(history[g].mean) + "\n";
  }
  return out;
}

/// Writes via a sibling temporary file and rename, so readers never see a
/// partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace sfga
