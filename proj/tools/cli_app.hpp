#pragma once

// Command-line front end. run_cli() is the whole program minus process
// setup, so tests can drive it in-process.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sfga/sfga.hpp"

namespace sfga::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

namespace fs = std::filesystem;

/// Directory for outputs given without a directory: $SFGA_OUTPUT_DIR or ".".
inline fs::path output_dir() {
  const char* env = std::getenv("SFGA_OUTPUT_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

inline fs::path resolve_output(const std::optional<std::string>& out, const std::string& fallback) {
  const fs::path p = out ? fs::path(*out) : fs::path(fallback);
  return p.has_parent_path() || p.is_absolute() ? p : output_dir() / p;
}

// Flags shared by every experiment command; each is applied only when given.
struct GaFlags {
  std::optional<std::size_t> pop, gens, elite;
  std::optional<double> pc, pm, extension;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;

  void add(CLI::App& app) {
    app.add_option("--pop", pop, "population size");
    app.add_option("--gens", gens, "number of generations");
    app.add_option("--pc", pc, "crossover probability");
    app.add_option("--pm", pm, "per-coordinate mutation probability");
    app.add_option("--elite", elite, "elite count");
    app.add_option("--blend-extension", extension, "blend crossover extension");
    app.add_option("--seed", seed, "scenario seed");
    app.add_option("--threads", threads, "worker threads for fitness evaluation and replicates")
        ->check(CLI::PositiveNumber);
  }

  void apply(ExperimentScenario& s) const {
    if (pop) s.ga.population_size = *pop;
    if (gens) s.ga.generations = *gens;
    if (pc) s.ga.crossover_prob = *pc;
    if (pm) s.ga.mutation_prob = *pm;
    if (elite) s.ga.elite_count = *elite;
    if (extension) s.ga.blend_extension = *extension;
    s.ga.threads = threads;
  }
};

struct SmoothFlags {
  std::optional<double> psi, alpha, alpha_tilde, H;

  void add(CLI::App& app) {
    app.add_option("--psi", psi, "penalty scale Psi");
    app.add_option("--alpha", alpha, "penalty level alpha");
    app.add_option("--alpha-tilde", alpha_tilde, "feasibility threshold alpha~");
    app.add_option("--H", H, "penalty steepness H");
  }

  void apply(SmoothPenaltyParams& p) const {
    if (psi) p.psi = *psi;
    if (alpha) p.alpha = *alpha;
    if (alpha_tilde) p.alpha_tilde = *alpha_tilde;
    if (H) p.H = *H;
  }
};

struct OutputFlags {
  std::optional<std::string> out;
  std::size_t runs = 1;
  bool timing = false;

  void add(CLI::App& app, bool with_runs = true) {
    app.add_option("--out", out, "report path (relative names go under $SFGA_OUTPUT_DIR)");
    if (with_runs) app.add_option("--runs", runs, "replicate runs with derived seeds")->check(CLI::PositiveNumber);
    app.add_flag("--timing", timing, "include wall-clock seconds in the report");
  }
};

/// "key=value" applied to a scenario JSON document; key is a dotted path and
/// value is parsed as JSON, falling back to a string.
inline void apply_override(json& doc, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw FormatError("override '" + spec + "': expected key=value");
  const std::string key = spec.substr(0, eq);
  const std::string text = spec.substr(eq + 1);
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw FormatError("override '" + spec + "': no field '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = std::move(value);
}

inline void write_reports(const ExperimentScenario& s, const OutputFlags& o, const std::string& fallback,
                          std::ostream& out) {
  const fs::path report = resolve_output(o.out, fallback);
  const fs::path history = report.parent_path() / "history.csv";
  if (o.runs <= 1) {
    const ExperimentReport r = run_experiment(s);
    write_atomic(report, dump(to_json(r, o.timing)));
    write_atomic(history, history_csv(r.history));
    out << to_string(r.kind) << " seed=" << r.seed << " best_objective=" << format_double(r.best_objective)
        << " penalty=" << format_double(r.penalty) << "\n";
  } else {
    const ReplicatedReport rep = run_replicated(s, o.runs, s.ga.threads);
    write_atomic(report, dump(to_json(rep, o.timing)));
    write_atomic(history, history_csv(rep.mean_history));
    for (const auto& r : rep.runs) {
      out << to_string(r.kind) << " seed=" << r.seed << " best_objective=" << format_double(r.best_objective)
          << " penalty=" << format_double(r.penalty) << "\n";
    }
  }
  out << "wrote " << report.string() << " and " << history.string() << "\n";
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Genetic algorithm for optimization over stochastic feasibility regions", "sfga"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  // gen-scenario
  auto* gen = app.add_subcommand("gen-scenario", "write a scenario JSON file");
  std::string gen_kind = "circles";
  std::size_t gen_m = 7, gen_n = 10, gen_n1 = 30, gen_n2 = 100, gen_readings = 10;
  int gen_variant = 2;
  std::uint64_t gen_seed = 0;
  std::optional<std::string> gen_out;
  gen->add_option("--kind", gen_kind, "circles | plane | path")
      ->check(CLI::IsMember({"circles", "plane", "path"}));
  gen->add_option("--m", gen_m, "circles: number of circles");
  gen->add_option("--n", gen_n, "circles: readings per circle");
  gen->add_option("--n1", gen_n1, "plane: linear boundary observations");
  gen->add_option("--n2", gen_n2, "plane: nonlinear boundary observations");
  gen->add_option("--variant", gen_variant, "path: corridor variant 1..4");
  gen->add_option("--readings", gen_readings, "path: readings per obstacle");
  gen->add_option("--seed", gen_seed, "scenario seed");
  gen->add_option("--out", gen_out, "scenario path");

  // bench-circles
  auto* circ = app.add_subcommand("bench-circles", "Rastrigin over a union of noisy circles");
  GaFlags circ_ga;
  SmoothFlags circ_pen;
  OutputFlags circ_out;
  std::size_t circ_m = 7, circ_n = 10;
  std::optional<double> circ_r;
  bool circ_r_sq = false, circ_estimate = false;
  circ_ga.add(*circ);
  circ_pen.add(*circ);
  circ_out.add(*circ);
  circ->add_option("--m", circ_m, "number of circles");
  circ->add_option("--n", circ_n, "readings per circle");
  circ->add_option("--radius", circ_r, "circle radius r");
  circ->add_flag("--radius-squared", circ_r_sq, "treat --radius as r^2");
  circ->add_flag("--estimate-covariance", circ_estimate, "estimate the reading covariance instead of using the known one");

  // bench-plane
  auto* plane = app.add_subcommand("bench-plane", "Schwefel over a regression-divided plane");
  GaFlags plane_ga;
  SmoothFlags plane_pen;
  OutputFlags plane_out;
  std::size_t plane_n1 = 30, plane_n2 = 100;
  std::optional<double> plane_h, plane_sd1, plane_sd2;
  bool plane_silverman = false, plane_noiseless = false;
  plane_ga.add(*plane);
  plane_pen.add(*plane);
  plane_out.add(*plane);
  plane->add_option("--n1", plane_n1, "linear boundary observations");
  plane->add_option("--n2", plane_n2, "nonlinear boundary observations");
  plane->add_option("--sd1", plane_sd1, "linear boundary noise standard deviation");
  plane->add_option("--sd2", plane_sd2, "nonlinear boundary noise standard deviation");
  plane->add_option("--bandwidth", plane_h, "Nadaraya-Watson bandwidth");
  plane->add_flag("--silverman", plane_silverman, "choose the bandwidth by Silverman's rule");
  plane->add_flag("--noiseless", plane_noiseless, "draw boundary data without noise");

  // plan-path
  auto* path = app.add_subcommand("plan-path", "plan a B-spline path through noisy obstacles");
  GaFlags path_ga;
  OutputFlags path_out;
  int path_variant = 2;
  std::size_t path_readings = 10;
  std::optional<std::size_t> path_L;
  std::optional<double> path_psi, path_alpha, path_H, path_r, path_gamma, path_corr_alpha, path_h, path_bound;
  std::vector<std::vector<double>> path_obstacles;
  bool path_no_obstacles = false, path_no_corridor = false, path_estimate = false;
  path_ga.add(*path);
  path_out.add(*path);
  path->add_option("--variant", path_variant, "corridor variant 1..4");
  path->add_option("--readings", path_readings, "readings per obstacle");
  path->add_option("--free-coeffs", path_L, "number L of free spline coefficients");
  path->add_option("--psi", path_psi, "penalty scale psi");
  path->add_option("--alpha", path_alpha, "penalty level alpha");
  path->add_option("--H", path_H, "penalty steepness H");
  path->add_option("--radius", path_r, "obstacle clearance radius r");
  path->add_option("--gamma", path_gamma, "confidence-ellipse level gamma");
  path->add_option("--corridor-alpha-tilde", path_corr_alpha, "corridor feasibility threshold");
  path->add_option("--bandwidth", path_h, "local-quadratic corridor bandwidth");
  path->add_option("--theta-bound", path_bound, "search bound on each coefficient");
  path->add_option("--obstacle", path_obstacles, "obstacle center x,y (repeatable, replaces the default layout)")
      ->delimiter(',')
      ->expected(2)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->allow_extra_args(false);
  path->add_flag("--no-obstacles", path_no_obstacles, "plan without obstacles");
  path->add_flag("--no-corridor", path_no_corridor, "plan without a corridor");
  path->add_flag("--estimate-covariance", path_estimate, "estimate the reading covariance per obstacle");

  // replay
  auto* replay = app.add_subcommand("replay", "rerun a saved scenario");
  std::string replay_file;
  std::vector<std::string> overrides;
  OutputFlags replay_out;
  unsigned replay_threads = 0;
  replay->add_option("scenario", replay_file, "scenario JSON file")->required();
  replay->add_option("--override", overrides, "key=value on the scenario JSON, e.g. seed=9 or ga.generations=50");
  replay->add_option("--threads", replay_threads, "override ga.threads");
  replay_out.add(*replay);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      ExperimentScenario s;
      if (gen_kind == "circles") s = gen_circle_scenario(gen_m, gen_n, gen_seed);
      else if (gen_kind == "plane") s = gen_plane_scenario(gen_n1, gen_n2, gen_seed);
      else s = gen_path_scenario(gen_variant, gen_readings, gen_seed);
      const fs::path p = resolve_output(gen_out, "scenario.json");
      write_atomic(p, dump(to_json(s)));
      out << "wrote " << p.string() << "\n";
    } else if (circ->parsed()) {
      ExperimentScenario s = gen_circle_scenario(circ_m, circ_n, circ_ga.seed.value_or(0));
      circ_ga.apply(s);
      circ_pen.apply(s.penalty);
      if (circ_r) s.circles.radius = *circ_r;
      s.circles.radius_is_squared = circ_r_sq;
      s.circles.known_covariance = !circ_estimate;
      write_reports(s, circ_out, "report.json", out);
    } else if (plane->parsed()) {
      ExperimentScenario s = gen_plane_scenario(plane_n1, plane_n2, plane_ga.seed.value_or(0));
      plane_ga.apply(s);
      plane_pen.apply(s.penalty);
      if (plane_sd1) s.plane.sd1 = *plane_sd1;
      if (plane_sd2) s.plane.sd2 = *plane_sd2;
      if (plane_h) s.plane.nw_bandwidth = *plane_h;
      if (plane_silverman) s.plane.nw_bandwidth.reset();
      s.plane.noiseless = plane_noiseless;
      write_reports(s, plane_out, "report.json", out);
    } else if (path->parsed()) {
      ExperimentScenario s = gen_path_scenario(path_variant, path_readings, path_ga.seed.value_or(0));
      path_ga.apply(s);
      auto& pp = s.path;
      if (path_L) pp.free_coeffs = *path_L;
      if (path_psi) pp.penalty.psi = *path_psi;
      if (path_alpha) pp.penalty.alpha = *path_alpha;
      if (path_H) pp.penalty.H = *path_H;
      if (path_r) pp.penalty.radius = *path_r;
      if (path_gamma) pp.penalty.gamma = *path_gamma;
      if (path_corr_alpha) pp.penalty.corridor_alpha_tilde = *path_corr_alpha;
      if (path_h) pp.corridor_bandwidth = *path_h;
      if (path_bound) pp.theta_bound = *path_bound;
      if (!path_obstacles.empty()) {
        pp.obstacles.clear();
        for (const auto& xy : path_obstacles) pp.obstacles.emplace_back(xy.at(0), xy.at(1));
      }
      if (path_no_obstacles) pp.obstacles.clear();
      pp.use_corridor = !path_no_corridor;
      pp.estimate_covariance = path_estimate;
      write_reports(s, path_out, "trajectory.json", out);
    } else if (replay->parsed()) {
      json doc = parse_json_text(read_text_file(replay_file), replay_file);
      for (const auto& o : overrides) apply_override(doc, o);
      ExperimentScenario s;
      try {
        s = scenario_from_json(doc);
      } catch (const FormatError& e) {
        throw FormatError(replay_file + ": " + e.what());
      }
      if (replay_threads > 0) s.ga.threads = replay_threads;
      write_reports(s, replay_out, "report.json", out);
    }
  } catch (const std::exception& e) {
    err << "sfga: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace sfga::cli
