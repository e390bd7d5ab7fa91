#pragma once

// Benchmark problems and experiment runners: Rastrigin over a union of noisy
// circles, Schwefel over a regression-divided plane, and the vehicle path
// planner over noisy obstacle fields and corridors.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sfga/feasibility.hpp"
#include "sfga/ga.hpp"
#include "sfga/path.hpp"
#include "sfga/penalty.hpp"
#include "sfga/random.hpp"

namespace sfga {

inline double rastrigin(std::span<const double> x) {
  double s = 20.0;
  for (double xi : x) s += xi * xi - 10.0 * std::cos(2.0 * std::numbers::pi * xi);
  return s;
}

/// sum_k (sum_{j<=k} x_j)^2.
inline double schwefel(std::span<const double> x) {
  double partial = 0.0, s = 0.0;
  for (double xi : x) {
    partial += xi;
    s += partial * partial;
  }
  return s;
}

enum class ScenarioKind { circles, plane_division, path_planning };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::circles: return "circles";
    case ScenarioKind::plane_division: return "plane_division";
    case ScenarioKind::path_planning: return "path_planning";
  }
  return "?";
}

/// Feasible circles F_k centered at (15k - 60, 15k - 60), observed through
/// Gaussian clouds.
struct CircleParams {
  std::size_t m = 7;
  std::size_t n = 10;
  double radius = 10.0;
  /// Use radius sqrt(radius) instead, matching the "- 10 <= 0" set definition.
  bool radius_is_squared = false;
  double noise_sd = 10.0 / 3.0;
  bool known_covariance = true;
  double box = 60.0;

  double effective_radius() const { return radius_is_squared ? std::sqrt(radius) : radius; }
  Vec2 center(std::size_t k) const {  // k = 1..m
    const double c = 15.0 * static_cast<double>(k) - 60.0;
    return {c, c};
  }
};

/// F1 = {x2 >= x1 + 20} learned by linear regression, F2 = {x2 <= x1 - 30 + 12 sin(x1/5)}
/// learned by Nadaraya-Watson regression.
struct PlaneParams {
  std::size_t n1 = 30;
  std::size_t n2 = 100;
  double sd1 = 5.0;
  double sd2 = 2.0;
  bool noiseless = false;
  /// Absent selects Silverman's rule.
  std::optional<double> nw_bandwidth = 2.0;
  double box = 60.0;
};

struct PathParams {
  int variant = 2;
  std::size_t readings = 10;
  double b = 150.0;
  double sigma1 = 4.0;
  double sigma2 = 5.0;
  double rho = -0.8;
  std::vector<Vec2> obstacles;
  bool use_corridor = true;
  /// Absent selects Silverman's rule for the local-quadratic boundaries.
  std::optional<double> corridor_bandwidth;
  bool estimate_covariance = false;
  std::size_t free_coeffs = 3;
  double theta_bound = 80.0;
  PathPenaltyConfig penalty;

  Mat2 covariance() const {
    Mat2 s;
    s << sigma1 * sigma1, rho * sigma1 * sigma2, rho * sigma1 * sigma2, sigma2 * sigma2;
    return s;
  }
};

struct ExperimentScenario {
  ScenarioKind kind = ScenarioKind::circles;
  std::uint64_t seed = 0;
  GaConfig ga;
  SmoothPenaltyParams penalty;  ///< circles and plane kinds
  CircleParams circles;
  PlaneParams plane;
  PathParams path;
};

// Stream identifiers under the scenario seed.
inline constexpr std::uint64_t kDataStream = 0xDA7A;
inline constexpr std::uint64_t kGaStream = 0x6A;

inline ExperimentScenario gen_circle_scenario(std::size_t m = 7, std::size_t n = 10, std::uint64_t seed = 0) {
  if (m == 0) throw std::invalid_argument("gen_circle_scenario: m must be positive");
  if (n < 2) throw std::invalid_argument("gen_circle_scenario: n must be at least 2");
  ExperimentScenario s;
  s.kind = ScenarioKind::circles;
  s.seed = seed;
  s.circles.m = m;
  s.circles.n = n;
  s.penalty = {7200.0, 0.05, 0.05, 10000.0};
  s.ga.population_size = 80;
  s.ga.generations = 100;
  s.ga.crossover_prob = 0.5;
  s.ga.mutation_prob = 0.025;
  return s;
}

inline ExperimentScenario gen_plane_scenario(std::size_t n1 = 30, std::size_t n2 = 100, std::uint64_t seed = 0) {
  if (n1 < 3) throw std::invalid_argument("gen_plane_scenario: n1 must be at least 3");
  if (n2 < 10) throw std::invalid_argument("gen_plane_scenario: n2 must be at least 10");
  ExperimentScenario s;
  s.kind = ScenarioKind::plane_division;
  s.seed = seed;
  s.plane.n1 = n1;
  s.plane.n2 = n2;
  s.penalty = {18000.0, 0.05, 0.30, 200.0};
  s.ga.population_size = 50;
  s.ga.generations = 100;
  s.ga.crossover_prob = 0.9;
  s.ga.mutation_prob = 0.075;
  return s;
}

/// True corridor boundaries (upper, lower) of a variant at abscissa x.
inline std::pair<double, double> true_corridor(int variant, double x) {
  switch (variant) {
    case 1:
      if (x < 30.0) return {20.0 + x, -20.0 + x};
      if (x < 100.0) return {80.0 - x, 40.0 - x};
      return {-120.0 + x, -160.0 + x};
    case 2: return {20.0 + 30.0 * std::sin(x / 45.0), -20.0 + 30.0 * std::sin(x / 45.0)};
    case 3: return {1.0 + 30.0 * std::cos(x / 25.0), -40.0 + 30.0 * std::cos(x / 25.0)};
    case 4: return {40.0 - 30.0 * std::sin(x / 30.0), -40.0 + 30.0 * std::sin(x / 30.0)};
    default: throw std::invalid_argument("path scenario: variant must be 1..4, got " + std::to_string(variant));
  }
}

/// Default obstacle layout: three obstacles at 0.3b, 0.5b, 0.7b, staggered
/// 6 units below, above and below the corridor centerline.
inline std::vector<Vec2> default_obstacle_layout(int variant, double b = 150.0) {
  std::vector<Vec2> out;
  const double xs[3] = {0.3 * b, 0.5 * b, 0.7 * b};
  const double offsets[3] = {-6.0, 6.0, -6.0};
  for (int i = 0; i < 3; ++i) {
    const auto [up, lo] = true_corridor(variant, xs[i]);
    out.emplace_back(xs[i], 0.5 * (up + lo) + offsets[i]);
  }
  return out;
}

inline ExperimentScenario gen_path_scenario(int variant = 2, std::size_t n_readings = 10, std::uint64_t seed = 0) {
  (void)true_corridor(variant, 0.0);
  if (n_readings < 1) throw std::invalid_argument("gen_path_scenario: need at least one reading");
  ExperimentScenario s;
  s.kind = ScenarioKind::path_planning;
  s.seed = seed;
  s.path.variant = variant;
  s.path.readings = n_readings;
  s.path.sigma2 = variant == 1 ? 6.0 : 5.0;
  s.path.obstacles = default_obstacle_layout(variant, s.path.b);
  s.ga.population_size = 60;
  s.ga.generations = 100;
  s.ga.crossover_prob = 0.8;
  s.ga.mutation_prob = 0.05;
  return s;
}

/// Checks the invariants of a scenario that was not built by a generator.
inline void validate_scenario(const ExperimentScenario& s) {
  s.ga.validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("scenario: " + what);
  };
  switch (s.kind) {
    case ScenarioKind::circles:
      s.penalty.validate();
      require(s.circles.m > 0, "circles.m must be positive");
      require(s.circles.n >= 2, "circles.n must be at least 2");
      require(s.circles.known_covariance || s.circles.n >= 3, "circles.n must be at least 3 when estimating covariance");
      require(s.circles.radius > 0.0, "circles.radius must be positive");
      require(s.circles.noise_sd > 0.0, "circles.noise_sd must be positive");
      require(s.circles.box > 0.0, "circles.box must be positive");
      break;
    case ScenarioKind::plane_division:
      s.penalty.validate();
      require(s.plane.n1 >= 3, "plane.n1 must be at least 3");
      require(s.plane.n2 >= 10, "plane.n2 must be at least 10");
      require(s.plane.sd1 >= 0.0 && s.plane.sd2 >= 0.0, "plane noise must be nonnegative");
      require(!s.plane.nw_bandwidth || *s.plane.nw_bandwidth > 0.0, "plane.nw_bandwidth must be positive");
      require(s.plane.box > 0.0, "plane.box must be positive");
      break;
    case ScenarioKind::path_planning:
      (void)true_corridor(s.path.variant, 0.0);
      s.path.penalty.validate();
      require(s.path.readings >= 1, "path.readings must be positive");
      require(!s.path.estimate_covariance || s.path.readings >= 3, "path.readings must be at least 3 when estimating covariance");
      require(s.path.b > 0.0, "path.b must be positive");
      require(s.path.sigma1 > 0.0 && s.path.sigma2 > 0.0, "path sigmas must be positive");
      require(s.path.rho > -1.0 && s.path.rho < 1.0, "path.rho must lie in (-1, 1)");
      require(s.path.free_coeffs >= 1, "path.free_coeffs must be positive");
      require(s.path.theta_bound > 0.0, "path.theta_bound must be positive");
      require(!s.path.corridor_bandwidth || *s.path.corridor_bandwidth > 0.0, "path.corridor_bandwidth must be positive");
      break;
  }
}

// ---------------------------------------------------------------------------
// Data sampling (pure in the scenario parameters and seed)

struct CircleData {
  std::vector<SampleCloud> clouds;
};

struct PlaneData {
  BoundarySample linear;
  BoundarySample nonlinear;
};

struct PathData {
  std::vector<SampleCloud> readings;
  std::vector<CorridorPieceData> corridor;
};

inline CircleData sample_circle_data(const ExperimentScenario& s) {
  Rng rng(derive_seed(s.seed, kDataStream));
  CircleData data;
  for (std::size_t k = 1; k <= s.circles.m; ++k) {
    const Vec2 mu = s.circles.center(k);
    SampleCloud cloud;
    for (std::size_t i = 0; i < s.circles.n; ++i) {
      const double a = rng.normal(mu.x(), s.circles.noise_sd);
      const double b = rng.normal(mu.y(), s.circles.noise_sd);
      cloud.points.emplace_back(a, b);
    }
    data.clouds.push_back(std::move(cloud));
  }
  return data;
}

inline PlaneData sample_plane_data(const ExperimentScenario& s) {
  Rng rng(derive_seed(s.seed, kDataStream));
  const auto& p = s.plane;
  PlaneData data;
  for (std::size_t i = 0; i < p.n1; ++i) {
    const double x = rng.uniform(-60.0, 60.0);
    const double e = p.noiseless ? 0.0 : rng.normal(0.0, p.sd1);
    data.linear.xs.push_back(x);
    data.linear.ys.push_back(x + 20.0 + e);
  }
  for (std::size_t i = 0; i < p.n2; ++i) {
    const double x = rng.uniform(-60.0, 60.0);
    const double e = p.noiseless ? 0.0 : rng.normal(0.0, p.sd2);
    data.nonlinear.xs.push_back(x);
    data.nonlinear.ys.push_back(x - 30.0 + 12.0 * std::sin(x / 5.0) + e);
  }
  return data;
}

inline PathData sample_path_data(const ExperimentScenario& s) {
  Rng rng(derive_seed(s.seed, kDataStream));
  const auto& p = s.path;
  PathData data;
  const Eigen::LLT<Mat2> llt(p.covariance());
  if (llt.info() != Eigen::Success) throw std::invalid_argument("path scenario: reading covariance is not SPD");
  const Mat2 chol = llt.matrixL();
  for (const auto& c : p.obstacles) {
    SampleCloud cloud;
    for (std::size_t i = 0; i < p.readings; ++i) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      cloud.points.push_back(c + chol * Vec2(z1, z2));
    }
    data.readings.push_back(std::move(cloud));
  }
  if (!p.use_corridor) return data;
  if (p.variant == 1) {
    // Six linear boundaries, 30 observations each, over three abscissa ranges.
    const double lo[3] = {0.0, 30.0, 100.0};
    const double hi[3] = {30.0, 100.0, 150.0};
    const double intercept[6] = {20.0, -20.0, 80.0, 40.0, -120.0, -160.0};
    const double slope[6] = {1.0, 1.0, -1.0, -1.0, 1.0, 1.0};
    const double sd[6] = {1.0, 1.0, 2.0, 2.0, 1.0, 1.0};
    BoundarySample bs[6];
    for (int j = 0; j < 6; ++j) {
      for (int i = 0; i < 30; ++i) bs[j].xs.push_back(rng.uniform(lo[j / 2], hi[j / 2]));
    }
    for (int j = 0; j < 6; ++j) {
      for (double x : bs[j].xs) bs[j].ys.push_back(intercept[j] + slope[j] * x + rng.normal(0.0, sd[j]));
    }
    for (int k = 0; k < 3; ++k) data.corridor.push_back({lo[k], hi[k], bs[2 * k], bs[2 * k + 1]});
    return data;
  }
  // 300 draws of X1, X2 ~ U(0, 150); the second-scenario lower boundary reuses X1.
  BoundarySample upper, lower;
  for (int i = 0; i < 300; ++i) upper.xs.push_back(rng.uniform(0.0, p.b));
  for (int i = 0; i < 300; ++i) lower.xs.push_back(rng.uniform(0.0, p.b));
  if (p.variant == 2) lower.xs = upper.xs;
  for (double x : upper.xs) upper.ys.push_back(true_corridor(p.variant, x).first + rng.normal());
  for (double x : lower.xs) lower.ys.push_back(true_corridor(p.variant, x).second + rng.normal());
  data.corridor.push_back({0.0, p.b, std::move(upper), std::move(lower)});
  return data;
}

// ---------------------------------------------------------------------------
// Assembled problems

/// Penalized circles objective: Rastrigin plus the smooth penalty over the
/// ellipse-based gamma of each cloud.
class CirclesProblem {
 public:
  CirclesProblem(const ExperimentScenario& s, const CircleData& data)
      : radius_(s.circles.effective_radius()), penalty_(s.penalty), box_(s.circles.box) {
    const Mat2 known = Mat2::Identity() * (s.circles.noise_sd * s.circles.noise_sd);
    for (const auto& cloud : data.clouds) {
      fits_.push_back(fit_gaussian_cloud(cloud, s.circles.known_covariance ? std::optional<Mat2>(known) : std::nullopt));
    }
  }

  Probability best_gamma(std::span<const double> x) const {
    const Vec2 p(x[0], x[1]);
    double best = 0.0;
    for (const auto& f : fits_) {
      best = std::max(best, gamma_circle(p, f, radius_));
      if (best >= 1.0) break;
    }
    return best;
  }

  double raw(std::span<const double> x) const { return rastrigin(x); }
  double penalty(std::span<const double> x) const { return penalty_.of_gamma(best_gamma(x)); }
  SearchBox box() const { return SearchBox::cube(2, -box_, box_); }
  const std::vector<GaussianCloudFit>& fits() const noexcept { return fits_; }

 private:
  std::vector<GaussianCloudFit> fits_;
  double radius_;
  SmoothPenalty penalty_;
  double box_;
};

/// Penalized plane-division objective: Schwefel plus the smooth penalty over
/// the regression-band gamma of the two half-planes.
class PlaneProblem {
 public:
  PlaneProblem(const ExperimentScenario& s, const PlaneData& data)
      : linear_(fit_linear_regression(data.linear.xs, data.linear.ys)),
        kernel_(data.nonlinear.xs, data.nonlinear.ys, s.plane.nw_bandwidth), penalty_(s.penalty), box_(s.plane.box) {}

  Probability best_gamma(std::span<const double> x) const {
    const Vec2 p(x[0], x[1]);
    const double g1 = gamma_linreg(p, linear_, FeasibleSide::above);
    if (g1 >= 1.0) return g1;
    double g2 = 0.0;
    try {
      g2 = gamma_nw(p, kernel_, FeasibleSide::below);
    } catch (const std::domain_error&) {
      g2 = 0.0;  // no data near x1: no evidence of feasibility
    }
    return std::max(g1, g2);
  }

  double raw(std::span<const double> x) const { return schwefel(x); }
  double penalty(std::span<const double> x) const { return penalty_.of_gamma(best_gamma(x)); }
  SearchBox box() const { return SearchBox::cube(2, -box_, box_); }
  const LinearFit& linear() const noexcept { return linear_; }
  const KernelFit& kernel() const noexcept { return kernel_; }

 private:
  LinearFit linear_;
  KernelFit kernel_;
  SmoothPenalty penalty_;
  double box_;
};

/// Assembles ellipses and corridor fits for a path scenario.
inline PathObjective build_path_objective(const ExperimentScenario& s, const PathData& data) {
  const auto& p = s.path;
  std::vector<ConfidenceEllipse> ellipses;
  for (const auto& cloud : data.readings) {
    Mat2 sigma = p.covariance();
    if (p.estimate_covariance) sigma = fit_gaussian_cloud(cloud).covariance;
    ellipses.push_back(ellipse_from_readings(cloud, sigma, p.penalty.gamma));
  }
  std::optional<Corridor> corridor;
  if (p.use_corridor) {
    corridor = fit_corridor(data.corridor, p.variant == 1 ? CorridorKind::linear : CorridorKind::local_quadratic,
                            p.corridor_bandwidth);
  }
  return PathObjective(build_basis(p.b, p.free_coeffs), std::move(ellipses), std::move(corridor), p.penalty);
}

// ---------------------------------------------------------------------------
// Experiments

struct EllipseDescriptor {
  Vec2 center = Vec2::Zero();
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double rotation = 0.0;
};

/// Plot-ready description of a planned path.
struct TrajectoryExport {
  std::vector<Vec2> samples;
  std::vector<double> theta;
  std::vector<double> knots;
  std::vector<EllipseDescriptor> ellipses;
  std::vector<Vec2> true_obstacles;
  double radius = 0.0;
  /// Rows (x, upper(x), lower(x)) of the fitted corridor on the sample grid.
  std::vector<std::array<double, 3>> corridor;
  ObjectiveBreakdown objective;
};

struct ExperimentReport {
  ScenarioKind kind = ScenarioKind::circles;
  std::uint64_t seed = 0;
  Candidate best_candidate;
  double best_objective = 0.0;  ///< raw objective f (path: arc length)
  double penalty = 0.0;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;
  double wall_seconds = 0.0;  ///< not serialized by default
  ExperimentScenario scenario;
  std::optional<TrajectoryExport> trajectory;
};

namespace detail {

inline GaConfig ga_for(const ExperimentScenario& s) {
  GaConfig cfg = s.ga;
  cfg.seed = derive_seed(s.seed, kGaStream);
  return cfg;
}

template <class Problem>
ExperimentReport run_point_problem(const ExperimentScenario& s, const Problem& problem) {
  Fitness fitness{2, [&problem](std::span<const double> x) { return -(problem.raw(x) + problem.penalty(x)); }};
  const GaResult ga = run_ga(fitness, problem.box(), ga_for(s));
  ExperimentReport r;
  r.best_candidate = ga.best_candidate;
  r.best_objective = problem.raw(ga.best_candidate);
  r.penalty = problem.penalty(ga.best_candidate);
  r.best_fitness = ga.best_fitness;
  r.history = ga.history;
  return r;
}

}  // namespace detail

inline TrajectoryExport export_trajectory(const PathObjective& objective, const PathPlan& plan,
                                          const ExperimentScenario& s) {
  TrajectoryExport out;
  out.samples = plan.samples;
  out.theta = plan.theta;
  out.knots = objective.basis().knots();
  for (const auto& e : objective.ellipses()) {
    out.ellipses.push_back({e.center(), e.semi_major(), e.semi_minor(), e.rotation()});
  }
  out.true_obstacles = s.path.obstacles;
  out.radius = s.path.penalty.radius;
  if (objective.corridor()) {
    for (double t : objective.sample_abscissae()) {
      out.corridor.push_back({t, objective.corridor()->upper_at(t), objective.corridor()->lower_at(t)});
    }
  }
  out.objective = plan.objective;
  return out;
}

inline PathPlan plan_path(const ExperimentScenario& s, PathObjective* assembled = nullptr) {
  if (s.kind != ScenarioKind::path_planning) throw std::invalid_argument("plan_path: not a path scenario");
  const PathObjective objective = build_path_objective(s, sample_path_data(s));
  PathPlan plan = plan_path(objective, detail::ga_for(s), s.path.theta_bound);
  if (assembled) *assembled = objective;
  return plan;
}

inline ExperimentReport run_experiment(const ExperimentScenario& s) {
  validate_scenario(s);
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport r;
  switch (s.kind) {
    case ScenarioKind::circles: {
      const CirclesProblem problem(s, sample_circle_data(s));
      r = detail::run_point_problem(s, problem);
      break;
    }
    case ScenarioKind::plane_division: {
      const PlaneProblem problem(s, sample_plane_data(s));
      r = detail::run_point_problem(s, problem);
      break;
    }
    case ScenarioKind::path_planning: {
      const PathObjective objective = build_path_objective(s, sample_path_data(s));
      const PathPlan plan = plan_path(objective, detail::ga_for(s), s.path.theta_bound);
      r.best_candidate = plan.theta;
      r.best_objective = plan.objective.arc_length;
      r.penalty = plan.objective.obstacle_penalty + plan.objective.corridor_penalty;
      r.best_fitness = plan.ga.best_fitness;
      r.history = plan.ga.history;
      r.trajectory = export_trajectory(objective, plan, s);
      break;
    }
  }
  r.kind = s.kind;
  r.seed = s.seed;
  r.scenario = s;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Seed of replicate i: the scenario seed itself for i = 0.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::size_t i) {
  return i == 0 ? seed : derive_seed(seed, 0x5EED0000ull + i);
}

struct ReplicatedReport {
  std::vector<ExperimentReport> runs;
  std::vector<GenerationRecord> mean_history;  ///< per-generation averages over runs
};

inline ReplicatedReport run_replicated(const ExperimentScenario& s, std::size_t n_runs, unsigned threads = 1) {
  if (n_runs == 0) throw std::invalid_argument("run_replicated: n_runs must be positive");
  ReplicatedReport out;
  out.runs.resize(n_runs);
  auto run_one = [&](std::size_t i) {
    ExperimentScenario si = s;
    si.seed = replicate_seed(s.seed, i);
    out.runs[i] = run_experiment(si);
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < n_runs; ++i) run_one(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_runs; i += threads) run_one(i);
      });
    }
  }
  const std::size_t gens = out.runs.front().history.size();
  out.mean_history.assign(gens, {});
  for (const auto& r : out.runs) {
    for (std::size_t g = 0; g < gens; ++g) {
      out.mean_history[g].best += r.history[g].best / static_cast<double>(n_runs);
      out.mean_history[g].mean += r.history[g].mean / static_cast<double>(n_runs);
    }
  }
  return out;
}

}  // namespace sfga
