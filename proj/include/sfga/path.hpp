#pragma once

// Shortest smooth path from (0, 0) to (b, 0) that keeps clear of noisy
// obstacles and inside a data-estimated corridor.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sfga/bspline.hpp"
#include "sfga/feasibility.hpp"
#include "sfga/ga.hpp"
#include "sfga/geometry.hpp"
#include "sfga/penalty.hpp"

namespace sfga {

inline constexpr std::size_t kGraphSamples = 400;
inline constexpr std::size_t kArcPanels = 200;

/// M uniform abscissae t_i = b i / (M - 1), i = 0..M-1.
inline std::vector<double> graph_abscissae(double b, std::size_t count = kGraphSamples) {
  if (count < 2) throw std::invalid_argument("graph_abscissae: need at least two samples");
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = b * static_cast<double>(i) / static_cast<double>(count - 1);
  t.back() = b;
  return t;
}

namespace detail {

// Running minimum of point-to-ellipse distances, skipping ellipses whose
// circumscribed circle is already farther than the current best.
inline double min_distance_to_ellipses(const Vec2& p, std::span<const ConfidenceEllipse> ellipses, double best) {
  for (const auto& e : ellipses) {
    const double lower_bound = (p - e.center()).norm() - e.semi_major();
    if (lower_bound >= best) continue;
    best = std::min(best, dist_point_ellipse(p, e));
    if (best == 0.0) break;
  }
  return best;
}

}  // namespace detail

/// min over graph samples (t_i, f(t_i)) and ellipses of the point-to-ellipse distance.
inline double dist_graph_to_set(const Trajectory& traj, std::span<const ConfidenceEllipse> ellipses,
                                std::size_t samples = kGraphSamples) {
  if (ellipses.empty()) throw std::invalid_argument("dist_graph_to_set: no ellipses");
  double best = std::numeric_limits<double>::infinity();
  for (double t : graph_abscissae(traj.basis().b(), samples)) {
    best = detail::min_distance_to_ellipses(Vec2(t, traj.eval(t)), ellipses, best);
    if (best == 0.0) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Corridor

enum class CorridorKind { linear, local_quadratic };

/// Observations of one boundary curve.
struct BoundarySample {
  std::vector<double> xs;
  std::vector<double> ys;
};

/// Two boundary samples covering the abscissa range [x_lo, x_hi].
struct CorridorPieceData {
  double x_lo = 0.0;
  double x_hi = 0.0;
  BoundarySample first;
  BoundarySample second;
};

struct CorridorSegment {
  double x_lo = 0.0;
  double x_hi = 0.0;
  RegressionFit upper;  ///< feasible below
  RegressionFit lower;  ///< feasible above
};

struct Corridor {
  std::vector<CorridorSegment> segments;

  /// Segment whose range contains x; ties at a junction go to the later one.
  const CorridorSegment& segment_for(double x) const {
    if (segments.empty()) throw std::logic_error("Corridor: no segments");
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
      if (x >= it->x_lo) return *it;
    }
    return segments.front();
  }

  double upper_at(double x) const { return predict(segment_for(x).upper, x); }
  double lower_at(double x) const { return predict(segment_for(x).lower, x); }

  /// Probability that (x, y) lies inside: the smaller of the two band probabilities.
  Probability gamma(const Vec2& p) const {
    const auto& seg = segment_for(p.x());
    return std::min(gamma_band(p, seg.upper, FeasibleSide::below), gamma_band(p, seg.lower, FeasibleSide::above));
  }
};

namespace detail {

inline RegressionFit fit_boundary(const BoundarySample& s, CorridorKind kind, std::optional<double> bandwidth) {
  if (s.xs.size() < 10) throw std::invalid_argument("fit_corridor: each boundary needs at least 10 observations");
  if (kind == CorridorKind::linear) return fit_linear_regression(s.xs, s.ys);
  return LocalQuadraticFit(s.xs, s.ys, bandwidth);
}

}  // namespace detail

inline Corridor fit_corridor(std::span<const CorridorPieceData> pieces, CorridorKind kind,
                             std::optional<double> bandwidth = {}) {
  if (pieces.empty()) throw std::invalid_argument("fit_corridor: no boundary data");
  Corridor corridor;
  for (const auto& piece : pieces) {
    if (!(piece.x_lo < piece.x_hi)) throw std::invalid_argument("fit_corridor: empty piece range");
    RegressionFit a = detail::fit_boundary(piece.first, kind, bandwidth);
    RegressionFit b = detail::fit_boundary(piece.second, kind, bandwidth);
    constexpr int grid = 50;
    int a_above = 0;
    for (int i = 0; i <= grid; ++i) {
      const double x = piece.x_lo + (piece.x_hi - piece.x_lo) * i / grid;
      if (predict(a, x) > predict(b, x)) ++a_above;
    }
    if (a_above != 0 && a_above != grid + 1) throw std::runtime_error("fit_corridor: degenerate corridor (boundaries cross)");
    if (a_above == 0) std::swap(a, b);
    corridor.segments.push_back({piece.x_lo, piece.x_hi, std::move(a), std::move(b)});
  }
  std::sort(corridor.segments.begin(), corridor.segments.end(),
            [](const auto& l, const auto& r) { return l.x_lo < r.x_lo; });
  return corridor;
}

// ---------------------------------------------------------------------------
// Objective

struct PathPenaltyConfig {
  double psi = 50.0;
  double alpha = 0.01;
  double H = 200.0;
  double radius = 4.0;
  /// Level of the obstacle confidence ellipses.
  double gamma = 0.05;
  /// alpha_tilde of the corridor term psi Phi(Z_alpha + sqrt(H)(alpha_tilde - gamma_corr)).
  double corridor_alpha_tilde = 0.95;

  void validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("PathPenaltyConfig: radius must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("PathPenaltyConfig: gamma outside (0,1)");
    obstacle_params().validate();
    corridor_params().validate();
  }
  SmoothPenaltyParams obstacle_params() const { return {psi, alpha, gamma, H}; }
  SmoothPenaltyParams corridor_params() const { return {psi, alpha, corridor_alpha_tilde, H}; }
};

struct ObjectiveBreakdown {
  double arc_length = 0.0;
  double obstacle_penalty = 0.0;
  double corridor_penalty = 0.0;
  /// Distance from the sampled graph to the union of ellipses (+inf without obstacles).
  double obstacle_distance = std::numeric_limits<double>::infinity();
  /// Smallest corridor band probability over the graph samples (1 without corridor).
  double corridor_gamma = 1.0;
  double total() const noexcept { return arc_length + obstacle_penalty + corridor_penalty; }
};

/// Q(theta) = arc length + psi Phi(Z_alpha + sqrt(H)(r - d(graph, F))) + corridor term,
/// with every fit and basis table assembled once up front.
class PathObjective {
 public:
  PathObjective(BSplineBasis basis, std::vector<ConfidenceEllipse> ellipses, std::optional<Corridor> corridor,
                const PathPenaltyConfig& config)
      : basis_(std::move(basis)), ellipses_(std::move(ellipses)), corridor_(std::move(corridor)),
        config_((config.validate(), config)), obstacle_penalty_(config.obstacle_params()),
        corridor_penalty_(config.corridor_params()) {
    sample_t_ = graph_abscissae(basis_.b());
    sample_rows_.reserve(sample_t_.size());
    for (double t : sample_t_) sample_rows_.push_back(basis_.values(t));
    const double h = basis_.b() / static_cast<double>(kArcPanels);
    for (std::size_t i = 0; i <= kArcPanels; ++i) {
      const double t = std::min(basis_.b(), h * static_cast<double>(i));
      simpson_rows_.push_back(basis_.derivatives(t));
    }
    if (corridor_) {
      for (double t : sample_t_) {
        const auto& seg = corridor_->segment_for(t);
        const auto index = static_cast<std::size_t>(&seg - corridor_->segments.data());
        bands_.push_back({predict(seg.upper, t), mean_se(seg.upper, t), predict(seg.lower, t),
                          mean_se(seg.lower, t), index});
      }
    }
  }

  const BSplineBasis& basis() const noexcept { return basis_; }
  const std::vector<ConfidenceEllipse>& ellipses() const noexcept { return ellipses_; }
  const std::optional<Corridor>& corridor() const noexcept { return corridor_; }
  const PathPenaltyConfig& config() const noexcept { return config_; }
  const std::vector<double>& sample_abscissae() const noexcept { return sample_t_; }
  std::size_t dim() const noexcept { return basis_.free_count(); }

  ObjectiveBreakdown breakdown(std::span<const double> theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("objective_Q: theta has the wrong dimension");
    ObjectiveBreakdown out;

    const double h = basis_.b() / static_cast<double>(kArcPanels);
    double sum = 0.0;
    for (std::size_t i = 0; i <= kArcPanels; ++i) {
      const double d = dot_free(simpson_rows_[i], theta);
      const double w = (i == 0 || i == kArcPanels) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      sum += w * std::sqrt(1.0 + d * d);
    }
    out.arc_length = sum * h / 3.0;

    double dist = std::numeric_limits<double>::infinity();
    double gamma_corr = 1.0;
    for (std::size_t i = 0; i < sample_t_.size(); ++i) {
      const double y = dot_free(sample_rows_[i], theta);
      if (!ellipses_.empty() && dist > 0.0) {
        dist = detail::min_distance_to_ellipses(Vec2(sample_t_[i], y), ellipses_, dist);
      }
      if (corridor_) gamma_corr = std::min(gamma_corr, band_gamma_at(i, y));
    }
    if (!ellipses_.empty()) {
      out.obstacle_distance = dist;
      out.obstacle_penalty = obstacle_penalty_.term(config_.radius - dist);
    }
    if (corridor_) {
      out.corridor_gamma = gamma_corr;
      out.corridor_penalty = corridor_penalty_.of_gamma(gamma_corr);
    }
    return out;
  }

  double operator()(std::span<const double> theta) const { return breakdown(theta).total(); }

 private:
  struct Band {
    double upper, upper_se, lower, lower_se;
    std::size_t segment;
  };

  // sum_j coeff_j B_j over the free coefficients; the pinned ends are zero.
  static double dot_free(const std::vector<double>& row, std::span<const double> theta) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) s += row[j + 1] * theta[j];
    return s;
  }

  Probability band_gamma_at(std::size_t i, double y) const {
    const Band& b = bands_[i];
    const CorridorSegment& seg = corridor_->segments[b.segment];
    double g = 1.0;
    if (y > b.upper) g = std::min(g, band_gamma(seg.upper, y - b.upper, b.upper_se));
    if (y < b.lower) g = std::min(g, band_gamma(seg.lower, y - b.lower, b.lower_se));
    return g;
  }

  BSplineBasis basis_;
  std::vector<ConfidenceEllipse> ellipses_;
  std::optional<Corridor> corridor_;
  PathPenaltyConfig config_;
  SmoothPenalty obstacle_penalty_;
  SmoothPenalty corridor_penalty_;
  std::vector<double> sample_t_;
  std::vector<std::vector<double>> sample_rows_;
  std::vector<std::vector<double>> simpson_rows_;
  std::vector<Band> bands_;
};

inline double objective_Q(std::span<const double> theta, const PathObjective& objective) { return objective(theta); }

struct PathPlan {
  GaResult ga;
  std::vector<double> theta;
  ObjectiveBreakdown objective;
  std::vector<Vec2> samples;  ///< (t_i, f(t_i)) on the graph grid
};

/// Minimizes Q over theta in [-theta_bound, theta_bound]^L with the GA.
inline PathPlan plan_path(const PathObjective& objective, const GaConfig& ga, double theta_bound = 80.0) {
  if (!(theta_bound > 0.0)) throw std::invalid_argument("plan_path: theta_bound must be positive");
  const SearchBox box = SearchBox::cube(objective.dim(), -theta_bound, theta_bound);
  Fitness fitness{objective.dim(), [&objective](std::span<const double> theta) { return -objective(theta); }};
  PathPlan plan;
  plan.ga = run_ga(fitness, box, ga);
  plan.theta = plan.ga.best_candidate;
  plan.objective = objective.breakdown(plan.theta);
  const Trajectory traj(objective.basis(), plan.theta);
  for (double t : objective.sample_abscissae()) plan.samples.emplace_back(t, traj.eval(t));
  return plan;
}

}  // namespace sfga
