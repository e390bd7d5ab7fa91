#pragma once

// Penalty functions for feasibility regions written as unions of constraint
// groups, and the smooth penalty driven by feasibility probabilities.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sfga/stat.hpp"

namespace sfga {

using ConstraintFn = std::function<double(std::span<const double>)>;

/// g(x) <= 0 is satisfied; the violation max(0, g)^exponent is scaled by weight.
struct WeightedConstraint {
  ConstraintFn fn;
  double weight = 1.0;
};

/// One feasible set F_k = {x : g_i(x) <= 0 for all i}.
struct InequalityGroup {
  std::vector<WeightedConstraint> constraints;
  double exponent = 1.0;
};

/// One feasible set {x : h_i(x) = 0 for all i}.
struct EqualityGroup {
  std::vector<WeightedConstraint> constraints;
  double exponent = 1.0;
};

namespace detail {

template <class Group>
void check_group(const Group& group) {
  if (group.constraints.empty()) throw std::invalid_argument("penalty: empty constraint group");
  if (!(group.exponent >= 1.0)) throw std::invalid_argument("penalty: group exponent must be >= 1");
  for (const auto& c : group.constraints) {
    if (!(c.weight > 0.0)) throw std::invalid_argument("penalty: constraint weights must be positive");
  }
}

}  // namespace detail

/// Weighted violation sum of one inequality group; zero iff every g_i(x) <= 0.
inline double group_violation(std::span<const double> x, const InequalityGroup& group) {
  detail::check_group(group);
  double sum = 0.0;
  for (const auto& c : group.constraints) {
    const double v = std::max(0.0, c.fn(x));
    if (v > 0.0) sum += c.weight * std::pow(v, group.exponent);
  }
  return sum;
}

/// Weighted residual sum of one equality group; zero iff every h_i(x) = 0.
inline double group_violation(std::span<const double> x, const EqualityGroup& group) {
  detail::check_group(group);
  double sum = 0.0;
  for (const auto& c : group.constraints) {
    const double v = std::fabs(c.fn(x));
    if (v > 0.0) sum += c.weight * std::pow(v, group.exponent);
  }
  return sum;
}

/// Classic penalty: sum_i r_i max(0, g_i)^alpha + sum_j c_j |h_j|^beta.
inline double crisp_penalty(std::span<const double> x, std::span<const WeightedConstraint> inequalities,
                            std::span<const WeightedConstraint> equalities, double alpha_exp = 1.0,
                            double beta_exp = 1.0) {
  double sum = 0.0;
  if (!inequalities.empty()) {
    sum += group_violation(x, InequalityGroup{{inequalities.begin(), inequalities.end()}, alpha_exp});
  }
  if (!equalities.empty()) {
    sum += group_violation(x, EqualityGroup{{equalities.begin(), equalities.end()}, beta_exp});
  }
  return sum;
}

/// Minimum group violation over the inequality family plus minimum over the
/// equality family. An empty family contributes nothing.
inline double union_min_penalty(std::span<const double> x, std::span<const InequalityGroup> ineq_groups,
                                std::span<const EqualityGroup> eq_groups = {}) {
  double total = 0.0;
  if (!ineq_groups.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : ineq_groups) {
      best = std::min(best, group_violation(x, g));
      if (best == 0.0) break;
    }
    total += best;
  }
  if (!eq_groups.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : eq_groups) {
      best = std::min(best, group_violation(x, g));
      if (best == 0.0) break;
    }
    total += best;
  }
  return total;
}

/// Full violation sum over all groups, gated by the indicator that every
/// group is violated.
inline double union_indicator_penalty(std::span<const double> x, std::span<const InequalityGroup> ineq_groups) {
  if (ineq_groups.empty()) throw std::invalid_argument("union_indicator_penalty: no groups");
  double sum = 0.0;
  for (const auto& g : ineq_groups) {
    const double v = group_violation(x, g);
    if (v == 0.0) return 0.0;
    sum += v;
  }
  return sum;
}

/// Parameters of psi * Phi(Z_alpha + sqrt(H) * u).
struct SmoothPenaltyParams {
  double psi = 1.0;          ///< penalty ceiling
  double alpha = 0.05;       ///< quantile level of the offset Z_alpha
  double alpha_tilde = 0.05; ///< significance level compared with gamma
  double H = 1.0;            ///< squared slope

  void validate() const {
    if (!(psi > 0.0)) throw std::invalid_argument("SmoothPenaltyParams: psi must be positive");
    if (!(H > 0.0)) throw std::invalid_argument("SmoothPenaltyParams: H must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("SmoothPenaltyParams: alpha outside (0,1)");
    if (!(alpha_tilde > 0.0 && alpha_tilde < 1.0)) {
      throw std::invalid_argument("SmoothPenaltyParams: alpha_tilde outside (0,1)");
    }
  }
};

/// Precomputed smooth penalty. Z_alpha is the lower alpha-quantile of the
/// standard normal, so the value at gamma = alpha_tilde is psi * alpha.
class SmoothPenalty {
 public:
  explicit SmoothPenalty(const SmoothPenaltyParams& params)
      : params_(params), z_alpha_((params.validate(), stat::norm_quantile(params.alpha))),
        sqrt_h_(std::sqrt(params.H)) {}

  const SmoothPenaltyParams& params() const noexcept { return params_; }
  double z_alpha() const noexcept { return z_alpha_; }

  /// psi * Phi(Z_alpha + sqrt(H) * u) for a generic shortfall u.
  double term(double u) const noexcept { return params_.psi * stat::norm_cdf(z_alpha_ + sqrt_h_ * u); }

  /// Penalty of a single region with feasibility probability gamma.
  double of_gamma(Probability gamma) const noexcept { return term(params_.alpha_tilde - gamma); }

  /// min_k psi * Phi(Z_alpha + sqrt(H) (alpha_tilde - gamma_k)).
  double operator()(std::span<const Probability> gammas) const {
    if (gammas.empty()) throw std::invalid_argument("smooth_gamma_penalty: no feasibility regions");
    double best = -std::numeric_limits<double>::infinity();
    for (double g : gammas) {
      if (!(g >= 0.0 && g <= 1.0)) throw std::domain_error("smooth_gamma_penalty: gamma outside [0,1]");
      best = std::max(best, g);
    }
    // The map is decreasing in gamma, so the minimum sits at the largest gamma.
    return of_gamma(best);
  }

 private:
  SmoothPenaltyParams params_;
  double z_alpha_;
  double sqrt_h_;
};

inline double smooth_gamma_penalty(std::span<const Probability> gammas, const SmoothPenaltyParams& params) {
  return SmoothPenalty(params)(gammas);
}

}  // namespace sfga
