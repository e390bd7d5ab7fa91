#pragma once

// Clamped B-spline trajectories y = f(x) on [0, b] with both endpoints pinned to 0.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfga {

class BSplineBasis {
 public:
  /// Clamped basis on [0, b] with L free coefficients and L + 2 functions in
  /// total. The degree is cubic whenever L + 2 >= 4, quadratic for L = 1.
  BSplineBasis(double b, std::size_t free_count) : b_(b), free_(free_count) {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("build_basis: b must be positive");
    if (free_count == 0) throw std::invalid_argument("build_basis: need at least one free coefficient");
    const std::size_t total = free_count + 2;
    degree_ = std::min<std::size_t>(3, total - 1);
    const std::size_t interior = total - degree_ - 1;
    knots_.assign(degree_ + 1, 0.0);
    for (std::size_t i = 1; i <= interior; ++i) {
      knots_.push_back(b * static_cast<double>(i) / static_cast<double>(interior + 1));
    }
    knots_.insert(knots_.end(), degree_ + 1, b);
  }

  double b() const noexcept { return b_; }
  std::size_t degree() const noexcept { return degree_; }
  std::size_t free_count() const noexcept { return free_; }
  std::size_t total_count() const noexcept { return free_ + 2; }
  const std::vector<double>& knots() const noexcept { return knots_; }

  std::vector<double> interior_knots() const {
    return {knots_.begin() + static_cast<std::ptrdiff_t>(degree_ + 1),
            knots_.end() - static_cast<std::ptrdiff_t>(degree_ + 1)};
  }

  void check_domain(double t) const {
    if (!(t >= 0.0 && t <= b_)) {
      throw std::out_of_range("B-spline: t = " + std::to_string(t) + " outside [0, " + std::to_string(b_) + "]");
    }
  }

  /// Knot span s with knots[s] <= t < knots[s+1]; t = b maps to the last non-empty span.
  std::size_t find_span(double t) const {
    check_domain(t);
    const std::size_t last = total_count() - 1;
    if (t >= knots_[last + 1]) return last;
    const auto it = std::upper_bound(knots_.begin() + static_cast<std::ptrdiff_t>(degree_),
                                     knots_.begin() + static_cast<std::ptrdiff_t>(last + 1), t);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
  }

  /// All L + 2 basis values B_j(t), by the Cox-de Boor recursion.
  std::vector<double> values(double t) const { return row(t, degree_); }

  /// All L + 2 first derivatives B'_j(t).
  std::vector<double> derivatives(double t) const {
    const std::size_t n = total_count();
    std::vector<double> d(n, 0.0);
    if (degree_ == 0) return d;
    const auto lower = row(t, degree_ - 1);  // n + 1 entries
    const double p = static_cast<double>(degree_);
    for (std::size_t j = 0; j < n; ++j) {
      const double d0 = knots_[j + degree_] - knots_[j];
      const double d1 = knots_[j + degree_ + 1] - knots_[j + 1];
      double v = 0.0;
      if (d0 > 0.0) v += lower[j] / d0;
      if (d1 > 0.0) v -= lower[j + 1] / d1;
      d[j] = p * v;
    }
    return d;
  }

 private:
  // Values of the degree-q functions on the same knot vector, knots.size() - q - 1 entries.
  std::vector<double> row(double t, std::size_t q) const {
    const std::size_t span = find_span(t);
    const std::size_t m = knots_.size() - 1;
    std::vector<double> n(m, 0.0);
    n[span] = 1.0;
    for (std::size_t k = 1; k <= q; ++k) {
      for (std::size_t j = 0; j + k < m; ++j) {
        double v = 0.0;
        const double d0 = knots_[j + k] - knots_[j];
        const double d1 = knots_[j + k + 1] - knots_[j + 1];
        if (d0 > 0.0) v += (t - knots_[j]) / d0 * n[j];
        if (d1 > 0.0) v += (knots_[j + k + 1] - t) / d1 * n[j + 1];
        n[j] = v;
      }
    }
    n.resize(knots_.size() - q - 1);
    return n;
  }

  double b_;
  std::size_t free_;
  std::size_t degree_ = 3;
  std::vector<double> knots_;
};

inline BSplineBasis build_basis(double b, std::size_t free_count) { return BSplineBasis(b, free_count); }

namespace detail {

// de Boor's algorithm on control points c for the span containing t.
inline double de_boor(const std::vector<double>& knots, std::span<const double> c, std::size_t degree,
                      std::size_t span, double t) {
  std::vector<double> d(degree + 1);
  for (std::size_t j = 0; j <= degree; ++j) d[j] = c[span - degree + j];
  for (std::size_t r = 1; r <= degree; ++r) {
    for (std::size_t j = degree; j >= r; --j) {
      const std::size_t i = span - degree + j;
      const double denom = knots[i + degree + 1 - r] - knots[i];
      const double a = denom > 0.0 ? (t - knots[i]) / denom : 0.0;
      d[j] = (1.0 - a) * d[j - 1] + a * d[j];
    }
  }
  return d[degree];
}

}  // namespace detail

/// f(t) = sum_j c_j B_j(t) with c = (0, theta_1, ..., theta_L, 0).
class Trajectory {
 public:
  Trajectory(BSplineBasis basis, std::vector<double> theta) : basis_(std::move(basis)), theta_(std::move(theta)) {
    if (theta_.size() != basis_.free_count()) {
      throw std::invalid_argument("Trajectory: expected " + std::to_string(basis_.free_count()) +
                                  " coefficients, got " + std::to_string(theta_.size()));
    }
    coeffs_.reserve(theta_.size() + 2);
    coeffs_.push_back(0.0);
    coeffs_.insert(coeffs_.end(), theta_.begin(), theta_.end());
    coeffs_.push_back(0.0);
  }

  const BSplineBasis& basis() const noexcept { return basis_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  /// Full coefficient vector including the pinned zeros.
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  double eval(double t) const {
    const std::size_t span = basis_.find_span(t);
    return detail::de_boor(basis_.knots(), coeffs_, basis_.degree(), span, t);
  }

  /// f'(t), evaluated as a degree p-1 spline on the derivative control points.
  double deriv(double t) const {
    const std::size_t p = basis_.degree();
    const std::size_t span = basis_.find_span(t);
    const auto& u = basis_.knots();
    std::vector<double> q(coeffs_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < coeffs_.size(); ++i) {
      const double denom = u[i + p + 1] - u[i + 1];
      q[i + 1] = denom > 0.0 ? static_cast<double>(p) * (coeffs_[i + 1] - coeffs_[i]) / denom : 0.0;
    }
    // The derivative spline has degree p-1 on the knot vector with the outer
    // knots removed; shifting the control points by one keeps the span index.
    return detail::de_boor(u, q, p - 1, span, t);
  }

 private:
  BSplineBasis basis_;
  std::vector<double> theta_;
  std::vector<double> coeffs_;
};

inline double eval_traj(const Trajectory& traj, double t) { return traj.eval(t); }
inline double deriv_traj(const Trajectory& traj, double t) { return traj.deriv(t); }

/// Arc length of the graph of f over [0, b] by composite Simpson.
inline double arc_length(const Trajectory& traj, std::size_t panels = 200) {
  if (panels == 0 || panels % 2 != 0) throw std::invalid_argument("arc_length: panels must be positive and even");
  const double b = traj.basis().b();
  const double h = b / static_cast<double>(panels);
  auto integrand = [&](double t) {
    const double d = traj.deriv(t);
    return std::sqrt(1.0 + d * d);
  };
  double sum = integrand(0.0) + integrand(b);
  for (std::size_t i = 1; i < panels; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * integrand(std::min(b, h * static_cast<double>(i)));
  }
  return sum * h / 3.0;
}

}  // namespace sfga
