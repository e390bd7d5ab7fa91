#pragma once

// Planar geometry for confidence ellipses: construction from readings and
// Euclidean distance from a point to a filled ellipse.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sfga/stat.hpp"

namespace sfga {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Observations X_1..X_n of one noisy location.
struct SampleCloud {
  std::vector<Vec2> points;
  std::size_t size() const noexcept { return points.size(); }
};

inline Vec2 sample_mean(const SampleCloud& cloud) {
  if (cloud.points.empty()) throw std::invalid_argument("sample_mean: empty cloud");
  Vec2 sum = Vec2::Zero();
  for (const auto& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

/// Eigen-decomposition of a symmetric 2x2 matrix in closed form.
struct SymEigen2 {
  double large = 0.0;  ///< larger eigenvalue
  double small = 0.0;  ///< smaller eigenvalue
  double angle = 0.0;  ///< direction of the eigenvector of `large`, radians
};

inline SymEigen2 sym_eigen2(const Mat2& m) {
  const double a = m(0, 0);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double c = m(1, 1);
  const double mid = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  return {mid + rad, mid - rad, 0.5 * std::atan2(2.0 * b, a - c)};
}

inline bool is_spd(const Mat2& m) {
  if (!m.allFinite()) return false;
  if (std::fabs(m(0, 1) - m(1, 0)) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

/// Filled ellipse {y : (y - center)^T shape (y - center) <= threshold}.
class ConfidenceEllipse {
 public:
  ConfidenceEllipse(Vec2 center, const Mat2& shape, double threshold)
      : center_(std::move(center)), shape_(shape), threshold_(threshold) {
    if (!is_spd(shape_)) throw std::invalid_argument("ConfidenceEllipse: shape matrix must be SPD");
    if (!(threshold_ >= 0.0) || !std::isfinite(threshold_)) {
      throw std::invalid_argument("ConfidenceEllipse: threshold must be finite and nonnegative");
    }
    const SymEigen2 eig = sym_eigen2(shape_);
    // The smallest curvature of the quadratic form is the major axis.
    semi_major_ = std::sqrt(threshold_ / eig.small);
    semi_minor_ = std::sqrt(threshold_ / eig.large);
    rotation_ = eig.angle + 0.5 * std::numbers::pi;
    if (rotation_ > 0.5 * std::numbers::pi) rotation_ -= std::numbers::pi;
    cos_ = std::cos(rotation_);
    sin_ = std::sin(rotation_);
  }

  const Vec2& center() const noexcept { return center_; }
  const Mat2& shape() const noexcept { return shape_; }
  double threshold() const noexcept { return threshold_; }
  double semi_major() const noexcept { return semi_major_; }
  double semi_minor() const noexcept { return semi_minor_; }
  /// Angle of the major axis from the x axis, in (-pi/2, pi/2].
  double rotation() const noexcept { return rotation_; }
  double area() const noexcept { return std::numbers::pi * semi_major_ * semi_minor_; }

  bool contains(const Vec2& p) const noexcept {
    const Vec2 d = p - center_;
    return d.dot(shape_ * d) <= threshold_;
  }

  /// p expressed in the principal frame: x along the major axis.
  Vec2 to_local(const Vec2& p) const noexcept {
    const Vec2 d = p - center_;
    return {cos_ * d.x() + sin_ * d.y(), -sin_ * d.x() + cos_ * d.y()};
  }

  Vec2 boundary_point(double phi) const noexcept {
    const double u = semi_major_ * std::cos(phi);
    const double v = semi_minor_ * std::sin(phi);
    return center_ + Vec2(cos_ * u - sin_ * v, sin_ * u + cos_ * v);
  }

 private:
  Vec2 center_;
  Mat2 shape_;
  double threshold_;
  double semi_major_ = 0.0;
  double semi_minor_ = 0.0;
  double rotation_ = 0.0;
  double cos_ = 1.0;
  double sin_ = 0.0;
};

/// 100(1-gamma)% ellipse n (center - y)^T Sigma^{-1} (center - y) <= chi2_2 upper-gamma quantile
/// around the mean of the readings.
inline ConfidenceEllipse ellipse_from_readings(const SampleCloud& cloud, const Mat2& sigma, Probability gamma) {
  if (cloud.size() < 1) throw std::invalid_argument("ellipse_from_readings: no readings");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ellipse_from_readings: gamma outside (0,1)");
  if (!is_spd(sigma)) throw std::invalid_argument("ellipse_from_readings: covariance must be SPD");
  const Mat2 shape = static_cast<double>(cloud.size()) * sigma.inverse();
  return ConfidenceEllipse(sample_mean(cloud), shape, stat::chisq2_quantile(1.0 - gamma));
}

namespace detail {

// Root of (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 = 1 by bisection
// (Eberly, "Distance from a point to an ellipse").
inline double ellipse_projection_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : std::hypot(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < 2200; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

// Distance from (y0, y1), y0, y1 >= 0, to the ellipse boundary with semi-axes e0 >= e1 > 0,
// for points outside the ellipse.
inline double outside_distance_first_quadrant(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g <= 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = ellipse_projection_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0);
      const double x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::max(0.0, y1 - e1);
  }
  return std::max(0.0, y0 - e0);
}

}  // namespace detail

/// Distance from p to the boundary by sampling `count` boundary points; zero
/// inside the ellipse.
inline double dist_point_ellipse_sampled(const Vec2& p, const ConfidenceEllipse& e, int count = 4096) {
  if (e.contains(p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / count;
    best = std::min(best, (e.boundary_point(phi) - p).norm());
  }
  return best;
}

/// Euclidean distance from p to the filled ellipse (zero inside).
inline double dist_point_ellipse(const Vec2& p, const ConfidenceEllipse& e) {
  if (e.threshold() == 0.0) return (p - e.center()).norm();
  const Vec2 q = e.to_local(p);
  const double y0 = std::fabs(q.x());
  const double y1 = std::fabs(q.y());
  const double e0 = e.semi_major();
  const double e1 = e.semi_minor();
  if ((y0 / e0) * (y0 / e0) + (y1 / e1) * (y1 / e1) <= 1.0) return 0.0;
  const double d = detail::outside_distance_first_quadrant(e0, e1, y0, y1);
  if (!std::isfinite(d)) return dist_point_ellipse_sampled(p, e);
  return d;
}

}  // namespace sfga
