#pragma once

// Estimators of the probability gamma(x) that a candidate point is feasible,
// built from noisy observations of the feasible set: Gaussian-cloud
// confidence ellipses, linear-regression t bands, and kernel-regression
// normal bands.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "sfga/geometry.hpp"
#include "sfga/stat.hpp"

namespace sfga {

// ---------------------------------------------------------------------------
// Gaussian clouds

struct GaussianCloudFit {
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
  std::size_t n = 0;

  /// Confidence ellipse at chi-square threshold `threshold` around the mean.
  ConfidenceEllipse ellipse(double threshold) const {
    return ConfidenceEllipse(mean, static_cast<double>(n) * covariance.inverse(), threshold);
  }
};

inline GaussianCloudFit fit_gaussian_cloud(const SampleCloud& cloud, const std::optional<Mat2>& known_covariance = {}) {
  const std::size_t n = cloud.size();
  if (n < 2) throw std::invalid_argument("fit_gaussian_cloud: need at least 2 observations");
  GaussianCloudFit fit;
  fit.n = n;
  fit.mean = sample_mean(cloud);
  if (known_covariance) {
    if (!is_spd(*known_covariance)) throw std::invalid_argument("fit_gaussian_cloud: known covariance is not SPD");
    fit.covariance = *known_covariance;
    return fit;
  }
  if (n < 3) throw std::invalid_argument("fit_gaussian_cloud: estimating a covariance needs at least 3 observations");
  Mat2 s = Mat2::Zero();
  for (const auto& p : cloud.points) {
    const Vec2 d = p - fit.mean;
    s += d * d.transpose();
  }
  s /= static_cast<double>(n - 1);
  if (!is_spd(s) || s.determinant() <= 1e-12 * s.trace() * s.trace()) {
    throw std::runtime_error("fit_gaussian_cloud: sample covariance is singular; supply known_covariance");
  }
  fit.covariance = s;
  return fit;
}

/// Probability that x lies within distance r of the cloud's true center.
///
/// Returns 1 when |x - mean| <= r; otherwise the gamma at which the
/// 100(1-gamma)% confidence ellipse sits exactly at distance r from x. The
/// search runs on the chi-square threshold c, gamma = exp(-c/2), which keeps
/// relative precision for very small gamma.
inline Probability gamma_circle(const Vec2& x, const GaussianCloudFit& fit, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("gamma_circle: radius must be positive");
  const double d_center = (x - fit.mean).norm();
  if (d_center <= r) return 1.0;

  const ConfidenceEllipse unit = fit.ellipse(1.0);
  const Vec2 q = unit.to_local(x);
  const double y0 = std::fabs(q.x());
  const double y1 = std::fabs(q.y());
  const double a = unit.semi_major();
  const double b = unit.semi_minor();
  auto dist_at = [&](double c) {
    const double s = std::sqrt(c);
    return detail::outside_distance_first_quadrant(a * s, b * s, y0, y1);
  };

  // Distance falls from d_center at c = 0 to 0 as c grows.
  constexpr double c_max = 1600.0;  // exp(-800) underflows
  double lo = 0.0;
  double hi = 1.0;
  while (dist_at(hi) > r) {
    lo = hi;
    hi *= 2.0;
    if (hi > c_max) return 0.0;
  }
  // Bisect on c to relative precision so that tiny gammas keep their digits.
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= 1e-13 * hi) break;
    const double mid = 0.5 * (lo + hi);
    if (dist_at(mid) > r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::clamp(stat::chisq2_sf(0.5 * (lo + hi)), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Regression bands

/// Which side of a fitted boundary curve y = m(x) is feasible.
enum class FeasibleSide { above, below };

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double sigma2 = 0.0;  ///< residual sum of squares / (n - 2)
  double x_mean = 0.0;
  double sxx = 0.0;     ///< sum (x_i - x_mean)^2
  std::size_t n = 0;

  double predict(double x) const noexcept { return intercept + slope * x; }

  /// Standard error of the fitted mean at x.
  double mean_se(double x) const noexcept {
    const double dx = x - x_mean;
    return std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + dx * dx / sxx));
  }
};

inline LinearFit fit_linear_regression(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_linear_regression: xs and ys differ in length");
  const std::size_t n = xs.size();
  if (n < 3) throw std::invalid_argument("fit_linear_regression: need at least 3 observations");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_linear_regression: predictor is constant");
  LinearFit fit;
  fit.n = n;
  fit.x_mean = mx;
  fit.sxx = sxx;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - fit.predict(xs[i]);
    rss += e * e;
  }
  fit.sigma2 = rss / static_cast<double>(n - 2);
  return fit;
}

namespace detail {

inline bool on_feasible_side(double y, double boundary, FeasibleSide side) noexcept {
  return side == FeasibleSide::above ? y >= boundary : y <= boundary;
}

}  // namespace detail

/// gamma = 2 (1 - T_{n-2}(|t|)) on the infeasible side of the fitted line, 1 on the feasible side.
inline Probability gamma_linreg(const Vec2& x, const LinearFit& fit, FeasibleSide side) {
  const double m = fit.predict(x.x());
  if (detail::on_feasible_side(x.y(), m, side)) return 1.0;
  const double se = fit.mean_se(x.x());
  if (!(se > 0.0)) return 0.0;
  const double t = std::fabs(m - x.y()) / se;
  return std::clamp(2.0 * stat::t_sf(t, static_cast<unsigned>(fit.n - 2)), 0.0, 1.0);
}

/// Gaussian kernel K(u) = exp(-u^2/2) / sqrt(2 pi).
struct GaussianKernel {
  static double eval(double u) noexcept { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }
  /// Squared L2 norm of K.
  static constexpr double l2_norm_sq() noexcept { return 0.5 / 1.7724538509055160273; }  // 1 / (2 sqrt(pi))
};

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^{-1/5}.
inline double silverman_bandwidth(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("silverman_bandwidth: need at least 2 observations");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(n - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < n ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) throw std::invalid_argument("silverman_bandwidth: predictor is constant");
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

/// Nadaraya-Watson regression with a Gaussian kernel.
class KernelFit {
 public:
  /// An absent bandwidth selects Silverman's rule.
  KernelFit(std::vector<double> xs, std::vector<double> ys, std::optional<double> bandwidth = {})
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) throw std::invalid_argument("fit_nadaraya_watson: xs and ys differ in length");
    if (xs_.size() < 10) throw std::invalid_argument("fit_nadaraya_watson: need at least 10 observations");
    if (bandwidth && !(*bandwidth > 0.0)) throw std::invalid_argument("fit_nadaraya_watson: bandwidth must be positive");
    h_ = bandwidth ? *bandwidth : silverman_bandwidth(xs_);
    sq_resid_.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double e = ys_[i] - predict(xs_[i]);
      sq_resid_[i] = e * e;
    }
  }

  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return xs_.size(); }
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }
  static constexpr double kernel_l2_norm_sq() noexcept { return GaussianKernel::l2_norm_sq(); }

  /// m(x) = sum K((x - X_i)/h) Y_i / sum K((x - X_i)/h).
  double predict(double x) const { return smooth(x, ys_); }

  /// Kernel density estimate f_h(x) with the same kernel and bandwidth.
  double density(double x) const {
    double sum = 0.0;
    for (double xi : xs_) sum += GaussianKernel::eval((x - xi) / h_);
    return sum / (static_cast<double>(xs_.size()) * h_);
  }

  /// Nadaraya-Watson smooth of the squared residuals at x.
  double local_variance(double x) const { return smooth(x, sq_resid_); }

  /// sqrt(||K||_2^2 sigma^2(x) / (n h f_h(x))).
  double mean_se(double x) const {
    const double nhf = static_cast<double>(xs_.size()) * h_ * density(x);
    return std::sqrt(kernel_l2_norm_sq() * local_variance(x) / nhf);
  }

 private:
  double smooth(double x, const std::vector<double>& values) const {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double w = GaussianKernel::eval((x - xs_[i]) / h_);
      num += w * values[i];
      den += w;
    }
    if (!(den >= 1e-12)) {
      throw std::domain_error("kernel regression: x = " + std::to_string(x) + " is outside data support");
    }
    return num / den;
  }

  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> sq_resid_;
  double h_ = 0.0;
};

inline KernelFit fit_nadaraya_watson(std::span<const double> xs, std::span<const double> ys,
                                     std::optional<double> bandwidth = {}) {
  return KernelFit({xs.begin(), xs.end()}, {ys.begin(), ys.end()}, bandwidth);
}

/// gamma = 2 (1 - Phi(|z|)) on the infeasible side of the kernel fit, 1 on the feasible side.
inline Probability gamma_nw(const Vec2& x, const KernelFit& fit, FeasibleSide side) {
  const double m = fit.predict(x.x());
  if (detail::on_feasible_side(x.y(), m, side)) return 1.0;
  const double se = fit.mean_se(x.x());
  if (!(se > 0.0)) return 0.0;
  return std::clamp(2.0 * stat::norm_sf(std::fabs(x.y() - m) / se), 0.0, 1.0);
}

/// Locally weighted quadratic least squares with Gaussian weights.
class LocalQuadraticFit {
 public:
  LocalQuadraticFit(std::vector<double> xs, std::vector<double> ys, std::optional<double> bandwidth = {})
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) throw std::invalid_argument("local quadratic fit: xs and ys differ in length");
    if (xs_.size() < 10) throw std::invalid_argument("local quadratic fit: need at least 10 observations");
    if (bandwidth && !(*bandwidth > 0.0)) throw std::invalid_argument("local quadratic fit: bandwidth must be positive");
    h_ = bandwidth ? *bandwidth : silverman_bandwidth(xs_);
    sq_resid_.resize(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double e = ys_[i] - predict(xs_[i]);
      sq_resid_[i] = e * e;
    }
  }

  double bandwidth() const noexcept { return h_; }
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }

  double predict(double x) const {
    const auto w = equivalent_weights(x);
    double m = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) m += w[i] * ys_[i];
    return m;
  }

  /// Kernel-smoothed squared residuals at x.
  double local_variance(double x) const {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double k = GaussianKernel::eval((x - xs_[i]) / h_);
      num += k * sq_resid_[i];
      den += k;
    }
    if (!(den >= 1e-12)) throw std::domain_error("local quadratic fit: x is outside data support");
    return num / den;
  }

  /// sqrt(sigma^2(x) sum_i l_i(x)^2) with l_i the equivalent-kernel weights.
  double mean_se(double x) const {
    const auto w = equivalent_weights(x);
    double s = 0.0;
    for (double wi : w) s += wi * wi;
    return std::sqrt(local_variance(x) * s);
  }

  /// Weights l_i(x) with predict(x) = sum l_i(x) Y_i.
  std::vector<double> equivalent_weights(double x) const {
    Eigen::Matrix3d xtwx = Eigen::Matrix3d::Zero();
    std::vector<double> k(xs_.size());
    double ksum = 0.0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double d = (xs_[i] - x) / h_;
      k[i] = GaussianKernel::eval(d);
      ksum += k[i];
      const Eigen::Vector3d row(1.0, d, d * d);
      xtwx.noalias() += k[i] * row * row.transpose();
    }
    if (!(ksum >= 1e-12)) {
      throw std::domain_error("local quadratic fit: x = " + std::to_string(x) + " is outside data support");
    }
    Eigen::LDLT<Eigen::Matrix3d> ldlt(xtwx);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || std::fabs(ldlt.vectorD().minCoeff()) < 1e-14 * ksum) {
      throw std::domain_error("local quadratic fit: local design is singular at x = " + std::to_string(x));
    }
    const Eigen::Vector3d e1 = ldlt.solve(Eigen::Vector3d::UnitX());
    std::vector<double> w(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double d = (xs_[i] - x) / h_;
      w[i] = k[i] * (e1(0) + e1(1) * d + e1(2) * d * d);
    }
    return w;
  }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> sq_resid_;
  double h_ = 0.0;
};

/// Any fitted boundary curve with a confidence band.
using RegressionFit = std::variant<LinearFit, KernelFit, LocalQuadraticFit>;

inline double predict(const RegressionFit& fit, double x) {
  return std::visit([x](const auto& f) { return f.predict(x); }, fit);
}

inline double mean_se(const RegressionFit& fit, double x) {
  return std::visit([x](const auto& f) { return f.mean_se(x); }, fit);
}

/// Band probability of an observed gap `gap` = |y - m(x)| with standard error `se`
/// on the infeasible side: t with n-2 df for linear fits, normal otherwise.
inline Probability band_gamma(const RegressionFit& fit, double gap, double se) {
  if (!(se > 0.0)) return gap == 0.0 ? 1.0 : 0.0;
  const double z = std::fabs(gap) / se;
  if (const auto* lin = std::get_if<LinearFit>(&fit)) {
    return std::clamp(2.0 * stat::t_sf(z, static_cast<unsigned>(lin->n - 2)), 0.0, 1.0);
  }
  return std::clamp(2.0 * stat::norm_sf(z), 0.0, 1.0);
}

inline Probability gamma_band(const Vec2& x, const RegressionFit& fit, FeasibleSide side) {
  const double m = predict(fit, x.x());
  if (detail::on_feasible_side(x.y(), m, side)) return 1.0;
  return band_gamma(fit, x.y() - m, mean_se(fit, x.x()));
}

}  // namespace sfga
