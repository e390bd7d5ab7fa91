#pragma once

// Distribution functions used by the feasibility estimators: standard normal,
// chi-square with two degrees of freedom, and Student's t.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sfga {

/// A value in [0, 1]. Alias only; range checks live at the call sites.
using Probability = double;

namespace stat {

inline double norm_pdf(double z) noexcept {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal CDF. Saturates to 0 and 1 in the far tails.
inline Probability norm_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Upper tail 1 - Phi(z), computed without cancellation.
inline Probability norm_sf(double z) noexcept {
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

/// Lower p-quantile of the standard normal, by bisection on norm_cdf.
inline double norm_quantile(Probability p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  // norm_cdf(-39) underflows to 0, so the bracket covers every representable p.
  double lo = -39.0;
  double hi = 39.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline Probability chisq2_cdf(double x) {
  if (!(x >= 0.0)) throw std::domain_error("chisq2_cdf: x must be nonnegative");
  return -std::expm1(-0.5 * x);
}

/// Upper tail of the chi-square(2) law, exp(-x/2).
inline Probability chisq2_sf(double x) {
  if (!(x >= 0.0)) throw std::domain_error("chisq2_sf: x must be nonnegative");
  return std::exp(-0.5 * x);
}

inline double chisq2_quantile(Probability p) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw std::domain_error("chisq2_quantile: p must lie in [0, 1), got " + std::to_string(p));
  }
  return -2.0 * std::log1p(-p);
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 200000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("incomplete_beta: a, b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Upper tail P(T > t) of Student's t with df degrees of freedom.
inline Probability t_sf(double t, unsigned df) {
  if (df == 0) throw std::domain_error("t distribution: df must be positive");
  if (!std::isfinite(t)) throw std::domain_error("t distribution: t must be finite");
  const double nu = static_cast<double>(df);
  const double t2 = t * t;
  // I_{nu/(nu+t^2)}(nu/2, 1/2) is the two-sided tail; evaluate the smaller
  // argument directly to avoid forming 1 - x.
  double two_sided = 0.0;
  if (t2 < nu) {
    two_sided = 1.0 - incomplete_beta(0.5, 0.5 * nu, t2 / (nu + t2));
  } else {
    two_sided = incomplete_beta(0.5 * nu, 0.5, nu / (nu + t2));
  }
  const double upper = 0.5 * two_sided;
  return t >= 0.0 ? upper : 1.0 - upper;
}

inline Probability t_cdf(double t, unsigned df) {
  if (df == 0) throw std::domain_error("t distribution: df must be positive");
  return t_sf(-t, df);
}

}  // namespace stat
}  // namespace sfga
