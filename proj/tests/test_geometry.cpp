#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "sfga/geometry.hpp"
#include "sfga/random.hpp"

using namespace sfga;

namespace {

// Dense boundary-sampling oracle written against the implicit form only:
// boundary points solve d^T S d = c along direction u, d = u * sqrt(c / u^T S u).
double distance_oracle(const Vec2& p, const Vec2& center, const Mat2& shape, double c, int samples) {
  const Vec2 d = p - center;
  if (d.dot(shape * d) <= c) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / samples;
    const Vec2 u(std::cos(phi), std::sin(phi));
    const Vec2 q = center + u * std::sqrt(c / u.dot(shape * u));
    best = std::min(best, (q - p).norm());
  }
  return best;
}

Mat2 random_spd(Rng& rng) {
  const double angle = rng.uniform(0, std::numbers::pi);
  const double l1 = rng.uniform(0.05, 5.0), l2 = rng.uniform(0.05, 5.0);
  Mat2 r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r * Vec2(l1, l2).asDiagonal() * r.transpose();
}

SampleCloud cloud_of(std::initializer_list<Vec2> pts) { return {std::vector<Vec2>(pts)}; }

}  // namespace

TEST(SampleMean, Average) {
  const Vec2 m = sample_mean(cloud_of({{0, 0}, {2, 2}}));
  EXPECT_DOUBLE_EQ(m.x(), 1.0);
  EXPECT_DOUBLE_EQ(m.y(), 1.0);
  EXPECT_THROW(sample_mean(SampleCloud{}), std::invalid_argument);
}

TEST(SymEigen2, MatchesEigen) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Mat2 m = random_spd(rng);
    const SymEigen2 e = sym_eigen2(m);
    const Eigen::SelfAdjointEigenSolver<Mat2> solver(m);
    EXPECT_NEAR(e.small, solver.eigenvalues()(0), 1e-12);
    EXPECT_NEAR(e.large, solver.eigenvalues()(1), 1e-12);
    const Vec2 v(std::cos(e.angle), std::sin(e.angle));
    EXPECT_NEAR((m * v - e.large * v).norm(), 0.0, 1e-10);
  }
}

TEST(ConfidenceEllipse, AxesAndRotation) {
  Mat2 shape;
  shape << 1.0 / 16.0, 0.0, 0.0, 1.0;  // x^2/16 + y^2 <= 1
  const ConfidenceEllipse e({1, 2}, shape, 1.0);
  EXPECT_NEAR(e.semi_major(), 4.0, 1e-12);
  EXPECT_NEAR(e.semi_minor(), 1.0, 1e-12);
  EXPECT_NEAR(std::sin(e.rotation()), 0.0, 1e-12);
  EXPECT_NEAR(e.area(), 4.0 * std::numbers::pi, 1e-12);
  for (double phi = 0; phi < 6.3; phi += 0.1) {
    const Vec2 q = e.boundary_point(phi) - e.center();
    EXPECT_NEAR(q.dot(shape * q), 1.0, 1e-12);
  }
}

TEST(ConfidenceEllipse, RejectsInvalid) {
  Mat2 singular;
  singular << 1, 1, 1, 1;
  EXPECT_THROW(ConfidenceEllipse({0, 0}, singular, 1.0), std::invalid_argument);
  EXPECT_THROW(ConfidenceEllipse({0, 0}, Mat2::Identity(), -1.0), std::invalid_argument);
}

TEST(EllipseFromReadings, SphericalIsCircle) {
  const double sigma = 2.5, gamma = 0.05;
  const SampleCloud cloud = cloud_of({{1, 1}, {3, 1}, {2, 4}, {2, 2}});
  const ConfidenceEllipse e = ellipse_from_readings(cloud, sigma * sigma * Mat2::Identity(), gamma);
  const double radius = sigma * std::sqrt(-2.0 * std::log(gamma) / 4.0);
  EXPECT_NEAR(e.semi_major(), radius, 1e-12);
  EXPECT_NEAR(e.semi_minor(), radius, 1e-12);
  EXPECT_NEAR(e.center().x(), 2.0, 1e-15);
  EXPECT_NEAR(e.center().y(), 2.0, 1e-15);
}

TEST(EllipseFromReadings, BoundarySatisfiesDefinition) {
  Mat2 sigma;
  sigma << 16.0, -16.0, -16.0, 25.0;
  const SampleCloud cloud = cloud_of({{0, 0}, {1, 2}, {-1, 3}});
  const ConfidenceEllipse e = ellipse_from_readings(cloud, sigma, 0.05);
  const Mat2 inv = sigma.inverse();
  for (double phi = 0; phi < 6.3; phi += 0.05) {
    const Vec2 d = e.center() - e.boundary_point(phi);
    EXPECT_NEAR(3.0 * d.dot(inv * d), stat::chisq2_quantile(0.95), 1e-9);
  }
}

TEST(EllipseFromReadings, ScalingWithReadings) {
  Mat2 sigma;
  sigma << 16.0, -16.0, -16.0, 36.0;
  SampleCloud ten, forty;
  for (int i = 0; i < 10; ++i) ten.points.emplace_back(0.0, 0.0);
  for (int i = 0; i < 40; ++i) forty.points.emplace_back(0.0, 0.0);
  const auto e10 = ellipse_from_readings(ten, sigma, 0.05);
  const auto e40 = ellipse_from_readings(forty, sigma, 0.05);
  EXPECT_NEAR(e40.semi_major(), e10.semi_major() / 2.0, 1e-12);
  EXPECT_NEAR(e40.semi_minor(), e10.semi_minor() / 2.0, 1e-12);
  EXPECT_NEAR(e40.area(), e10.area() / 4.0, 1e-9);
}

TEST(EllipseFromReadings, DegeneratesAsGammaApproachesOne) {
  const SampleCloud cloud = cloud_of({{5, 5}});
  const auto e = ellipse_from_readings(cloud, Mat2::Identity(), 1.0 - 1e-12);
  EXPECT_LT(e.semi_major(), 1e-5);
  EXPECT_THROW(ellipse_from_readings(cloud, Mat2::Identity(), 1.0), std::invalid_argument);
  EXPECT_THROW(ellipse_from_readings(cloud, Mat2::Zero(), 0.5), std::invalid_argument);
}

TEST(DistPointEllipse, InsideIsZero) {
  const ConfidenceEllipse e({0, 0}, Mat2::Identity(), 4.0);
  EXPECT_EQ(dist_point_ellipse({0.5, -1.0}, e), 0.0);
  EXPECT_EQ(dist_point_ellipse({0.0, 0.0}, e), 0.0);
}

TEST(DistPointEllipse, CircleReduction) {
  const ConfidenceEllipse e({3, -1}, Mat2::Identity(), 9.0);  // radius 3
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double phi = rng.uniform(0, 2 * std::numbers::pi), D = rng.uniform(3.01, 50);
    const Vec2 p = e.center() + D * Vec2(std::cos(phi), std::sin(phi));
    EXPECT_NEAR(dist_point_ellipse(p, e), D - 3.0, 1e-10);
  }
}

TEST(DistPointEllipse, AxisPoints) {
  Mat2 shape;
  shape << 1.0 / 25.0, 0.0, 0.0, 1.0;
  const ConfidenceEllipse e({0, 0}, shape, 1.0);
  EXPECT_NEAR(dist_point_ellipse({8, 0}, e), 3.0, 1e-12);
  EXPECT_NEAR(dist_point_ellipse({0, 4}, e), 3.0, 1e-12);
  // Near the center of curvature of the major vertex the projection is off-axis.
  EXPECT_NEAR(dist_point_ellipse({4.9, 0.01}, e), distance_oracle({4.9, 0.01}, {0, 0}, shape, 1.0, 200000), 1e-4);
}

TEST(DistPointEllipse, ZeroThresholdIsCenterDistance) {
  const ConfidenceEllipse e({1, 1}, Mat2::Identity(), 0.0);
  EXPECT_NEAR(dist_point_ellipse({4, 5}, e), 5.0, 1e-12);
}

TEST(DistPointEllipse, MatchesSamplingOracle) {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const Mat2 shape = random_spd(rng);
    const double c = rng.uniform(0.5, 10);
    const Vec2 center(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Vec2 p(rng.uniform(-30, 30), rng.uniform(-30, 30));
    const ConfidenceEllipse e(center, shape, c);
    const double oracle = distance_oracle(p, center, shape, c, 100000);
    EXPECT_NEAR(dist_point_ellipse(p, e), oracle, 1e-4) << i;
  }
}

TEST(DistPointEllipse, SampledFallbackIsClose) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const ConfidenceEllipse e({0, 0}, random_spd(rng), 2.0);
    const Vec2 p(rng.uniform(-20, 20), rng.uniform(-20, 20));
    EXPECT_NEAR(dist_point_ellipse_sampled(p, e), dist_point_ellipse(p, e), 0.05);
  }
}
