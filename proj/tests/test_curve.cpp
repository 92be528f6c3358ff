#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dispflow/curve.hpp"
#include "dispflow/presets.hpp"

using namespace dispflow;

namespace {

const Manifold kSphere(ManifoldKind::Sphere2);
const Manifold kClifford(ManifoldKind::CliffordTorus2);
const Manifold kChart(ManifoldKind::ChartFlatTorus2);

ClosedCurve constant_curve(int n) {
  Field s(n, 3);
  s.rowwise() = Eigen::RowVector3d(0.0, 0.6, 0.8);
  return ClosedCurve(s, kSphere);
}

double max_abs(const Field& f) { return f.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(ClosedCurve, RejectsBadGrids) {
  EXPECT_THROW(ClosedCurve(Field::Zero(24, 3), kSphere), std::invalid_argument);
  EXPECT_THROW(ClosedCurve(Field::Zero(8, 3), kSphere), std::invalid_argument);
  EXPECT_THROW(ClosedCurve(Field::Zero(32, 2), kSphere), std::invalid_argument);
}

TEST(ClosedCurve, ChartLiftKeepsWinding) {
  const ClosedCurve c = torus_geodesic(2, -1, 32, kChart);
  const Field ux = velocity(c);
  for (int i = 0; i < 32; ++i) {
    EXPECT_NEAR(ux(i, 0), 2.0, 1e-13);
    EXPECT_NEAR(ux(i, 1), -1.0, 1e-13);
  }
  const Field w = c.wrapped();
  EXPECT_GE(w.minCoeff(), 0.0);
  EXPECT_LT(w.maxCoeff(), 1.0);
}

TEST(CovariantDerivative, GreatCircleIsGeodesic) {
  const ClosedCurve c = great_circle(64);
  EXPECT_LE(max_abs(covariant_derivative(c, velocity(c))), 1e-10);
}

TEST(CovariantDerivative, ChartLineIsGeodesic) {
  const ClosedCurve c = torus_geodesic(1, 0, 32, kChart);
  EXPECT_LE(max_abs(covariant_derivative(c, velocity(c))), 1e-12);
}

TEST(CovariantDerivative, LatitudeCircleClosedForm) {
  for (double theta : {0.3, std::numbers::pi / 3, 2.0}) {
    const ClosedCurve c = latitude_circle(theta, 64);
    const Field nab = covariant_derivative(c, velocity(c));
    const double s = std::sin(theta), co = std::cos(theta);
    const double exact = std::pow(kTwoPi, 4) * s * s * co * co;
    EXPECT_NEAR(inner(nab, nab), exact, 1e-10 * exact);
    // pointwise: p(u) u_xx computed by hand
    const Eigen::ArrayXd x = kTwoPi * grid_nodes(64).array();
    Field uxx(64, 3);
    uxx.col(0) = -kTwoPi * kTwoPi * s * x.cos();
    uxx.col(1) = -kTwoPi * kTwoPi * s * x.sin();
    uxx.col(2).setZero();
    const Field oracle = uxx - (c.samples.array().colwise() * dot_rows(uxx, c.samples).array()).matrix();
    EXPECT_LE(max_abs(nab - oracle), 1e-10);
  }
}

TEST(CovariantDerivative, RejectsNonTangentField) {
  const ClosedCurve c = great_circle(32);
  EXPECT_THROW(covariant_derivative(c, c.samples), TangencyViolation);
  EXPECT_THROW(covariant_derivative(c, Field::Zero(16, 3)), BaseMismatch);
}

TEST(CovariantDerivative, RejectsOffManifoldCurve) {
  ClosedCurve c = great_circle(32);
  c.samples *= 1.01;
  EXPECT_THROW(covariant_tower(c, 1), PointOffManifold);
}

TEST(CovariantTower, GreatCircle) {
  const ClosedCurve c = great_circle(64);
  const auto t = covariant_tower(c, 3);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_LE(max_abs(t[0] - velocity(c)), 0.0);
  // rounding grows by about 2 pi N/2 per derivative; compare against (2 pi)^(k+1)
  for (int k = 1; k <= 3; ++k) EXPECT_LE(max_abs(t[k]) / std::pow(kTwoPi, k + 1), 1e-9) << k;
}

TEST(CovariantTower, ConstantCurve) {
  for (const Field& f : covariant_tower(constant_curve(32), 4)) EXPECT_LE(max_abs(f), 1e-14);
}

TEST(CovariantTower, DepthLimits) {
  EXPECT_THROW(covariant_tower(great_circle(32), 7), std::invalid_argument);
  EXPECT_THROW(covariant_tower(great_circle(32), -1), std::invalid_argument);
}

TEST(CovariantTower, IntrinsicMatchesExtrinsicFormula) {
  // p(u) u_xx against u_xx - II(u_x, u_x)
  for (const Manifold& m : {kSphere, kClifford}) {
    const ClosedCurve c = random_smooth(3, 1.0, 0.3, 128, m);
    const Field ux = velocity(c);
    const Field intrinsic = covariant_derivative(c, ux);
    const Field extrinsic = spectral_derivative(c.periodic_part(), 2) - m.second_form_field(c.samples, ux, ux);
    EXPECT_LE(max_abs(intrinsic - extrinsic), 1e-10 * std::max(1.0, max_abs(intrinsic))) << m.name();
  }
}

TEST(CovariantTower, ExtrinsicTowerAgreesOnResolvedData) {
  const ClosedCurve c = random_smooth(3, 1.0, 0.3, 128, kSphere);
  const auto a = covariant_tower(c, 3), b = extrinsic_tower(c, 3);
  for (int k = 0; k <= 3; ++k) EXPECT_LE(max_abs(a[k] - b[k]), 1e-8 * std::max(1.0, max_abs(a[k]))) << k;
}

TEST(SobolevNorm, Examples) {
  EXPECT_LE(sobolev_norm(constant_curve(32), 3), 1e-14);
  EXPECT_NEAR(sobolev_norm(great_circle(64), 2), kTwoPi, 1e-10);
  const double theta = 1.0, s = std::sin(theta), co = std::cos(theta);
  const double exact = std::sqrt(kTwoPi * kTwoPi * s * s + std::pow(kTwoPi, 4) * s * s * co * co);
  EXPECT_NEAR(sobolev_norm(latitude_circle(theta, 64), 1), exact, 1e-10 * exact);
  EXPECT_THROW(sobolev_norm(great_circle(32), 6), std::invalid_argument);
}

TEST(SobolevNorm, MonotoneInOrder) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const ClosedCurve c = random_smooth(seed, kDefaultDecay, kDefaultAmplitude, 128, kSphere);
    double prev = 0.0;
    for (int m = 0; m <= kMaxSobolevOrder; ++m) {
      const double v = sobolev_norm(c, m);
      EXPECT_GE(v, prev);
      prev = v;
    }
    const auto all = sobolev_norms(c, kMaxSobolevOrder);
    EXPECT_NEAR(all.back(), prev, 1e-12 * prev);
  }
}

TEST(SobolevNorm, ChartAndCliffordAgree) {
  for (std::uint64_t seed : {4, 5}) {
    const ClosedCurve chart = random_smooth(seed, 1.0, 0.1, 128, kChart);
    const ClosedCurve emb = clifford_from_chart(chart);
    const auto a = sobolev_norms(chart, 4), b = sobolev_norms(emb, 4);
    for (int k = 0; k <= 4; ++k) EXPECT_NEAR(b[k], a[k], 1e-8 * a[k]) << "k=" << k;
  }
}

TEST(Curvature, Examples) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Field x(8, 3), z(8, 3);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = normal(rng), z(i, j) = normal(rng);
  EXPECT_LE(max_abs(curvature_apply(1.0, x, x, z)), 1e-14);
  EXPECT_LE(max_abs(curvature_apply(0.0, x, z, z)), 0.0);

  // orthonormal X, Z with Y = Z gives X
  Field e1 = Field::Zero(4, 3), e2 = Field::Zero(4, 3);
  e1.col(0).setOnes();
  e2.col(1).setOnes();
  EXPECT_LE(max_abs(curvature_apply(1.0, e1, e2, e2) - e1), 0.0);
  EXPECT_THROW(curvature_apply(1.0, e1, Field::Zero(5, 3), e2), BaseMismatch);
}

TEST(Curvature, GaussEquationOnSphere) {
  // R(X,Y)Z = n-part pairing: g(R(X,Y)Z,W) = <II(Y,Z), II(X,W)> - <II(X,Z), II(Y,W)>
  const ClosedCurve c = random_smooth(2, 1.0, 0.3, 32, kSphere);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  auto tangent = [&] {
    Field f(32, 3);
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 3; ++j) f(i, j) = normal(rng);
    return kSphere.tangent_part(c.samples, f);
  };
  const Field x = tangent(), y = tangent(), z = tangent(), w = tangent();
  auto ii = [&](const Field& a, const Field& b) { return kSphere.second_form_field(c.samples, a, b); };
  const Eigen::VectorXd gauss = dot_rows(ii(y, z), ii(x, w)) - dot_rows(ii(x, z), ii(y, w));
  const Eigen::VectorXd direct = dot_rows(curvature_apply(1.0, x, y, z), w);
  EXPECT_LE((gauss - direct).cwiseAbs().maxCoeff(), 1e-12);
}
