#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dispflow/manifold.hpp"

using namespace dispflow;

namespace {

const Manifold kSphere(ManifoldKind::Sphere2);
const Manifold kClifford(ManifoldKind::CliffordTorus2);
const Manifold kChart(ManifoldKind::ChartFlatTorus2);

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

Vec random_point(const Manifold& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> normal;
  switch (m.kind()) {
    case ManifoldKind::Sphere2: return kSphere.nearest_point(v({normal(rng), normal(rng), normal(rng)}));
    case ManifoldKind::CliffordTorus2: {
      const double a = kTwoPi * u(rng), b = kTwoPi * u(rng);
      return kCliffordRadius * v({std::cos(a), std::sin(a), std::cos(b), std::sin(b)});
    }
    case ManifoldKind::ChartFlatTorus2: return v({u(rng), u(rng)});
  }
  return {};
}

Vec random_vector(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec x(d);
  for (int i = 0; i < d; ++i) x(i) = normal(rng);
  return x;
}

class EveryTarget : public ::testing::TestWithParam<ManifoldKind> {};

}  // namespace

TEST(Project, SphereExamples) {
  EXPECT_LE((kSphere.nearest_point(v({2, 0, 0})) - v({1, 0, 0})).norm(), 1e-15);
  // distance 1 exceeds the tubular radius
  EXPECT_THROW(kSphere.project(v({2, 0, 0})), OutOfTubularNeighborhood);
  EXPECT_LE((kSphere.project(v({1.3, 0, 0})) - v({1, 0, 0})).norm(), 1e-15);
  EXPECT_LE((kSphere.project(v({1, 0, 0})) - v({1, 0, 0})).norm(), 1e-15);
}

TEST(Project, CliffordNearestPointExample) {
  const double r = 1.0 / kTwoPi;
  const Vec q = v({1.0 / std::numbers::pi, 0, 0, r});
  EXPECT_LE((kClifford.nearest_point(q) - v({r, 0, 0, r})).norm(), 1e-15);
  // q lies 1/(2 pi) from the torus, outside the tubular radius 0.5/(2 pi)
  EXPECT_THROW(kClifford.project(q), OutOfTubularNeighborhood);
}

TEST(Project, CliffordMinimizesDistanceOverCircles) {
  // brute-force minimization over both circle angles
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec q = random_point(kClifford, rng) + 0.02 * random_vector(4, rng);
    double best = 1e9;
    for (int i = 0; i < 720; ++i)
      for (int j = 0; j < 720; ++j) {
        const double a = kTwoPi * i / 720, b = kTwoPi * j / 720;
        const Vec p = kCliffordRadius * v({std::cos(a), std::sin(a), std::cos(b), std::sin(b)});
        best = std::min(best, (q - p).norm());
      }
    EXPECT_LE(kClifford.distance(q), best + 1e-12);
    EXPECT_GE(kClifford.distance(q), best - 1e-4);
  }
}

TEST(Project, OutsideTubeThrows) {
  EXPECT_THROW(kSphere.project(v({0.3, 0, 0})), OutOfTubularNeighborhood);
  EXPECT_THROW(kSphere.project(v({1.6, 0, 0})), OutOfTubularNeighborhood);
  EXPECT_NO_THROW(kSphere.project(v({1.4, 0, 0})));
}

TEST(Project, DimensionMismatchThrows) { EXPECT_THROW(kSphere.project(v({1, 0})), std::invalid_argument); }

TEST(TangentProject, SphereExamples) {
  EXPECT_LE((kSphere.tangent_project(v({0, 0, 1}), v({1, 0, 0})) - v({1, 0, 0})).norm(), 1e-15);
  EXPECT_LE(kSphere.tangent_project(v({0, 0, 1}), v({0, 0, 5})).norm(), 1e-15);
  EXPECT_LE((kSphere.tangent_project(v({1, 0, 0}), v({1, 1, 0})) - v({0, 1, 0})).norm(), 1e-15);
}

TEST(TangentProject, MatchesDerivativeOfProjection) {
  // p(y) = d pi_y, checked by central differences of the nearest-point map
  std::mt19937_64 rng(11);
  for (const Manifold& m : {kSphere, kClifford}) {
    const Vec y = random_point(m, rng), x = random_vector(m.ambient_dim(), rng);
    const double h = 1e-6;
    const Vec fd = (m.nearest_point(y + h * x) - m.nearest_point(y - h * x)) / (2 * h);
    EXPECT_LE((fd - m.tangent_project(y, x)).norm(), 1e-8 * x.norm()) << m.name();
  }
}

TEST(TangentProject, OffManifoldBaseThrows) {
  EXPECT_THROW(kSphere.tangent_project(v({1.01, 0, 0}), v({0, 1, 0})), PointOffManifold);
  EXPECT_THROW(kSphere.second_fundamental_form(v({0, 0, 1.1}), v({1, 0, 0}), v({1, 0, 0})), PointOffManifold);
  EXPECT_THROW(kSphere.complex_structure(v({0, 0, 0.9}), v({1, 0, 0})), PointOffManifold);
}

TEST(SecondFundamentalForm, SphereExamples) {
  EXPECT_LE((kSphere.second_fundamental_form(v({0, 0, 1}), v({1, 0, 0}), v({1, 0, 0})) - v({0, 0, -1})).norm(), 1e-15);
  EXPECT_LE(kSphere.second_fundamental_form(v({0, 0, 1}), v({1, 0, 0}), v({0, 1, 0})).norm(), 1e-15);
}

TEST(SecondFundamentalForm, ChartIsZero) {
  EXPECT_LE(kChart.second_fundamental_form(v({0.3, 0.2}), v({1, 0}), v({1, 0})).norm(), 0.0);
}

TEST(SecondFundamentalForm, MatchesNormalPartOfAmbientDerivative) {
  // extend Y as Y(z) = p(pi(z)) Y0 and differentiate along the path pi(y + s X)
  std::mt19937_64 rng(21);
  for (const Manifold& m : {kSphere, kClifford}) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vec y = random_point(m, rng);
      const Vec x = m.tangent_project(y, random_vector(m.ambient_dim(), rng));
      const Vec y0 = m.tangent_project(y, random_vector(m.ambient_dim(), rng));
      auto field = [&](double s) {
        const Vec z = m.nearest_point(y + s * x);
        return Vec(m.tangent_project(z, y0));
      };
      const double h = 1e-6;
      const Vec d = (field(h) - field(-h)) / (2 * h);
      const Vec normal = m.normal_project(y, d);
      const Vec ii = m.second_fundamental_form(y, x, y0);
      EXPECT_LE((normal - ii).norm(), 1e-4 * ii.norm()) << m.name();
    }
  }
}

TEST(SecondFundamentalForm, SymmetricBilinearNormal) {
  std::mt19937_64 rng(5);
  for (const Manifold& m : {kSphere, kClifford}) {
    const Vec y = random_point(m, rng);
    const Vec x1 = m.tangent_project(y, random_vector(m.ambient_dim(), rng));
    const Vec x2 = m.tangent_project(y, random_vector(m.ambient_dim(), rng));
    const Vec x3 = m.tangent_project(y, random_vector(m.ambient_dim(), rng));
    const Vec a = m.second_fundamental_form(y, x1, x2);
    EXPECT_LE((a - m.second_fundamental_form(y, x2, x1)).norm(), 1e-12);
    EXPECT_LE(m.tangent_project(y, a).norm(), 1e-12 * std::max(1.0, a.norm()));
    const Vec lin = m.second_fundamental_form(y, 2.0 * x1 + x3, x2);
    EXPECT_LE((lin - 2.0 * a - m.second_fundamental_form(y, x3, x2)).norm(), 1e-10 * lin.norm());
  }
}

TEST(ComplexStructure, Examples) {
  EXPECT_LE((kSphere.complex_structure(v({0, 0, 1}), v({1, 0, 0})) - v({0, 1, 0})).norm(), 1e-15);
  EXPECT_LE((kChart.complex_structure(v({0.1, 0.9}), v({1, 0})) - v({0, 1})).norm(), 1e-15);
  EXPECT_LE(kSphere.complex_structure(v({0, 0, 1}), v({0, 0, 0})).norm(), 0.0);
}

TEST(ComplexStructure, CliffordIsPushforwardOfChartRotation) {
  // d w maps e1 -> (2 pi) r t0, e2 -> (2 pi) r t1 with r = 1/(2 pi): unit tangents
  const double a = 0.3, b = 1.1;
  const Vec y = kCliffordRadius * v({std::cos(a), std::sin(a), std::cos(b), std::sin(b)});
  const Vec t0 = v({-std::sin(a), std::cos(a), 0, 0}), t1 = v({0, 0, -std::sin(b), std::cos(b)});
  EXPECT_LE((kClifford.complex_structure(y, t0) - t1).norm(), 1e-14);
  EXPECT_LE((kClifford.complex_structure(y, t1) + t0).norm(), 1e-14);
}

TEST_P(EveryTarget, ProjectorIdentities) {
  const Manifold m(GetParam());
  std::mt19937_64 rng(7);
  const int d = m.ambient_dim();
  for (int trial = 0; trial < 50; ++trial) {
    const Vec y = random_point(m, rng);
    const Vec x = random_vector(d, rng), z = random_vector(d, rng);
    const Vec px = m.tangent_project(y, x);
    EXPECT_LE((px + m.normal_project(y, x) - x).norm(), 1e-12);
    EXPECT_LE((m.tangent_project(y, px) - px).norm(), 1e-12);
    EXPECT_NEAR(px.dot(z), x.dot(m.tangent_project(y, z)), 1e-12);

    const Vec jx = m.complex_structure(y, px), jz = m.complex_structure(y, m.tangent_project(y, z));
    EXPECT_LE((m.complex_structure(y, jx) + px).norm(), 1e-12);
    EXPECT_NEAR(jx.dot(px), 0.0, 1e-12);
    EXPECT_NEAR(jx.norm(), px.norm(), 1e-12);
    EXPECT_NEAR(jx.dot(m.tangent_project(y, z)), -px.dot(jz), 1e-12);
    EXPECT_LE(m.normal_project(y, jx).norm(), 1e-12);
  }
}

TEST_P(EveryTarget, ProjectionIsIdempotentInsideTube) {
  const Manifold m(GetParam());
  std::mt19937_64 rng(9);
  const double r = std::isfinite(m.tubular_radius()) ? 0.9 * m.tubular_radius() : 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Vec dir = random_vector(m.ambient_dim(), rng).normalized();
    const Vec q = random_point(m, rng) + r * std::uniform_real_distribution<double>(0, 1)(rng) * dir;
    const Vec p = m.project(q);
    EXPECT_LE((m.project(p) - p).norm(), 1e-12);
    EXPECT_LE(m.constraint_residual(p), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Targets, EveryTarget,
                         ::testing::Values(ManifoldKind::Sphere2, ManifoldKind::CliffordTorus2,
                                           ManifoldKind::ChartFlatTorus2),
                         [](const auto& info) { return Manifold(info.param).name(); });

TEST(Manifold, NamesAndConstants) {
  EXPECT_EQ(Manifold::from_name("Sphere2"), kSphere);
  EXPECT_EQ(Manifold::from_name("CliffordTorus2"), kClifford);
  EXPECT_EQ(Manifold::from_name("ChartFlatTorus2"), kChart);
  EXPECT_THROW(Manifold::from_name("Hyperbolic"), ConfigError);
  EXPECT_EQ(kSphere.gaussian_curvature(), 1.0);
  EXPECT_EQ(kClifford.gaussian_curvature(), 0.0);
  EXPECT_EQ(kSphere.tubular_radius(), 0.5);
  EXPECT_DOUBLE_EQ(kClifford.tubular_radius(), 0.5 / kTwoPi);
}
