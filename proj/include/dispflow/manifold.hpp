#pragma once

// Concrete Kaehler targets with closed-form extrinsic geometry:
//   Sphere2          unit sphere in R^3, J_y X = y x X, K = 1
//   CliffordTorus2   flat torus R^2/Z^2 embedded in R^4 as a product of two
//                    circles of radius 1/(2 pi), K = 0
//   ChartFlatTorus2  the same flat torus in its global chart R^2 (mod 1)
//
// Sign convention: second_fundamental_form(y, X, Y) is the normal part of the
// ambient derivative D_X Y, so on the sphere it equals -(X.Y) y and
// the covariant derivative of a tangent field V along a curve is
// V_x - II(u_x, V).

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "dispflow/errors.hpp"
#include "dispflow/spectral.hpp"

namespace dispflow {

using Vec = Eigen::VectorXd;

enum class ManifoldKind { Sphere2, CliffordTorus2, ChartFlatTorus2 };

inline constexpr double kCliffordRadius = 1.0 / kTwoPi;
inline constexpr double kOnManifoldTol = 1e-8;

class Manifold {
 public:
  constexpr explicit Manifold(ManifoldKind kind = ManifoldKind::Sphere2) : kind_(kind) {}

  static Manifold from_name(std::string_view name) {
    if (name == "Sphere2") return Manifold(ManifoldKind::Sphere2);
    if (name == "CliffordTorus2") return Manifold(ManifoldKind::CliffordTorus2);
    if (name == "ChartFlatTorus2") return Manifold(ManifoldKind::ChartFlatTorus2);
    throw ConfigError("unknown manifold '" + std::string(name) + "'");
  }

  constexpr ManifoldKind kind() const { return kind_; }
  constexpr bool operator==(const Manifold&) const = default;

  std::string name() const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return "Sphere2";
      case ManifoldKind::CliffordTorus2: return "CliffordTorus2";
      case ManifoldKind::ChartFlatTorus2: return "ChartFlatTorus2";
    }
    return {};
  }

  constexpr int ambient_dim() const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return 3;
      case ManifoldKind::CliffordTorus2: return 4;
      case ManifoldKind::ChartFlatTorus2: return 2;
    }
    return 0;
  }

  constexpr double gaussian_curvature() const { return kind_ == ManifoldKind::Sphere2 ? 1.0 : 0.0; }

  /// Radius of the tubular neighbourhood on which project() is accepted.
  constexpr double tubular_radius() const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return 0.5;
      case ManifoldKind::CliffordTorus2: return 0.5 * kCliffordRadius;
      case ManifoldKind::ChartFlatTorus2: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// Largest violation of the defining equations G^j(v) = 0.
  double constraint_residual(const Vec& v) const {
    check_dim(v);
    return constraint_residuals(row(v))(0);
  }

  /// Nearest point on the manifold without the tubular-neighbourhood check.
  Vec nearest_point(const Vec& q) const {
    check_dim(q);
    return nearest_field(row(q)).row(0).transpose();
  }

  double distance(const Vec& q) const { return (q - nearest_point(q)).norm(); }

  /// Nearest-point projection onto the manifold; throws
  /// OutOfTubularNeighborhood when q is not within tubular_radius().
  Vec project(const Vec& q) const {
    check_dim(q);
    return project_field(row(q)).row(0).transpose();
  }

  Vec tangent_project(const Vec& y, const Vec& x) const {
    require_on_manifold(y);
    return tangent_part(row(y), row(x)).row(0).transpose();
  }

  Vec normal_project(const Vec& y, const Vec& x) const { return x - tangent_project(y, x); }

  Vec second_fundamental_form(const Vec& y, const Vec& x1, const Vec& x2) const {
    require_on_manifold(y);
    return second_form_field(row(y), row(x1), row(x2)).row(0).transpose();
  }

  Vec complex_structure(const Vec& y, const Vec& x) const {
    require_on_manifold(y);
    return rotate_field(row(y), row(x)).row(0).transpose();
  }

  // ---- field versions: row i of every argument lives at curve sample i ----

  Eigen::VectorXd constraint_residuals(const Field& pts) const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return (pts.rowwise().squaredNorm().array() - 1.0).abs().matrix();
      case ManifoldKind::CliffordTorus2: {
        const double r2 = kCliffordRadius * kCliffordRadius;
        return (pts.leftCols<2>().rowwise().squaredNorm().array() - r2)
            .abs()
            .max((pts.rightCols<2>().rowwise().squaredNorm().array() - r2).abs())
            .matrix();
      }
      case ManifoldKind::ChartFlatTorus2: return Eigen::VectorXd::Zero(pts.rows());
    }
    return {};
  }

  double max_constraint_residual(const Field& pts) const {
    return pts.rows() == 0 ? 0.0 : constraint_residuals(pts).maxCoeff();
  }

  Field nearest_field(const Field& q) const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return q.array().colwise() / q.rowwise().norm().array();
      case ManifoldKind::CliffordTorus2: {
        Field p(q.rows(), 4);
        p.leftCols<2>() = kCliffordRadius * (q.leftCols<2>().array().colwise() / q.leftCols<2>().rowwise().norm().array());
        p.rightCols<2>() =
            kCliffordRadius * (q.rightCols<2>().array().colwise() / q.rightCols<2>().rowwise().norm().array());
        return p;
      }
      case ManifoldKind::ChartFlatTorus2: return q;
    }
    return q;
  }

  /// Largest distance from the samples to the manifold.
  double max_distance(const Field& pts) const {
    return pts.rows() == 0 ? 0.0 : (pts - nearest_field(pts)).rowwise().norm().maxCoeff();
  }

  /// Pointwise projection; throws OutOfTubularNeighborhood if any sample is
  /// not strictly inside the tubular neighbourhood.
  Field project_field(const Field& pts) const {
    Field p = nearest_field(pts);
    const double d = pts.rows() == 0 ? 0.0 : (pts - p).rowwise().norm().maxCoeff();
    if (!(d < tubular_radius()))
      throw OutOfTubularNeighborhood(name() + ": sample at distance " + std::to_string(d) +
                                     " outside the tubular neighbourhood");
    return p;
  }

  Field tangent_field(const Field& base, const Field& x) const {
    require_on_manifold(base);
    return tangent_part(base, x);
  }

  // The unchecked kernels below assume `base` lies on the manifold.

  Field tangent_part(const Field& base, const Field& x) const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return x - (base.array().colwise() * dot_rows(x, base).array()).matrix();
      case ManifoldKind::CliffordTorus2: {
        Field out = x;
        const double inv_r2 = 1.0 / (kCliffordRadius * kCliffordRadius);
        for (int p = 0; p < 2; ++p) {
          const auto y = base.middleCols<2>(2 * p);
          const Eigen::VectorXd c = dot_rows(x.middleCols<2>(2 * p), y) * inv_r2;
          out.middleCols<2>(2 * p) -= (y.array().colwise() * c.array()).matrix();
        }
        return out;
      }
      case ManifoldKind::ChartFlatTorus2: return x;
    }
    return x;
  }

  Field second_form_field(const Field& base, const Field& x1, const Field& x2) const {
    switch (kind_) {
      case ManifoldKind::Sphere2: return -(base.array().colwise() * dot_rows(x1, x2).array()).matrix();
      case ManifoldKind::CliffordTorus2: {
        Field out(base.rows(), 4);
        const double inv_r2 = 1.0 / (kCliffordRadius * kCliffordRadius);
        for (int p = 0; p < 2; ++p) {
          const Eigen::VectorXd c = dot_rows(x1.middleCols<2>(2 * p), x2.middleCols<2>(2 * p)) * inv_r2;
          out.middleCols<2>(2 * p) = -(base.middleCols<2>(2 * p).array().colwise() * c.array()).matrix();
        }
        return out;
      }
      case ManifoldKind::ChartFlatTorus2: return Field::Zero(base.rows(), 2);
    }
    return Field::Zero(base.rows(), base.cols());
  }

  Field rotate_field(const Field& base, const Field& x) const {
    switch (kind_) {
      case ManifoldKind::Sphere2: {
        Field out(x.rows(), 3);
        out.col(0) = base.col(1).cwiseProduct(x.col(2)) - base.col(2).cwiseProduct(x.col(1));
        out.col(1) = base.col(2).cwiseProduct(x.col(0)) - base.col(0).cwiseProduct(x.col(2));
        out.col(2) = base.col(0).cwiseProduct(x.col(1)) - base.col(1).cwiseProduct(x.col(0));
        return out;
      }
      case ManifoldKind::CliffordTorus2: {
        // t0, t1: unit tangents of the two circle factors
        const double inv_r = 1.0 / kCliffordRadius;
        const Eigen::VectorXd t0x = -base.col(1) * inv_r, t0y = base.col(0) * inv_r;
        const Eigen::VectorXd t1x = -base.col(3) * inv_r, t1y = base.col(2) * inv_r;
        const Eigen::VectorXd alpha = x.col(0).cwiseProduct(t0x) + x.col(1).cwiseProduct(t0y);
        const Eigen::VectorXd beta = x.col(2).cwiseProduct(t1x) + x.col(3).cwiseProduct(t1y);
        Field out(x.rows(), 4);
        out.col(0) = -beta.cwiseProduct(t0x);
        out.col(1) = -beta.cwiseProduct(t0y);
        out.col(2) = alpha.cwiseProduct(t1x);
        out.col(3) = alpha.cwiseProduct(t1y);
        return out;
      }
      case ManifoldKind::ChartFlatTorus2: {
        Field out(x.rows(), 2);
        out.col(0) = -x.col(1);
        out.col(1) = x.col(0);
        return out;
      }
    }
    return x;
  }

  void require_on_manifold(const Field& pts) const {
    const double r = max_constraint_residual(pts);
    if (r > kOnManifoldTol) throw PointOffManifold(name() + ": constraint residual " + std::to_string(r));
  }

 private:
  static Field row(const Vec& v) { return v.transpose(); }

  void check_dim(const Vec& v) const {
    if (v.size() != ambient_dim())
      throw std::invalid_argument(name() + ": expected ambient dimension " + std::to_string(ambient_dim()));
  }

  void require_on_manifold(const Vec& y) const {
    const double r = constraint_residual(y);
    if (r > kOnManifoldTol) throw PointOffManifold(name() + ": constraint residual " + std::to_string(r));
  }

  ManifoldKind kind_;
};

}  // namespace dispflow
