#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dispflow {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  /// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
  /// Legendre recurrence, weights 2 * (first eigenvector component)^2.
  explicit GaussLegendre(int n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: need at least one node");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double beta = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    nodes = eig.eigenvalues();
    weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
  }

  int size() const { return static_cast<int>(nodes.size()); }

  /// Nodes and weights mapped to [lo, hi].
  std::pair<Eigen::VectorXd, Eigen::VectorXd> on(double lo, double hi) const {
    const double half = 0.5 * (hi - lo);
    return {((nodes.array() + 1.0) * half + lo).matrix(), weights * half};
  }
};

/// Lagrange basis polynomial m through `nodes`, evaluated at s.
inline double lagrange_basis(const Eigen::VectorXd& nodes, int m, double s) {
  double v = 1.0;
  for (int j = 0; j < nodes.size(); ++j)
    if (j != m) v *= (s - nodes(j)) / (nodes(m) - nodes(j));
  return v;
}

}  // namespace dispflow
