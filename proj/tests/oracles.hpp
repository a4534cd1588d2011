#pragma once

// Test-only reference implementations, kept independent of the solver and
// model code they are used to check.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <random>

namespace ttmpc::testing {

/// Projected-gradient solver for box-constrained strictly convex QPs.
/// Slow but simple; used as an independent optimum oracle.
inline Eigen::VectorXd projected_gradient_box_qp(const Eigen::MatrixXd& H,
                                                 const Eigen::VectorXd& g,
                                                 const Eigen::VectorXd& lower,
                                                 const Eigen::VectorXd& upper,
                                                 double tol = 1e-10,
                                                 int max_iter = 2000000) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
  const double lipschitz = eig.eigenvalues().maxCoeff();
  Eigen::VectorXd x =
      Eigen::VectorXd::Zero(g.size()).cwiseMax(lower).cwiseMin(upper);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd grad = H * x + g;
    const Eigen::VectorXd natural =
        x - (x - grad).cwiseMax(lower).cwiseMin(upper);
    if (natural.cwiseAbs().maxCoeff() < tol) break;
    x = (x - grad / lipschitz).cwiseMax(lower).cwiseMin(upper);
  }
  return x;
}

/// Random symmetric positive definite matrix with eigenvalues bounded away
/// from zero.
inline Eigen::MatrixXd random_spd(int n, std::mt19937& rng, double ridge = 0.5) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
  }
  return a * a.transpose() / n + ridge * Eigen::MatrixXd::Identity(n, n);
}

inline Eigen::VectorXd random_vector(int n, std::mt19937& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

}  // namespace ttmpc::testing
