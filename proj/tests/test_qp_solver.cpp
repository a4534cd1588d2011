#include "ttmpc/qp_solver.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"

using namespace ttmpc;

namespace {

QpProblem one_dim_problem(double lower, double upper) {
  QpProblem p;
  p.H = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.g = Eigen::VectorXd::Constant(1, -1.0);
  p.lower = Eigen::VectorXd::Constant(1, lower);
  p.upper = Eigen::VectorXd::Constant(1, upper);
  p.G.resize(0, 1);
  p.h.resize(0);
  return p;
}

QpProblem random_box_problem(int n, std::mt19937& rng) {
  QpProblem p;
  p.H = testing::random_spd(n, rng);
  p.g = testing::random_vector(n, rng, 2.0);
  p.lower = Eigen::VectorXd::Constant(n, -1.0) +
            testing::random_vector(n, rng, 0.3).cwiseMin(0.0);
  p.upper = Eigen::VectorXd::Constant(n, 1.0) +
            testing::random_vector(n, rng, 0.3).cwiseMax(0.0);
  p.G.resize(0, n);
  p.h.resize(0);
  return p;
}

}  // namespace

TEST_CASE("qp: one-dimensional interior optimum") {
  const QpProblem p = one_dim_problem(-10.0, 10.0);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::kOptimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.objective == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(s.kkt_residual < 1e-10);
  CHECK(s.active_set_size == 0);
}

TEST_CASE("qp: one-dimensional optimum clipped at the upper bound") {
  const QpProblem p = one_dim_problem(-10.0, 0.5);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::kOptimal);
  CHECK(s.x(0) == 0.5);
  CHECK(s.kkt_residual < 1e-10);
  CHECK(s.active_set_size == 1);
}

TEST_CASE("qp: kkt residual examples") {
  const QpProblem p = one_dim_problem(-10.0, 10.0);
  CHECK(kkt_residual(p, Eigen::VectorXd::Zero(1)) == doctest::Approx(1.0));
  CHECK(kkt_residual(p, Eigen::VectorXd::Constant(1, 1.0)) < 1e-12);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  const QpSolution s = solve_qp(p);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, dist(rng));
    CHECK(kkt_residual(p, x) >= s.kkt_residual);
  }
}

TEST_CASE("qp: random box problems match the projected-gradient oracle") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> size(1, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const QpProblem p = random_box_problem(size(rng), rng);
    const QpSolution s = solve_qp(p);
    REQUIRE(s.status == QpStatus::kOptimal);
    CHECK(s.kkt_residual < 1e-8);
    const Eigen::VectorXd oracle =
        testing::projected_gradient_box_qp(p.H, p.g, p.lower, p.upper);
    CHECK((s.x - oracle).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("qp: objective is minimal over random feasible points") {
  std::mt19937 rng(23);
  const QpProblem p = random_box_problem(6, rng);
  const QpSolution s = solve_qp(p);
  REQUIRE(s.status == QpStatus::kOptimal);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x(p.n());
    for (Eigen::Index j = 0; j < p.n(); ++j) {
      x(j) = p.lower(j) + unit(rng) * (p.upper(j) - p.lower(j));
    }
    const double obj = 0.5 * x.dot(p.H * x) + p.g.dot(x);
    CHECK(obj >= s.objective - 1e-10);
  }
}

TEST_CASE("qp: warm start does not change the solution") {
  std::mt19937 rng(29);
  const QpProblem p = random_box_problem(7, rng);
  const QpSolution cold = solve_qp(p);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd warm = testing::random_vector(7, rng, 3.0);
    const QpSolution s = solve_qp(p, warm);
    CHECK((s.x - cold.x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("qp: solution invariant under positive scaling of H and g") {
  std::mt19937 rng(31);
  const QpProblem p = random_box_problem(5, rng);
  const QpSolution base = solve_qp(p);
  for (double scale : {1e-3, 0.5, 7.0, 2.5e4}) {
    QpProblem ps = p;
    ps.H *= scale;
    ps.g *= scale;
    const QpSolution s = solve_qp(ps);
    CHECK((s.x - base.x).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("qp: degenerate bounds are eliminated as equality clamps") {
  QpProblem p;
  p.H = Eigen::MatrixXd::Identity(3, 3);
  p.g = Eigen::VectorXd::Constant(3, -1.0);
  p.lower = Eigen::VectorXd::Constant(3, -5.0);
  p.upper = Eigen::VectorXd::Constant(3, 5.0);
  p.lower(1) = 0.3;
  p.upper(1) = 0.3;
  p.G.resize(0, 3);
  p.h.resize(0);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::kOptimal);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.x(1) == 0.3);
  CHECK(s.x(2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("qp: general inequality row becomes active") {
  QpProblem p;
  p.H = Eigen::MatrixXd::Identity(2, 2);
  p.g = Eigen::VectorXd::Constant(2, -1.0);
  p.lower = Eigen::VectorXd::Constant(2, -10.0);
  p.upper = Eigen::VectorXd::Constant(2, 10.0);
  p.G = Eigen::MatrixXd::Ones(1, 2);
  p.h = Eigen::VectorXd::Constant(1, 1.0);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::kOptimal);
  CHECK(s.x(0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.x(1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(s.kkt_residual < 1e-8);
  CHECK(s.active_set_size == 1);
}

TEST_CASE("qp: inconsistent general rows are reported infeasible") {
  QpProblem p = one_dim_problem(-10.0, 10.0);
  p.G = Eigen::MatrixXd::Ones(1, 1);
  p.h = Eigen::VectorXd::Constant(1, -20.0);
  const QpSolution s = solve_qp(p);
  CHECK(s.status == QpStatus::kInfeasible);
}

TEST_CASE("qp: structural errors are rejected") {
  QpProblem p = one_dim_problem(-1.0, 1.0);
  p.H(0, 0) = 0.0;
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);

  QpProblem q = one_dim_problem(1.0, -1.0);
  CHECK_THROWS_AS(solve_qp(q), std::invalid_argument);

  QpProblem r;
  r.H = Eigen::MatrixXd::Identity(2, 2);
  r.H(0, 1) = 0.5;
  r.g = Eigen::VectorXd::Zero(2);
  r.lower = Eigen::VectorXd::Constant(2, -1.0);
  r.upper = Eigen::VectorXd::Constant(2, 1.0);
  r.G.resize(0, 2);
  r.h.resize(0);
  CHECK_THROWS_AS(solve_qp(r), std::invalid_argument);
}
