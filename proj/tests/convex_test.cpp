#include "socnav/convex.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"

namespace socnav {
namespace {

SparseMatrix sparse(const Eigen::MatrixXd& dense) { return dense.sparseView(); }

ConvexProgram from_dense(const oracle::DenseQp& qp) {
  ConvexProgram prog(static_cast<int>(qp.q.size()));
  prog.P = sparse(qp.P);
  prog.q = qp.q;
  prog.G = sparse(qp.G);
  prog.h = qp.h;
  prog.A = sparse(qp.A);
  prog.b = qp.b;
  return prog;
}

TEST(Solve, ScalarWithLowerBound) {
  ConvexProgram prog(1);
  prog.P = sparse(Eigen::MatrixXd::Constant(1, 1, 2.0));
  prog.lower[0] = 1.0;
  const SolveResult r = solve(prog, std::nullopt, 1e-8);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_NEAR(r.objective, 1.0, 1e-6);
}

TEST(Solve, ProjectionOntoHalfSpace) {
  const Eigen::Vector3d z0(1.0, 2.0, -0.5);
  const Eigen::Vector3d a(0.5, 1.0, 2.0);
  const double b = 0.3;
  ASSERT_GT(a.dot(z0), b);
  ConvexProgram prog(3);
  prog.P = sparse(2.0 * Eigen::MatrixXd::Identity(3, 3));
  prog.q = -2.0 * z0;
  prog.constant = z0.squaredNorm();
  prog.G = sparse(a.transpose());
  prog.h = Eigen::VectorXd::Constant(1, b);
  const SolveResult r = solve(prog, std::nullopt, 1e-9);
  ASSERT_TRUE(r.optimal());
  const Eigen::Vector3d expected = z0 - (a.dot(z0) - b) / a.squaredNorm() * a;
  EXPECT_LT((r.x - expected).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(r.objective, std::pow(a.dot(z0) - b, 2) / a.squaredNorm(), 1e-6);
}

TEST(Solve, ProjectionOntoBallUsesQuadraticConstraint) {
  // minimize |x - z0|^2 s.t. |x|^2 <= 1  ->  x = z0 / |z0|
  const Eigen::Vector2d z0(3.0, 4.0);
  ConvexProgram prog(2);
  prog.P = sparse(2.0 * Eigen::MatrixXd::Identity(2, 2));
  prog.q = -2.0 * z0;
  QuadraticConstraint ball;
  ball.Q = sparse(2.0 * Eigen::MatrixXd::Identity(2, 2));
  ball.g = Eigen::VectorXd::Zero(2);
  ball.c = -1.0;
  ball.label = "ball";
  prog.quadratic.push_back(ball);
  const SolveResult r = solve(prog, std::nullopt, 1e-9);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.x[0], 0.6, 1e-6);
  EXPECT_NEAR(r.x[1], 0.8, 1e-6);
  EXPECT_LE(r.max_violation, 1e-9);
}

TEST(Solve, EqualityConstrainedLeastNorm) {
  ConvexProgram prog(3);
  prog.P = sparse(2.0 * Eigen::MatrixXd::Identity(3, 3));
  prog.A = sparse(Eigen::RowVector3d(1.0, 1.0, 1.0));
  prog.b = Eigen::VectorXd::Constant(1, 3.0);
  const SolveResult r = solve(prog, std::nullopt, 1e-9);
  ASSERT_TRUE(r.optimal());
  EXPECT_LT((r.x - Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(Solve, ReportsInfeasibleWithoutThrowing) {
  ConvexProgram prog(1);
  prog.P = sparse(Eigen::MatrixXd::Constant(1, 1, 2.0));
  prog.G = sparse((Eigen::MatrixXd(2, 1) << -1.0, 1.0).finished());
  prog.h = Eigen::Vector2d(-1.0, 0.0);  // x >= 1 and x <= 0
  const SolveResult r = solve(prog, std::nullopt, 1e-8);
  EXPECT_EQ(r.status, SolveStatus::kInfeasible);
}

TEST(Solve, InvertedBoundsAreInfeasible) {
  ConvexProgram prog(1);
  prog.P = sparse(Eigen::MatrixXd::Constant(1, 1, 2.0));
  prog.lower[0] = 1.0;
  prog.upper[0] = 0.0;
  EXPECT_EQ(solve(prog, std::nullopt, 1e-8).status, SolveStatus::kInfeasible);
}

TEST(Solve, RejectsNonConvexObjective) {
  ConvexProgram prog(2);
  prog.P = sparse((Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, -1.0).finished());
  EXPECT_THROW(solve(prog, std::nullopt, 1e-8), std::invalid_argument);
}

TEST(Solve, RandomSmallProgramsMatchActiveSetEnumeration) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 4;
    const int m = 3 + trial % 5;
    oracle::DenseQp qp;
    Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
    qp.P = M.transpose() * M + 0.5 * Eigen::MatrixXd::Identity(n, n);
    qp.q = Eigen::VectorXd::NullaryExpr(n, [&] { return 3.0 * g(rng); });
    qp.G = Eigen::MatrixXd::NullaryExpr(m, n, [&] { return g(rng); });
    qp.h = Eigen::VectorXd::NullaryExpr(m, [&] { return std::abs(g(rng)); });  // x = 0 feasible
    qp.A.resize(trial % 2, n);
    qp.b.resize(trial % 2);
    if (trial % 2) {
      qp.A.row(0) = Eigen::RowVectorXd::NullaryExpr(n, [&] { return g(rng); });
      qp.b[0] = 0.0;
    }
    const double expected = oracle::enumerate_active_sets(qp);
    const SolveResult r = solve(from_dense(qp), std::nullopt, 1e-9);
    ASSERT_TRUE(r.optimal()) << "trial " << trial;
    EXPECT_NEAR(r.objective, expected, 1e-4 * std::max(1.0, std::abs(expected))) << "trial " << trial;
  }
}

TEST(Solve, ThirtyVariableBoxQpMatchesCoordinateDescent) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const int n = 30;
  Eigen::MatrixXd M = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
  const Eigen::MatrixXd P = M.transpose() * M / n + Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(n, [&] { return 2.0 * g(rng); });
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -0.5);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 0.7);
  const Eigen::VectorXd x_ref = oracle::box_qp_coordinate_descent(P, q, lo, hi);
  const double expected = 0.5 * x_ref.dot(P * x_ref) + q.dot(x_ref);

  ConvexProgram prog(n);
  prog.P = sparse(P);
  prog.q = q;
  prog.lower = lo;
  prog.upper = hi;
  const SolveResult r = solve(prog, std::nullopt, 1e-9);
  ASSERT_TRUE(r.optimal());
  EXPECT_NEAR(r.objective, expected, 1e-4 * std::abs(expected));
}

TEST(Solve, DeterministicAndWarmStartInvariant) {
  ConvexProgram prog(4);
  prog.P = sparse(Eigen::Vector4d(1, 2, 3, 4).asDiagonal().toDenseMatrix());
  prog.q = Eigen::Vector4d(-1, 1, -2, 2);
  prog.lower = Eigen::VectorXd::Constant(4, -0.2);
  const SolveResult a = solve(prog, std::nullopt, 1e-9);
  const SolveResult b = solve(prog, std::nullopt, 1e-9);
  EXPECT_EQ(a.x, b.x);
  const SolveResult warm = solve(prog, Eigen::VectorXd::Constant(4, 0.3), 1e-9);
  ASSERT_TRUE(warm.optimal());
  EXPECT_NEAR(warm.objective, a.objective, 1e-7);
  EXPECT_LE(a.duality_gap, 1e-9 * (1.0 + std::abs(a.objective)));
}

TEST(CheckFeasibility, FeasiblePointHasNonPositiveViolations) {
  ConvexProgram prog(2);
  prog.P = sparse(Eigen::MatrixXd::Identity(2, 2));
  prog.A = sparse(Eigen::RowVector2d(1.0, -1.0));
  prog.b = Eigen::VectorXd::Zero(1);
  prog.G = sparse(Eigen::RowVector2d(1.0, 1.0));
  prog.h = Eigen::VectorXd::Constant(1, 4.0);
  prog.lower = Eigen::Vector2d(-1.0, -1.0);
  const FeasibilityReport rep = check_feasibility(prog, Eigen::Vector2d(1.0, 1.0));
  EXPECT_LE(rep.equality, 0.0);
  EXPECT_LE(rep.inequality, 0.0);
  EXPECT_LE(rep.bounds, 0.0);
  EXPECT_LE(rep.max(), 0.0);
}

TEST(CheckFeasibility, ReportsConstructedViolation) {
  ConvexProgram prog(2);
  prog.G = sparse((Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 1.0).finished());
  prog.h = Eigen::Vector2d(1.0, 1.0);
  const FeasibilityReport rep = check_feasibility(prog, Eigen::Vector2d(1.5, 0.0));
  EXPECT_NEAR(rep.inequality, 0.5, 1e-12);
  EXPECT_THROW(check_feasibility(prog, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST(Dump, WritesSelfDescribingJson) {
  ConvexProgram prog(2);
  prog.P = sparse(Eigen::MatrixXd::Identity(2, 2));
  prog.upper[1] = 3.0;
  prog.variable_names = {"a", "b"};
  std::ostringstream out;
  dump(prog, out);
  const auto doc = nlohmann::json::parse(out.str());
  EXPECT_EQ(doc["format"], "socnav-convex-program");
  EXPECT_EQ(doc["num_variables"], 2);
  EXPECT_TRUE(doc["bounds"]["lower"][0].is_null());
  EXPECT_EQ(doc["bounds"]["upper"][1], 3.0);
  EXPECT_EQ(doc["objective"]["P"]["entries"].size(), 2u);
}

}  // namespace
}  // namespace socnav
