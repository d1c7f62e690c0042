#include "socnav/baselines.hpp"
#include "socnav/convex.hpp"
#include "socnav/dynamics.hpp"
#include "socnav/planner.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace socnav;

void BM_Step(benchmark::State& state) {
  const Limits lim;
  AgentState s{0.0, 0.0, 0.3, 1.0};
  const AgentControl u{0.4, 0.2};
  for (auto _ : state) {
    s = step(s, u, 0.1, lim);
    if (s.v > 1.4) s.v = 1.0;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_Step);

void BM_Linearize(benchmark::State& state) {
  const AgentState s{0.0, 0.0, 0.3, 1.0};
  const AgentControl u{0.4, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(linearize(s, u, 0.1));
}
BENCHMARK(BM_Linearize);

// Banded strictly convex QP of trajectory size with equalities, inequalities, bounds and
// optionally one quadratic constraint.
ConvexProgram banded_qp(int n, bool quadratic) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ConvexProgram p(n);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, 1.0);
      t.emplace_back(i + 1, i, 1.0);
    }
    p.q[i] = U(rng);
  }
  p.P.setFromTriplets(t.begin(), t.end());
  const int m_eq = n / 5, m_in = n / 4;
  t.clear();
  p.A.resize(m_eq, n);
  for (int r = 0; r < m_eq; ++r) {
    t.emplace_back(r, 5 * r, 1.0);
    t.emplace_back(r, 5 * r + 1, -1.0);
  }
  p.A.setFromTriplets(t.begin(), t.end());
  p.b = Eigen::VectorXd::Zero(m_eq);
  t.clear();
  p.G.resize(m_in, n);
  for (int r = 0; r < m_in; ++r) {
    t.emplace_back(r, (3 * r) % n, U(rng));
    t.emplace_back(r, (3 * r + 7) % n, U(rng));
  }
  p.G.setFromTriplets(t.begin(), t.end());
  p.h = Eigen::VectorXd::Constant(m_in, 0.5);
  p.lower = Eigen::VectorXd::Constant(n, -2.0);
  p.upper = Eigen::VectorXd::Constant(n, 2.0);
  if (quadratic) {
    QuadraticConstraint qc;
    qc.Q.resize(n, n);
    qc.Q.setIdentity();
    qc.g = Eigen::VectorXd::Zero(n);
    qc.c = -0.5;
    p.quadratic.push_back(qc);
  }
  return p;
}

void BM_QpSolve(benchmark::State& state) {
  const ConvexProgram p = banded_qp(static_cast<int>(state.range(0)), state.range(1) != 0);
  SolverSettings s;
  s.check_convexity = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve(p, std::nullopt, s));
}
BENCHMARK(BM_QpSolve)->Args({200, 0})->Args({200, 1})->Args({400, 1})->Unit(benchmark::kMicrosecond);

IbrProblem headon_problem(int peripherals) {
  IbrProblem p;
  p.robot_state = {0.0, 0.0, 0.0, 1.0};
  p.robot_goal = {10.0, 0.0};
  p.human_state = {8.0, 0.3, 3.1, 1.0};
  p.human_goal = {-2.0, 0.3};
  p.robot_config = ours_config();
  p.human_model_config = ours_config();
  for (int k = 0; k < peripherals; ++k) {
    p.peripherals.push_back({{2.0 + 2.0 * k, 6.0 + k}, {0.0, -0.3}});
  }
  return p;
}

void BM_IbrPlan(benchmark::State& state) {
  const IbrProblem p = headon_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ibr_plan(p));
}
BENCHMARK(BM_IbrPlan)->Arg(0)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
