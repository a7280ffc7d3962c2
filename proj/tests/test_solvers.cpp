#include "clgm/solvers.hpp"
#include "clgm/verification.hpp"

#include <gtest/gtest.h>

using namespace clgm;

namespace {

QapInstance unary_only(const MatrixX& u, bool complete) {
  QapInstance inst;
  inst.n1 = static_cast<Index>(u.rows());
  inst.n2 = static_cast<Index>(u.cols());
  inst.unary = u;
  inst.complete = complete;
  return inst;
}

SolverConfig config(SolverKind kind) {
  SolverConfig c;
  c.kind = kind;
  return c;
}

}  // namespace

TEST(Lap, CompleteIdentity) {
  MatrixX u(2, 2);
  u << 0, 1, 1, 0;
  const auto inst = unary_only(u, true);
  const Matching m = solve(inst, config(SolverKind::lap));
  EXPECT_EQ(m, Matching(2, 2, {{0, 0}, {1, 1}}));
  EXPECT_EQ(objective(inst, m), 0.0);
}

TEST(Lap, AllPositiveIncompleteIsEmpty) {
  const auto inst = unary_only(MatrixX::Constant(3, 2, 0.5), false);
  const Matching m = solve(inst, config(SolverKind::lap));
  EXPECT_TRUE(m.empty());
  EXPECT_EQ(objective(inst, m), 0.0);
}

TEST(Lap, HungarianExamples) {
  MatrixX a(2, 2);
  a << 1, 2, 3, 1;
  EXPECT_EQ(solve_lap_hungarian(a, true), Matching(2, 2, {{0, 0}, {1, 1}}));
  EXPECT_EQ(lap_optimum(a, true), 2.0);
  MatrixX b(2, 2);
  b << -1, 5, 5, -1;
  EXPECT_EQ(solve_lap_hungarian(b, false), Matching(2, 2, {{0, 0}, {1, 1}}));
  EXPECT_EQ(lap_optimum(b, false), -2.0);
  EXPECT_EQ(solve_lap_hungarian(MatrixX::Constant(1, 1, -3), false), Matching(1, 1, {{0, 0}}));
}

TEST(Lap, TiesPreferLexicographicallySmallest) {
  EXPECT_EQ(solve_lap_hungarian(MatrixX::Zero(3, 3), true),
            Matching(3, 3, {{0, 0}, {1, 1}, {2, 2}}));
  EXPECT_TRUE(solve_lap_hungarian(MatrixX::Zero(3, 3), false).empty());
}

TEST(Lap, RectangularComplete) {
  const auto inst = unary_only(MatrixX::Zero(2, 3), true);
  EXPECT_THROW(solve(inst, config(SolverKind::lap)), infeasible_instance);
}

TEST(QapExact, AntiDiagonalRewardWins) {
  MatrixX u = MatrixX::Constant(3, 3, 1.0);
  u.diagonal().setConstant(-1.0);
  QapInstance inst = unary_only(u, false);
  inst.pairwise[{0, 2, 2, 0}] = -10.0;
  const Matching m = solve(inst, config(SolverKind::qap_exact));
  EXPECT_TRUE(m.contains(0, 2));
  EXPECT_TRUE(m.contains(2, 0));
  const auto bf = verify::brute_force_qap(inst);
  EXPECT_EQ(m, bf.matching);
  EXPECT_EQ(bf.enumerated, 34);
}

TEST(QapExact, UnaryOnlyMatchesLap) {
  Rng rng = make_rng(3, 0);
  for (int t = 0; t < 20; ++t) {
    const QapInstance inst = verify::random_instance(5, 5, t % 2 == 0, 0.0, rng);
    EXPECT_NEAR(objective(inst, solve_qap_exact(inst)), lap_optimum(inst.unary, inst.complete), 1e-9);
  }
}

TEST(QapExact, AllZeroIncompleteIsEmpty) {
  QapInstance inst = unary_only(MatrixX::Zero(4, 4), false);
  inst.pairwise[{0, 1, 0, 1}] = 0.0;
  EXPECT_TRUE(solve_qap_exact(inst).empty());
}

TEST(QapExact, RandomFiveByFiveMatchesEnumeration) {
  Rng rng = make_rng(4, 0);
  for (int t = 0; t < 10; ++t) {
    const QapInstance inst = verify::random_instance(5, 5, t % 2 == 1, 0.3, rng);
    const Matching m = solve_qap_exact(inst);
    const auto bf = verify::brute_force_qap(inst);
    EXPECT_NEAR(objective(inst, m), bf.objective, 1e-9);
    EXPECT_EQ(m, bf.matching);
  }
}

TEST(QapExact, RefusesOversizeInstances) {
  const auto inst = unary_only(MatrixX::Zero(9, 9), true);
  EXPECT_THROW(solve(inst, config(SolverKind::qap_exact)), solver_refusal);
  SolverConfig c = config(SolverKind::qap_exact);
  c.node_limit = 9;
  EXPECT_NO_THROW(solve(inst, c));
}

TEST(QapLocal, UnaryOnlyIsLapOptimum) {
  Rng rng = make_rng(5, 0);
  for (int t = 0; t < 20; ++t) {
    const QapInstance inst = verify::random_instance(6, 5, false, 0.0, rng);
    EXPECT_EQ(solve(inst, config(SolverKind::qap_local)), solve_lap_hungarian(inst.unary, false));
  }
}

TEST(QapLocal, FindsRewardedSwap) {
  MatrixX u = MatrixX::Constant(4, 4, 0.5);
  u.diagonal().setConstant(-0.5);
  QapInstance inst = unary_only(u, true);
  inst.pairwise[{0, 1, 1, 0}] = -5.0;
  const Matching m = solve(inst, config(SolverKind::qap_local));
  EXPECT_NEAR(objective(inst, m), verify::brute_force_qap(inst).objective, 1e-9);
}

TEST(QapLocal, DeterministicForFixedSeed) {
  Rng rng = make_rng(6, 0);
  const QapInstance inst = verify::random_instance(7, 7, false, 0.5, rng);
  SolverConfig c = config(SolverKind::qap_local);
  c.local_search.rng_seed = 42;
  EXPECT_EQ(solve(inst, c), solve(inst, c));
}

TEST(QapLocal, WarmStartIsSingleDescent) {
  Rng rng = make_rng(7, 0);
  const QapInstance inst = verify::random_instance(6, 6, true, 0.5, rng);
  const Matching start = verify::random_matching(6, 6, rng, true);
  LocalSearchTrace trace;
  const Matching m = solve_qap_local(inst, config(SolverKind::qap_local), start, &trace);
  ASSERT_EQ(trace.runs.size(), 1u);
  EXPECT_NEAR(trace.runs[0].front(), objective(inst, start), 1e-12);
  EXPECT_LE(objective(inst, m), objective(inst, start) + 1e-12);
}

// Properties

TEST(SolverProperties, ExactMatchesEnumeration) {
  Rng rng = make_rng(21, 0);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<Index> size(1, 6);
    const bool complete = t % 2 == 0;
    const Index n1 = size(rng), n2 = complete ? n1 : size(rng);
    const QapInstance inst = verify::random_instance(n1, n2, complete, 0.3, rng);
    const Matching m = solve_qap_exact(inst);
    ASSERT_TRUE(validate_matching(m, inst));
    EXPECT_NEAR(objective(inst, m), verify::brute_force_qap(inst).objective, 1e-9);
  }
}

TEST(SolverProperties, HungarianMatchesPermutations) {
  Rng rng = make_rng(22, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Index n = 1 + t % 7;
    MatrixX c(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) c(i, j) = u(rng);
    const Matching m = solve_lap_hungarian(c, true);
    double v = 0.0;
    for (auto [i, s] : m.pairs()) v += c(i, s);
    EXPECT_EQ(v, verify::brute_force_lap(c));
  }
}

TEST(SolverProperties, LocalSearchMovesStrictlyImprove) {
  Rng rng = make_rng(23, 0);
  for (int t = 0; t < 50; ++t) {
    const QapInstance inst = verify::random_instance(6, 6, t % 2 == 0, 0.5, rng);
    SolverConfig c = config(SolverKind::qap_local);
    c.local_search.rng_seed = static_cast<std::uint64_t>(t);
    LocalSearchTrace trace;
    const Matching m = solve_qap_local(inst, c, std::nullopt, &trace);
    ASSERT_FALSE(trace.runs.empty());
    for (const auto& run : trace.runs)
      for (std::size_t k = 1; k < run.size(); ++k) EXPECT_LT(run[k], run[k - 1] - c.tolerance);
    const Matching seed = solve_lap_hungarian(inst.unary, inst.complete);
    EXPECT_LE(objective(inst, m), objective(inst, seed) + 1e-12);
    EXPECT_TRUE(validate_matching(m, inst));
  }
}

TEST(SolverProperties, OutputIndependentOfCallHistory) {
  Rng rng = make_rng(24, 0);
  const QapInstance a = verify::random_instance(5, 5, false, 0.5, rng);
  const QapInstance b = verify::random_instance(6, 4, false, 0.5, rng);
  for (auto kind : {SolverKind::lap, SolverKind::qap_exact, SolverKind::qap_local}) {
    const Matching first = solve(a, config(kind));
    solve(b, config(kind));
    EXPECT_EQ(solve(a, config(kind)), first);
  }
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  c.node_limit = 0;
  EXPECT_THROW(validate(c), precondition_error);
  c = {};
  c.tolerance = 0.0;
  EXPECT_THROW(validate(c), precondition_error);
  EXPECT_EQ(solver_kind_from_string("qap_exact"), SolverKind::qap_exact);
  EXPECT_THROW(solver_kind_from_string("gurobi"), precondition_error);
}
