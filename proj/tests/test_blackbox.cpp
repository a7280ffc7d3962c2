#include "clgm/blackbox.hpp"
#include "clgm/cycleloss.hpp"
#include "clgm/solvers.hpp"
#include "clgm/verification.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace clgm;

namespace {

QapInstance zeros(Index n1, Index n2) {
  QapInstance inst;
  inst.n1 = n1;
  inst.n2 = n2;
  inst.unary = MatrixX::Zero(n1, n2);
  return inst;
}

bool bitwise_equal(const MatrixX& a, const MatrixX& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(Perturb, ZeroGradientLeavesInstanceUnchanged) {
  Rng rng = make_rng(1, 0);
  const QapInstance inst = verify::random_instance(4, 3, false, 0.5, rng);
  const QapInstance out = perturb_costs(inst, {MatrixX::Zero(4, 3)}, 80.0);
  EXPECT_TRUE(bitwise_equal(out.unary, inst.unary));
  EXPECT_EQ(out.pairwise, inst.pairwise);
}

TEST(Perturb, LambdaEightyRaisesOneEntry) {
  QapInstance inst = zeros(2, 2);
  inst.pairwise[{0, 1, 0, 1}] = 0.25;
  LossGrad g{MatrixX::Zero(2, 2)};
  g.unary(0, 0) = 1.0;
  const QapInstance out = perturb_costs(inst, g, 80.0);
  EXPECT_EQ(out.unary(0, 0), 80.0);
  EXPECT_EQ(out.unary.sum(), 80.0);
  EXPECT_EQ(out.pairwise, inst.pairwise);
}

TEST(Perturb, NegativeGradientLowersEverything) {
  const QapInstance out = perturb_costs(zeros(2, 3), {MatrixX::Constant(2, 3, -1.0)}, 2.0);
  EXPECT_TRUE(out.unary.isApproxToConstant(-2.0));
}

TEST(Perturb, RejectsBadArguments) {
  EXPECT_THROW(perturb_costs(zeros(2, 2), {MatrixX::Zero(2, 3)}, 1.0), precondition_error);
  EXPECT_THROW(perturb_costs(zeros(2, 2), {MatrixX::Zero(2, 2)}, 0.0), precondition_error);
}

TEST(BbGradient, SameSolutionGivesZero) {
  const QapInstance inst = zeros(2, 2);
  const auto x = lift(Matching(2, 2, {{0, 0}}), inst);
  const CostGradient g = bb_gradient(inst, x, x, 80.0);
  EXPECT_TRUE(g.unary.isZero(0.0));
}

TEST(BbGradient, MovedAssignment) {
  const QapInstance inst = zeros(2, 2);
  const auto x = lift(Matching(2, 2, {{0, 0}}), inst);
  const auto xp = lift(Matching(2, 2, {{0, 1}}), inst);
  const CostGradient g = bb_gradient(inst, x, xp, 80.0);
  EXPECT_EQ(g.unary(0, 0), -1.0 / 80.0);
  EXPECT_EQ(g.unary(0, 1), 1.0 / 80.0);
  EXPECT_EQ(g.unary.cwiseAbs().sum(), 2.0 / 80.0);
}

TEST(BbGradient, TranspositionLambdaOne) {
  QapInstance inst = zeros(2, 2);
  inst.complete = true;
  inst.pairwise[{0, 1, 0, 1}] = 0.0;
  inst.pairwise[{0, 1, 1, 0}] = 0.0;
  const auto x = lift(Matching(2, 2, {{0, 0}, {1, 1}}), inst);
  const auto xp = lift(Matching(2, 2, {{0, 1}, {1, 0}}), inst);
  const CostGradient g = bb_gradient(inst, x, xp, 1.0);
  MatrixX expect(2, 2);
  expect << -1, 1, 1, -1;
  EXPECT_EQ(g.unary, expect);
  EXPECT_EQ(g.pairwise.at({0, 1, 0, 1}), -1.0);
  EXPECT_EQ(g.pairwise.at({0, 1, 1, 0}), 1.0);
  const CostGradient unary_only = bb_gradient(inst, x, xp, 1.0, false);
  for (const auto& [k, v] : unary_only.pairwise) EXPECT_EQ(v, 0.0);
}

// Properties

TEST(BlackboxProperties, RangeOfGradientEntries) {
  Rng rng = make_rng(31, 0);
  SolverConfig exact;
  exact.kind = SolverKind::qap_exact;
  const double lambda = 80.0;
  for (int t = 0; t < 100; ++t) {
    const QapInstance inst = verify::random_instance(4, 4, t % 2 == 0, 0.5, rng);
    LossGrad g{MatrixX::Zero(4, 4)};
    std::uniform_int_distribution<int> v(-1, 2);
    for (Index i = 0; i < 4; ++i)
      for (Index s = 0; s < 4; ++s) g.unary(i, s) = v(rng) / 80.0;
    const auto x = lift(solve(inst, exact), inst);
    const QapInstance pert = perturb_costs(inst, g, lambda);
    const auto xp = lift(solve(pert, exact), pert);
    const CostGradient cg = bb_gradient(inst, x, xp, lambda);
    for (Index i = 0; i < 4; ++i)
      for (Index s = 0; s < 4; ++s) {
        const double e = cg.unary(i, s) * lambda;
        EXPECT_TRUE(e == 0.0 || e == 1.0 || e == -1.0);
      }
    for (const auto& [k, val] : cg.pairwise) {
      const double e = val * lambda;
      EXPECT_TRUE(e == 0.0 || e == 1.0 || e == -1.0);
    }
  }
}

// The interpolated loss f_lambda(c) = L(x(c_lambda)) + (1/lambda)<c_lambda - c, ...>
// is a piecewise affine function whose slope along a direction is the
// bb gradient. For a linear loss L(x) = <g, x> the perturbed solution never
// has a larger loss than the forward one, so <bb_gradient, g> <= 0.
TEST(BlackboxProperties, PerturbedSolutionNeverIncreasesLinearLoss) {
  Rng rng = make_rng(32, 0);
  SolverConfig lap;
  lap.kind = SolverKind::lap;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const QapInstance inst = verify::random_instance(3, 3, t % 2 == 0, 0.0, rng);
    LossGrad g{MatrixX(3, 3)};
    for (Index i = 0; i < 3; ++i)
      for (Index s = 0; s < 3; ++s) g.unary(i, s) = u(rng);
    const auto x = lift(solve(inst, lap), inst);
    const auto xp = lift(solve(perturb_costs(inst, g, 0.7), lap), inst);
    const CostGradient cg = bb_gradient(inst, x, xp, 0.7);
    EXPECT_LE((cg.unary.array() * g.unary.array()).sum(), 1e-12);
    // brute-force check that x(c^lambda) minimizes <c + lambda g, x>
    double best = std::numeric_limits<double>::infinity();
    verify::for_each_matching(3, 3, inst.complete, [&](const std::vector<Index>& r) {
      double v = 0.0;
      for (Index i = 0; i < 3; ++i)
        if (r[i] >= 0) v += inst.unary(i, r[i]) + 0.7 * g.unary(i, r[i]);
      best = std::min(best, v);
    });
    double got = 0.0;
    for (auto [i, s] : xp.x.pairs()) got += inst.unary(i, s) + 0.7 * g.unary(i, s);
    EXPECT_NEAR(got, best, 1e-12);
  }
}
