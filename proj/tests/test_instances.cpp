#include "clgm/instances.hpp"
#include "clgm/random.hpp"
#include "clgm/verification.hpp"

#include <gtest/gtest.h>

using namespace clgm;

TEST(Matching, IdentityIsValid) {
  EXPECT_TRUE(validate_matching(Matching(2, 2, {{0, 0}, {1, 1}}), true));
}

TEST(Matching, ColumnUsedTwiceIsInvalid) {
  EXPECT_FALSE(validate_matching(Matching(2, 2, {{0, 0}, {1, 0}})));
}

TEST(Matching, EmptyIsValidWhenIncomplete) {
  EXPECT_TRUE(validate_matching(Matching(3, 2, {})));
  EXPECT_FALSE(validate_matching(Matching(2, 2, {}), true));
}

TEST(Matching, OutOfRangePairRejected) {
  EXPECT_THROW(Matching(2, 2, {{0, 2}}), precondition_error);
}

TEST(Matching, DenseAndTransposeViews) {
  const Matching m(2, 3, {{1, 2}, {0, 0}});
  EXPECT_EQ(m.pairs().front(), Assignment(0, 0));
  EXPECT_EQ(m.dense()(1, 2), 1.0);
  EXPECT_EQ(m.dense().sum(), 2.0);
  EXPECT_EQ(m.transposed().transposed(), m);
  EXPECT_EQ(m.row_to_col(), (std::vector<Index>{0, 2}));
  EXPECT_EQ(m.col_to_row(), (std::vector<Index>{0, -1, 1}));
}

QapInstance two_by_two() {
  QapInstance inst;
  inst.n1 = inst.n2 = 2;
  inst.unary = MatrixX::Zero(2, 2);
  return inst;
}

TEST(Lift, EmptyMatchingGivesEmptyY) {
  QapInstance inst = two_by_two();
  inst.pairwise[{0, 1, 0, 1}] = 1.0;
  EXPECT_TRUE(lift(Matching(2, 2), inst).y.empty());
}

TEST(Lift, IdentityActivatesItsKey) {
  QapInstance inst = two_by_two();
  inst.pairwise[{0, 1, 0, 1}] = 1.0;
  const auto l = lift(Matching(2, 2, {{0, 0}, {1, 1}}), inst);
  ASSERT_EQ(l.y.size(), 1u);
  EXPECT_EQ(l.y[0], (PairKey{0, 1, 0, 1}));
}

TEST(Lift, SwapOnlyActivatesPresentKeys) {
  QapInstance inst = two_by_two();
  inst.pairwise[{0, 1, 0, 1}] = 1.0;
  const Matching swap(2, 2, {{0, 1}, {1, 0}});
  EXPECT_TRUE(lift(swap, inst).y.empty());
  inst.pairwise[{0, 1, 1, 0}] = 2.0;
  const auto l = lift(swap, inst);
  ASSERT_EQ(l.y.size(), 1u);
  EXPECT_EQ(l.y[0], (PairKey{0, 1, 1, 0}));
}

TEST(Lift, InvalidMatchingRejected) {
  EXPECT_THROW(lift(Matching(2, 2, {{0, 0}, {1, 0}}), two_by_two()), precondition_error);
}

TEST(Objective, Examples) {
  QapInstance inst = two_by_two();
  EXPECT_EQ(objective(inst, Matching(2, 2)), 0.0);
  inst.unary << 1, 0, 0, 2;
  EXPECT_EQ(objective(inst, Matching(2, 2, {{0, 0}, {1, 1}})), 3.0);
  inst.unary.setZero();
  inst.pairwise[{0, 1, 0, 1}] = 5.0;
  EXPECT_EQ(objective(inst, Matching(2, 2, {{0, 0}, {1, 1}})), 5.0);
  EXPECT_THROW(objective(inst, Matching(2, 2, {{0, 0}, {1, 0}})), precondition_error);
}

TEST(Validate, RejectsBadInstances) {
  QapInstance inst = two_by_two();
  inst.pairwise[{1, 0, 0, 1}] = 1.0;
  EXPECT_THROW(validate(inst), precondition_error);
  inst = two_by_two();
  inst.pairwise[{0, 1, 1, 1}] = 1.0;
  EXPECT_THROW(validate(inst), precondition_error);
  inst = two_by_two();
  inst.unary(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(inst), precondition_error);
}

TEST(Validate, RejectsBadKeypointSets) {
  KeypointSet ks;
  ks.points = Points2::Zero(3, 2);
  ks.features = MatrixX::Zero(3, 2);
  ks.edges = {{0, 1}, {1, 0}};
  EXPECT_THROW(validate(ks), precondition_error);
  ks.edges = {{0, 0}};
  EXPECT_THROW(validate(ks), precondition_error);
  ks.edges = {{0, 3}};
  EXPECT_THROW(validate(ks), precondition_error);
  ks.edges = {{0, 1}, {1, 2}};
  EXPECT_NO_THROW(validate(ks));
  ks.features = MatrixX::Zero(2, 2);
  EXPECT_THROW(validate(ks), precondition_error);
}

// Properties

TEST(InstanceProperties, ObjectiveEqualsLinearizedForm) {
  Rng rng = make_rng(11, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n1 = 1 + trial % 6, n2 = 1 + (trial / 6) % 6;
    const QapInstance inst = verify::random_instance(n1, n2, false, 0.5, rng);
    const Matching m = verify::random_matching(n1, n2, rng);
    const auto l = lift(m, inst);
    EXPECT_NEAR(objective(inst, m), linear_objective(inst, l), 1e-12);
    EXPECT_NEAR(objective(inst, m), verify::dense_objective(inst, m.row_to_col()), 1e-12);
    EXPECT_EQ(lift(l.x, inst).y, l.y);
  }
}

TEST(InstanceProperties, DuplicatedIndexIsRejected) {
  Rng rng = make_rng(12, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 5;
    const Matching m = verify::random_matching(n, n, rng, true);
    auto pairs = m.pairs();
    std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (b == a) b = (a + 1) % pairs.size();
    if (trial % 2) pairs[b].first = pairs[a].first;
    else pairs[b].second = pairs[a].second;
    EXPECT_FALSE(validate_matching(Matching(n, n, pairs)));
  }
}
