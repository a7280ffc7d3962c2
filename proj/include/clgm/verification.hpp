#pragma once

// Independent reference implementations used to verify the solvers, the
// cycle loss, the triangulation and the cost-head gradients. Everything
// here is deliberately brute force.

#include "clgm/blackbox.hpp"
#include "clgm/costmodel.hpp"
#include "clgm/cycleloss.hpp"
#include "clgm/instances.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace clgm::verify {

/// Calls fn(row_to_col) for every feasible matching: all partial injections
/// when incomplete, all permutations when complete (n1 == n2).
void for_each_matching(Index n1, Index n2, bool complete,
                       const std::function<void(const std::vector<Index>&)>& fn);

/// Objective evaluated from the dense 0/1 matrix.
double dense_objective(const QapInstance& inst, const std::vector<Index>& row_to_col);

struct BruteForceResult {
  Matching matching;
  double objective = 0.0;
  long enumerated = 0;
};

/// Minimum over all feasible matchings; among values within `tolerance` of
/// the minimum the lexicographically smallest pair set wins.
BruteForceResult brute_force_qap(const QapInstance& inst, double tolerance = 1e-9);

/// Minimum of sum_i c(i, perm(i)) over all permutations of a square matrix.
double brute_force_lap(const MatrixX& unary);

/// Sum of the partial loss over all index triples, from dense matrices.
long brute_force_total_loss(const MatchingTriple& t);

/// The same sum over arbitrary 0/1 matrices (no uniqueness required).
long dense_total_loss(const MatrixX& x12, const MatrixX& x23, const MatrixX& x31);

/// L(entry = 1) - L(entry = 0) for every entry of the three matrices; equals
/// the gradient because L is multilinear in each entry.
std::array<MatrixX, 3> flip_difference_gradient(const MatchingTriple& t);

/// Number of index triples with exactly two active indicators.
long count_two_of_three(const MatchingTriple& t);

/// Walks every chain of matched points over distinct sets (any order,
/// length >= 3) and checks that its last point is matched to its first.
bool chain_walk_consistent(const MatchingSystem& system);

/// Undirected Delaunay edges from all triangles with an empty circumcircle,
/// O(n^4).
std::vector<Edge> brute_force_delaunay_edges(const Points2& points);

/// True when no input point lies strictly inside any triangle's circumcircle.
bool circumcircles_empty(const Points2& points, const std::vector<std::array<Index, 3>>& triangles);

/// Number of convex hull vertices (collinear hull points excluded).
int hull_size(const Points2& points);

/// Central differences of <cg, costs(p)> with respect to every parameter.
ParamGradient finite_difference_gradient(const KeypointSet& ks1, const KeypointSet& ks2,
                                         const CostModelParams& p, const CostGradient& cg,
                                         double step = 1e-6);

/// |a - b| / max(|a|, |b|) over the flattened gradients.
double relative_error(const ParamGradient& a, const ParamGradient& b);

/// Random instance with unary ~ U[-1,1] and each available pairwise key
/// present with probability `density`, cost ~ U[-1,1].
QapInstance random_instance(Index n1, Index n2, bool complete, double density, Rng& rng);

/// Random matching of the given shape (partial unless complete).
Matching random_matching(Index n1, Index n2, Rng& rng, bool complete = false);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Solver oracle equivalence, cycle-loss oracles and cost-head gradient
/// check on random problems drawn from `seed`. With `params` the gradient
/// check runs at those parameters instead of random ones.
std::vector<CheckResult> run_verification_suite(std::uint64_t seed,
                                                const std::optional<CostModelParams>& params = {});

}  // namespace clgm::verify
