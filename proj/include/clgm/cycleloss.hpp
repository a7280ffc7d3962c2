#pragma once

#include "clgm/instances.hpp"

#include <array>
#include <map>

namespace clgm {

/// Matchings around a cycle of three sets: x12 (V1,V2), x23 (V2,V3),
/// x31 (V3,V1).
struct MatchingTriple {
  Matching x12, x23, x31;
};

/// Throws precondition_error when side sizes do not chain or a matching
/// violates uniqueness.
void validate(const MatchingTriple& t);

/// ab + bc + ac - 3abc: 1 exactly when two of the three indicators are set.
constexpr int partial_loss(int a, int b, int c) { return a * b + b * c + a * c - 3 * a * b * c; }

/// d/da of partial_loss; does not depend on a.
constexpr int partial_loss_derivative(int b, int c) { return b + c - 3 * b * c; }

/// Sum of partial_loss over V1 x V2 x V3, evaluated by composing the sparse
/// matchings instead of looping over all index triples.
long total_loss(const MatchingTriple& t);

/// dL/dx12, dL/dx23, dL/dx31 as dense matrices with the shapes of the
/// matchings.
std::array<MatrixX, 3> loss_gradient(const MatchingTriple& t);

/// Pairwise matchings between d sets, each stored once in canonical
/// orientation (lower set index -> higher).
class MatchingSystem {
 public:
  explicit MatchingSystem(std::vector<Index> set_sizes) : sizes_(std::move(set_sizes)) {}

  Index num_sets() const { return static_cast<Index>(sizes_.size()); }
  Index set_size(Index k) const { return sizes_.at(k); }

  void set(Index a, Index b, Matching m);
  bool has(Index a, Index b) const;

  /// Matching from set a to set b in either orientation.
  Matching get(Index a, Index b) const;

 private:
  std::vector<Index> sizes_;
  std::map<std::pair<Index, Index>, Matching> matchings_;
};

/// True iff the matching between every triple of sets is cycle consistent,
/// i.e. total_loss vanishes on all triples.
bool is_cycle_consistent(const MatchingSystem& system);

}  // namespace clgm
