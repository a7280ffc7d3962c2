#pragma once

#include <Eigen/Dense>

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace clgm {

using Index = int;
using Edge = std::pair<Index, Index>;
using Assignment = std::pair<Index, Index>;  // (node of side 1, node of side 2)

using MatrixX = Eigen::MatrixXd;
using VectorX = Eigen::VectorXd;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Thrown when an argument violates a documented precondition.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One keypoint set ("image"): coordinates, a feature row per point, an
/// undirected edge list and optional ground-truth universe labels.
struct KeypointSet {
  std::string set_id;
  Points2 points;
  MatrixX features;  // points.rows() x D
  std::vector<Edge> edges;
  std::optional<std::vector<int>> universe_labels;

  Index size() const { return static_cast<Index>(points.rows()); }
  Index feature_dim() const { return static_cast<Index>(features.cols()); }
};

/// Throws precondition_error when the set breaks one of its invariants.
void validate(const KeypointSet& ks);

/// Key of a pairwise term c_{is,jl}: the cost paid when both i->s and j->l
/// are active. Canonical form has i < j; s != l.
struct PairKey {
  Index i, j, s, l;

  Assignment first() const { return {i, s}; }
  Assignment second() const { return {j, l}; }
  auto operator<=>(const PairKey&) const = default;
};

using PairwiseMap = std::map<PairKey, double>;

struct QapInstance {
  Index n1 = 0;
  Index n2 = 0;
  MatrixX unary;  // n1 x n2
  PairwiseMap pairwise;
  bool complete = false;
};

/// Throws precondition_error on shape mismatch, non-canonical or out of range
/// pairwise keys, or non-finite costs.
void validate(const QapInstance& inst);

/// A set of assignments stored as a sorted list of (i, s) pairs.
class Matching {
 public:
  Matching() = default;
  Matching(Index n1, Index n2, std::vector<Assignment> pairs = {});

  Index n1() const { return n1_; }
  Index n2() const { return n2_; }
  const std::vector<Assignment>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  bool contains(Index i, Index s) const;

  /// row_to_col[i] = s, or -1 when i is unassigned. Assumes uniqueness.
  std::vector<Index> row_to_col() const;
  std::vector<Index> col_to_row() const;

  /// Dense 0/1 view.
  MatrixX dense() const;

  /// Matching of side 2 onto side 1.
  Matching transposed() const;

  static Matching from_rows(Index n2, const std::vector<Index>& row_to_col);

  friend bool operator==(const Matching&, const Matching&) = default;

 private:
  Index n1_ = 0;
  Index n2_ = 0;
  std::vector<Assignment> pairs_;
};

/// Strict lexicographic order on the sorted pair sequences.
bool lex_less(const Matching& a, const Matching& b);

/// Uniqueness constraints; with require_complete every node of both sides
/// must be assigned.
bool validate_matching(const Matching& m, bool require_complete = false);

/// Matching validity with respect to an instance (shape plus completeness).
bool validate_matching(const Matching& m, const QapInstance& inst);

/// x together with the active lifted indicators y_{is,jl} = x_is * x_jl,
/// restricted to keys present in the instance.
struct LiftedSolution {
  Matching x;
  std::vector<PairKey> y;  // sorted
};

LiftedSolution lift(const Matching& m, const QapInstance& inst);

/// sum c_is x_is + sum c_{is,jl} x_is x_jl
double objective(const QapInstance& inst, const Matching& m);

/// <(unary ++ pairwise), (x ++ y)>, the linearized form of objective().
double linear_objective(const QapInstance& inst, const LiftedSolution& sol);

}  // namespace clgm
