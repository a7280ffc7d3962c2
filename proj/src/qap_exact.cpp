#include "clgm/solvers.hpp"
#include "qap_detail.hpp"

#include <algorithm>
#include <limits>

namespace clgm {
namespace {

class BranchAndBound {
 public:
  BranchAndBound(const QapInstance& inst, double tolerance)
      : inst_(inst), adj_(inst), tol_(tolerance), row_to_col_(inst.n1, -1), col_used_(inst.n2, 0) {
    forward_neg_ = MatrixX::Zero(inst.n1, inst.n2);
    for (Index i = 0; i < inst.n1; ++i)
      for (Index s = 0; s < inst.n2; ++s)
        for (const auto& t : adj_.terms(i, s))
          if (t.j > i) forward_neg_(i, s) += std::min(0.0, t.cost);
  }

  Matching run(const Matching& incumbent) {
    best_ = incumbent;
    best_value_ = objective(inst_, incumbent);
    descend(0, 0.0);
    return best_;
  }

 private:
  // Cost of adding i -> s given the decided rows < i.
  double added_cost(Index i, Index s) const {
    double c = inst_.unary(i, s);
    for (const auto& t : adj_.terms(i, s))
      if (t.j < i && row_to_col_[t.j] == t.l) c += t.cost;
    return c;
  }

  double lower_bound(Index row, double acc) const {
    double lb = acc;
    for (Index r = row; r < inst_.n1; ++r) {
      double best = inst_.complete ? std::numeric_limits<double>::infinity() : 0.0;
      for (Index s = 0; s < inst_.n2; ++s) {
        if (col_used_[s]) continue;
        double c = inst_.unary(r, s) + forward_neg_(r, s);
        for (const auto& t : adj_.terms(r, s))
          if (t.j < row && row_to_col_[t.j] == t.l) c += t.cost;
        best = std::min(best, c);
      }
      lb += best;
    }
    return lb;
  }

  // +1 when every completion of the current prefix is lexicographically
  // greater than the incumbent, -1 when smaller, 0 when undetermined.
  int compare_prefix() const {
    std::size_t k = 0;
    const auto& b = best_.pairs();
    for (Index i = 0; i < static_cast<Index>(row_to_col_.size()); ++i) {
      if (i >= depth_) break;
      if (row_to_col_[i] < 0) continue;
      if (k >= b.size()) return 1;
      const Assignment p{i, row_to_col_[i]};
      if (p < b[k]) return -1;
      if (b[k] < p) return 1;
      ++k;
    }
    return 0;
  }

  void descend(Index row, double acc) {
    depth_ = row;
    if (row == inst_.n1) {
      const Matching cand = Matching::from_rows(inst_.n2, row_to_col_);
      if (acc < best_value_ - tol_ || (acc <= best_value_ + tol_ && lex_less(cand, best_))) {
        best_ = cand;
        best_value_ = acc;
      }
      return;
    }
    const double lb = lower_bound(row, acc);
    if (lb > best_value_ + tol_) return;
    if (lb >= best_value_ - tol_ && compare_prefix() > 0) return;

    struct Option {
      Index col;
      double cost;
    };
    std::vector<Option> options;
    if (!inst_.complete) options.push_back({-1, 0.0});
    for (Index s = 0; s < inst_.n2; ++s)
      if (!col_used_[s]) options.push_back({s, added_cost(row, s)});
    std::stable_sort(options.begin(), options.end(),
                     [](const Option& a, const Option& b) { return a.cost < b.cost; });

    for (const auto& opt : options) {
      row_to_col_[row] = opt.col;
      if (opt.col >= 0) col_used_[opt.col] = 1;
      descend(row + 1, acc + opt.cost);
      if (opt.col >= 0) col_used_[opt.col] = 0;
      row_to_col_[row] = -1;
      depth_ = row;
    }
  }

  const QapInstance& inst_;
  detail::PairAdjacency adj_;
  double tol_;
  MatrixX forward_neg_;
  std::vector<Index> row_to_col_;
  std::vector<char> col_used_;
  Index depth_ = 0;
  Matching best_;
  double best_value_ = 0.0;
};

}  // namespace

Matching solve_qap_exact(const QapInstance& inst, int node_limit, double tolerance) {
  validate(inst);
  if (std::max(inst.n1, inst.n2) > node_limit)
    throw solver_refusal("qap_exact: instance with " + std::to_string(std::max(inst.n1, inst.n2)) +
                         " nodes exceeds node limit " + std::to_string(node_limit));
  if (inst.complete && inst.n1 != inst.n2)
    throw infeasible_instance("qap_exact: complete matching requires n1 == n2");
  const Matching seed = solve_lap_hungarian(inst.unary, inst.complete, tolerance);
  return BranchAndBound(inst, tolerance).run(seed);
}

}  // namespace clgm
