#pragma once

#include "clgm/instances.hpp"

#include <vector>

namespace clgm::detail {

struct PairTerm {
  Index j, l;
  double cost;
};

/// Pairwise terms indexed by assignment: terms(i, s) lists every (j, l, c)
/// with c = c_{is,jl} (or c_{jl,is}).
class PairAdjacency {
 public:
  explicit PairAdjacency(const QapInstance& inst) : n2_(inst.n2), adj_(std::size_t(inst.n1) * inst.n2) {
    for (const auto& [k, c] : inst.pairwise) {
      adj_[at(k.i, k.s)].push_back({k.j, k.l, c});
      adj_[at(k.j, k.l)].push_back({k.i, k.s, c});
    }
  }

  const std::vector<PairTerm>& terms(Index i, Index s) const { return adj_[at(i, s)]; }

 private:
  std::size_t at(Index i, Index s) const { return std::size_t(i) * n2_ + s; }
  Index n2_;
  std::vector<std::vector<PairTerm>> adj_;
};

}  // namespace clgm::detail
