#include "clgm/instances.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace clgm {

void validate(const KeypointSet& ks) {
  if (ks.features.rows() != ks.points.rows())
    throw precondition_error("keypoint set '" + ks.set_id + "': feature rows != point count");
  const Index n = ks.size();
  std::set<Edge> seen;
  for (auto [a, b] : ks.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw precondition_error("keypoint set '" + ks.set_id + "': edge index out of range");
    if (a == b) throw precondition_error("keypoint set '" + ks.set_id + "': self-loop edge");
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
      throw precondition_error("keypoint set '" + ks.set_id + "': duplicate edge");
  }
  if (ks.universe_labels && static_cast<Index>(ks.universe_labels->size()) != n)
    throw precondition_error("keypoint set '" + ks.set_id + "': label count != point count");
}

void validate(const QapInstance& inst) {
  if (inst.n1 < 0 || inst.n2 < 0 || inst.unary.rows() != inst.n1 || inst.unary.cols() != inst.n2)
    throw precondition_error("qap instance: unary shape does not match node counts");
  if (!inst.unary.allFinite()) throw precondition_error("qap instance: non-finite unary cost");
  for (const auto& [k, c] : inst.pairwise) {
    if (k.i < 0 || k.j < 0 || k.i >= inst.n1 || k.j >= inst.n1 || k.s < 0 || k.l < 0 ||
        k.s >= inst.n2 || k.l >= inst.n2)
      throw precondition_error("qap instance: pairwise key out of range");
    if (k.i >= k.j) throw precondition_error("qap instance: pairwise key must have i < j");
    if (k.s == k.l) throw precondition_error("qap instance: pairwise key must have s != l");
    if (!std::isfinite(c)) throw precondition_error("qap instance: non-finite pairwise cost");
  }
}

Matching::Matching(Index n1, Index n2, std::vector<Assignment> pairs)
    : n1_(n1), n2_(n2), pairs_(std::move(pairs)) {
  if (n1 < 0 || n2 < 0) throw precondition_error("matching: negative side size");
  for (auto [i, s] : pairs_)
    if (i < 0 || s < 0 || i >= n1 || s >= n2)
      throw precondition_error("matching: pair index out of range");
  std::sort(pairs_.begin(), pairs_.end());
}

bool Matching::contains(Index i, Index s) const {
  return std::binary_search(pairs_.begin(), pairs_.end(), Assignment{i, s});
}

std::vector<Index> Matching::row_to_col() const {
  std::vector<Index> r(n1_, -1);
  for (auto [i, s] : pairs_) r[i] = s;
  return r;
}

std::vector<Index> Matching::col_to_row() const {
  std::vector<Index> c(n2_, -1);
  for (auto [i, s] : pairs_) c[s] = i;
  return c;
}

MatrixX Matching::dense() const {
  MatrixX d = MatrixX::Zero(n1_, n2_);
  for (auto [i, s] : pairs_) d(i, s) = 1.0;
  return d;
}

Matching Matching::transposed() const {
  std::vector<Assignment> t;
  t.reserve(pairs_.size());
  for (auto [i, s] : pairs_) t.emplace_back(s, i);
  return Matching(n2_, n1_, std::move(t));
}

Matching Matching::from_rows(Index n2, const std::vector<Index>& row_to_col) {
  std::vector<Assignment> p;
  for (Index i = 0; i < static_cast<Index>(row_to_col.size()); ++i)
    if (row_to_col[i] >= 0) p.emplace_back(i, row_to_col[i]);
  return Matching(static_cast<Index>(row_to_col.size()), n2, std::move(p));
}

bool lex_less(const Matching& a, const Matching& b) {
  return std::lexicographical_compare(a.pairs().begin(), a.pairs().end(), b.pairs().begin(),
                                      b.pairs().end());
}

bool validate_matching(const Matching& m, bool require_complete) {
  std::vector<char> row(m.n1(), 0), col(m.n2(), 0);
  for (auto [i, s] : m.pairs()) {
    if (row[i]++ || col[s]++) return false;
  }
  if (require_complete) {
    if (m.n1() != m.n2()) return false;
    if (static_cast<Index>(m.size()) != m.n1()) return false;
  }
  return true;
}

bool validate_matching(const Matching& m, const QapInstance& inst) {
  return m.n1() == inst.n1 && m.n2() == inst.n2 && validate_matching(m, inst.complete);
}

namespace {

void require_valid(const Matching& m, const QapInstance& inst) {
  if (m.n1() != inst.n1 || m.n2() != inst.n2)
    throw precondition_error("matching shape does not match instance");
  if (!validate_matching(m, false))
    throw precondition_error("matching violates uniqueness constraints");
}

}  // namespace

LiftedSolution lift(const Matching& m, const QapInstance& inst) {
  require_valid(m, inst);
  LiftedSolution out{m, {}};
  const auto& p = m.pairs();
  // pairs are sorted by row, so a < b implies i_a < i_b
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b) {
      PairKey k{p[a].first, p[b].first, p[a].second, p[b].second};
      if (inst.pairwise.contains(k)) out.y.push_back(k);
    }
  std::sort(out.y.begin(), out.y.end());
  return out;
}

double objective(const QapInstance& inst, const Matching& m) {
  require_valid(m, inst);
  double total = 0.0;
  const auto& p = m.pairs();
  for (auto [i, s] : p) total += inst.unary(i, s);
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = a + 1; b < p.size(); ++b) {
      auto it = inst.pairwise.find({p[a].first, p[b].first, p[a].second, p[b].second});
      if (it != inst.pairwise.end()) total += it->second;
    }
  return total;
}

double linear_objective(const QapInstance& inst, const LiftedSolution& sol) {
  double total = 0.0;
  for (auto [i, s] : sol.x.pairs()) total += inst.unary(i, s);
  for (const auto& k : sol.y) total += inst.pairwise.at(k);
  return total;
}

}  // namespace clgm
