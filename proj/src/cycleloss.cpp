#include "clgm/cycleloss.hpp"

namespace clgm {

void validate(const MatchingTriple& t) {
  if (t.x12.n2() != t.x23.n1() || t.x23.n2() != t.x31.n1() || t.x31.n2() != t.x12.n1())
    throw precondition_error("matching triple: side sizes do not chain");
  for (const auto* m : {&t.x12, &t.x23, &t.x31})
    if (!validate_matching(*m)) throw precondition_error("matching triple: invalid matching");
}

namespace {

// Number of chains a -> b -> c through two matchings.
long chain_count(const Matching& ab, const std::vector<Index>& bc_rows) {
  long n = 0;
  for (auto [a, b] : ab.pairs())
    if (bc_rows[b] >= 0) ++n;
  return n;
}

}  // namespace

long total_loss(const MatchingTriple& t) {
  validate(t);
  const auto f23 = t.x23.row_to_col();
  const auto f31 = t.x31.row_to_col();
  const auto f12 = t.x12.row_to_col();
  long closed = 0;
  for (auto [i, s] : t.x12.pairs()) {
    const Index k = f23[s];
    if (k >= 0 && f31[k] == i) ++closed;
  }
  return chain_count(t.x12, f23) + chain_count(t.x23, f31) + chain_count(t.x31, f12) - 3 * closed;
}

std::array<MatrixX, 3> loss_gradient(const MatchingTriple& t) {
  validate(t);
  // (dL/dx12)_is = [s matched in x23] + [i matched in x31] - 3 [x31(x23(s)) == i]
  auto grad = [](const Matching& ab, const Matching& bc, const Matching& ca) {
    const auto f_bc = bc.row_to_col();
    const auto f_ca = ca.row_to_col();
    const auto g_ca = ca.col_to_row();
    MatrixX d = MatrixX::Zero(ab.n1(), ab.n2());
    for (Index a = 0; a < ab.n1(); ++a)
      for (Index b = 0; b < ab.n2(); ++b) {
        const Index c = f_bc[b];
        d(a, b) = (c >= 0) + (g_ca[a] >= 0) - 3 * (c >= 0 && f_ca[c] == a);
      }
    return d;
  };
  return {grad(t.x12, t.x23, t.x31), grad(t.x23, t.x31, t.x12), grad(t.x31, t.x12, t.x23)};
}

void MatchingSystem::set(Index a, Index b, Matching m) {
  if (a == b || a < 0 || b < 0 || a >= num_sets() || b >= num_sets())
    throw precondition_error("matching system: bad set pair");
  if (a > b) {
    std::swap(a, b);
    m = m.transposed();
  }
  if (m.n1() != sizes_[a] || m.n2() != sizes_[b])
    throw precondition_error("matching system: matching shape does not match set sizes");
  matchings_.insert_or_assign({a, b}, std::move(m));
}

bool MatchingSystem::has(Index a, Index b) const {
  return matchings_.contains({std::min(a, b), std::max(a, b)});
}

Matching MatchingSystem::get(Index a, Index b) const {
  auto it = matchings_.find({std::min(a, b), std::max(a, b)});
  if (it == matchings_.end())
    throw precondition_error("matching system: missing matching for pair " + std::to_string(a) +
                             "," + std::to_string(b));
  return a < b ? it->second : it->second.transposed();
}

bool is_cycle_consistent(const MatchingSystem& system) {
  const Index d = system.num_sets();
  for (Index a = 0; a < d; ++a)
    for (Index b = a + 1; b < d; ++b)
      if (!system.has(a, b))
        throw precondition_error("matching system: missing matching for pair " +
                                 std::to_string(a) + "," + std::to_string(b));
  for (Index a = 0; a < d; ++a)
    for (Index b = a + 1; b < d; ++b)
      for (Index c = b + 1; c < d; ++c)
        if (total_loss({system.get(a, b), system.get(b, c), system.get(c, a)}) != 0) return false;
  return true;
}

}  // namespace clgm
