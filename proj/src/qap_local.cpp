#include "clgm/solvers.hpp"
#include "clgm/random.hpp"
#include "qap_detail.hpp"

#include <algorithm>
#include <random>

namespace clgm {
namespace {

class LocalSearch {
 public:
  LocalSearch(const QapInstance& inst, const SolverConfig& cfg)
      : inst_(inst), adj_(inst), tol_(cfg.tolerance), max_passes_(cfg.local_search.max_passes) {}

  // Descends from `rows` until no move improves by more than the tolerance.
  double descend(std::vector<Index>& rows, std::vector<double>* trajectory) {
    rows_ = rows;
    cols_.assign(inst_.n2, -1);
    for (Index i = 0; i < inst_.n1; ++i)
      if (rows_[i] >= 0) cols_[rows_[i]] = i;
    double value = objective(inst_, Matching::from_rows(inst_.n2, rows_));
    if (trajectory) trajectory->push_back(value);

    for (int pass = 0; pass < max_passes_; ++pass) {
      bool improved = false;
      // (a) reassign to a free column, (c) assign a free row
      for (Index i = 0; i < inst_.n1; ++i)
        for (Index s = 0; s < inst_.n2; ++s) {
          if (cols_[s] >= 0) continue;
          if (inst_.complete && rows_[i] < 0) continue;
          if (try_move({i}, {s}, value, trajectory)) improved = true;
        }
      // (b) swap the columns of two rows; one side may be unassigned when
      // the instance is incomplete
      for (Index i = 0; i < inst_.n1; ++i)
        for (Index k = i + 1; k < inst_.n1; ++k) {
          if (rows_[i] < 0 && rows_[k] < 0) continue;
          if (try_move({i, k}, {rows_[k], rows_[i]}, value, trajectory)) improved = true;
        }
      // (c) unassign
      if (!inst_.complete)
        for (Index i = 0; i < inst_.n1; ++i)
          if (rows_[i] >= 0 && try_move({i}, {-1}, value, trajectory)) improved = true;
      if (!improved) break;
    }
    rows = rows_;
    return value;
  }

 private:
  // Cost of the terms touching any row of `changed` under the current state,
  // each term counted once.
  double local_cost(const std::vector<Index>& changed) const {
    double c = 0.0;
    for (Index r : changed) {
      const Index s = rows_[r];
      if (s < 0) continue;
      c += inst_.unary(r, s);
      for (const auto& t : adj_.terms(r, s)) {
        if (rows_[t.j] != t.l) continue;
        const bool other_changed = std::find(changed.begin(), changed.end(), t.j) != changed.end();
        if (!other_changed || r < t.j) c += t.cost;
      }
    }
    return c;
  }

  void set_rows(const std::vector<Index>& changed, const std::vector<Index>& cols) {
    for (Index r : changed)
      if (rows_[r] >= 0) cols_[rows_[r]] = -1;
    for (std::size_t a = 0; a < changed.size(); ++a) rows_[changed[a]] = cols[a];
    for (Index r : changed)
      if (rows_[r] >= 0) cols_[rows_[r]] = r;
  }

  bool try_move(const std::vector<Index>& changed, const std::vector<Index>& cols, double& value,
                std::vector<double>* trajectory) {
    std::vector<Index> old(changed.size());
    for (std::size_t a = 0; a < changed.size(); ++a) old[a] = rows_[changed[a]];
    if (old == cols) return false;
    const double before = local_cost(changed);
    set_rows(changed, cols);
    const double delta = local_cost(changed) - before;
    if (delta < -tol_) {
      value += delta;
      if (trajectory) trajectory->push_back(value);
      return true;
    }
    set_rows(changed, old);
    return false;
  }

  const QapInstance& inst_;
  detail::PairAdjacency adj_;
  double tol_;
  int max_passes_;
  std::vector<Index> rows_, cols_;
};

void perturb(std::vector<Index>& rows, Index n2, bool complete, Rng& rng) {
  const Index n1 = static_cast<Index>(rows.size());
  if (n1 < 2) return;
  std::uniform_int_distribution<Index> pick(0, n1 - 1);
  const Index moves = std::max<Index>(1, n1 / 3);
  for (Index m = 0; m < moves; ++m) {
    const Index a = pick(rng);
    const Index b = pick(rng);
    std::swap(rows[a], rows[b]);
    if (!complete && (rng() & 1u)) {
      // toggle row a: free it, or give it a random unused column
      if (rows[a] >= 0) {
        rows[a] = -1;
      } else {
        std::vector<char> used(n2, 0);
        for (Index s : rows)
          if (s >= 0) used[s] = 1;
        std::vector<Index> free;
        for (Index s = 0; s < n2; ++s)
          if (!used[s]) free.push_back(s);
        if (!free.empty())
          rows[a] = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
      }
    }
  }
}

}  // namespace

Matching solve_qap_local(const QapInstance& inst, const SolverConfig& cfg,
                         const std::optional<Matching>& warm_start, LocalSearchTrace* trace) {
  validate(inst);
  if (inst.complete && inst.n1 != inst.n2)
    throw infeasible_instance("qap_local: complete matching requires n1 == n2");
  if (trace) trace->runs.clear();

  LocalSearch search(inst, cfg);
  auto run = [&](std::vector<Index>& rows) {
    std::vector<double>* traj = nullptr;
    if (trace) traj = &trace->runs.emplace_back();
    return search.descend(rows, traj);
  };

  if (warm_start) {
    if (!validate_matching(*warm_start, inst))
      throw precondition_error("qap_local: warm start is not a feasible matching");
    auto rows = warm_start->row_to_col();
    run(rows);
    return Matching::from_rows(inst.n2, rows);
  }

  auto best_rows = solve_lap_hungarian(inst.unary, inst.complete, cfg.tolerance).row_to_col();
  double best_value = run(best_rows);
  Matching best = Matching::from_rows(inst.n2, best_rows);

  for (int r = 1; r <= cfg.local_search.restarts; ++r) {
    Rng rng = make_rng(cfg.local_search.rng_seed, static_cast<std::uint64_t>(r));
    auto rows = best_rows;
    perturb(rows, inst.n2, inst.complete, rng);
    const double value = run(rows);
    Matching cand = Matching::from_rows(inst.n2, rows);
    if (value < best_value - cfg.tolerance ||
        (value <= best_value + cfg.tolerance && lex_less(cand, best))) {
      best_value = value;
      best_rows = rows;
      best = std::move(cand);
    }
  }
  return best;
}

}  // namespace clgm
