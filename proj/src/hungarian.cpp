#include "clgm/solvers.hpp"

#include <limits>
#include <numeric>

namespace clgm {
namespace {

// Shortest augmenting path Hungarian method with potentials, rows <= cols.
// Returns row -> column.
std::vector<Index> assign_rows(const MatrixX& a) {
  const Index n = static_cast<Index>(a.rows());
  const Index m = static_cast<Index>(a.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<Index> p(m + 1, 0), way(m + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = p[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> row_to_col(n, -1);
  for (Index j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

// Optimal value over the given rows and columns of `c`. Incomplete mode pads
// one zero-cost dummy column per row; assigning a row there leaves it free.
double subproblem_value(const MatrixX& c, const std::vector<Index>& rows,
                        const std::vector<Index>& cols, bool complete) {
  const Index nr = static_cast<Index>(rows.size());
  const Index nc = static_cast<Index>(cols.size());
  if (nr == 0) return 0.0;
  const Index width = complete ? nc : nc + nr;
  MatrixX a = MatrixX::Zero(nr, width);
  for (Index r = 0; r < nr; ++r)
    for (Index k = 0; k < nc; ++k) a(r, k) = c(rows[r], cols[k]);
  const auto assign = assign_rows(a);
  double value = 0.0;
  for (Index r = 0; r < nr; ++r) value += a(r, assign[r]);
  return value;
}

void check_lap_shape(const MatrixX& unary, bool complete) {
  if (!unary.allFinite()) throw precondition_error("lap: non-finite cost");
  if (complete && unary.rows() != unary.cols())
    throw infeasible_instance("lap: complete matching requires n1 == n2");
}

}  // namespace

double lap_optimum(const MatrixX& unary, bool complete) {
  check_lap_shape(unary, complete);
  std::vector<Index> rows(unary.rows()), cols(unary.cols());
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  return subproblem_value(unary, rows, cols, complete);
}

Matching solve_lap_hungarian(const MatrixX& unary, bool complete, double tolerance) {
  check_lap_shape(unary, complete);
  const Index n1 = static_cast<Index>(unary.rows());
  const Index n2 = static_cast<Index>(unary.cols());
  const double optimum = lap_optimum(unary, complete);

  // Build the lexicographically smallest optimal pair sequence greedily:
  // ending the sequence is always smallest, otherwise take the smallest
  // next pair that still admits an optimal completion.
  std::vector<Assignment> chosen;
  std::vector<char> col_used(n2, 0);
  double fixed = 0.0;
  Index next_row = 0;
  auto free_cols = [&](Index skip) {
    std::vector<Index> cols;
    for (Index s = 0; s < n2; ++s)
      if (!col_used[s] && s != skip) cols.push_back(s);
    return cols;
  };
  for (;;) {
    const bool can_stop = !complete || next_row == n1;
    if (can_stop && fixed <= optimum + tolerance) break;
    bool extended = false;
    for (Index i = next_row; i < n1 && !extended; ++i) {
      if (complete && i > next_row) break;
      std::vector<Index> rest_rows;
      for (Index r = i + 1; r < n1; ++r) rest_rows.push_back(r);
      for (Index s = 0; s < n2; ++s) {
        if (col_used[s]) continue;
        const double value =
            fixed + unary(i, s) + subproblem_value(unary, rest_rows, free_cols(s), complete);
        if (value <= optimum + tolerance) {
          chosen.emplace_back(i, s);
          col_used[s] = 1;
          fixed += unary(i, s);
          next_row = i + 1;
          extended = true;
          break;
        }
      }
    }
    if (!extended) throw std::logic_error("lap: tie-break reconstruction failed");
  }
  return Matching(n1, n2, std::move(chosen));
}

}  // namespace clgm
