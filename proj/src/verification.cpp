#include "clgm/verification.hpp"

#include "clgm/data.hpp"
#include "clgm/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace clgm::verify {

void for_each_matching(Index n1, Index n2, bool complete,
                       const std::function<void(const std::vector<Index>&)>& fn) {
  if (complete && n1 != n2) return;
  std::vector<Index> rows(n1, -1);
  std::vector<char> used(n2, 0);
  std::function<void(Index)> rec = [&](Index i) {
    if (i == n1) {
      fn(rows);
      return;
    }
    if (!complete) {
      rows[i] = -1;
      rec(i + 1);
    }
    for (Index s = 0; s < n2; ++s) {
      if (used[s]) continue;
      used[s] = 1;
      rows[i] = s;
      rec(i + 1);
      used[s] = 0;
      rows[i] = -1;
    }
  };
  rec(0);
}

double dense_objective(const QapInstance& inst, const std::vector<Index>& row_to_col) {
  MatrixX x = MatrixX::Zero(inst.n1, inst.n2);
  for (Index i = 0; i < inst.n1; ++i)
    if (row_to_col[i] >= 0) x(i, row_to_col[i]) = 1.0;
  double v = (inst.unary.array() * x.array()).sum();
  for (const auto& [k, c] : inst.pairwise) v += c * x(k.i, k.s) * x(k.j, k.l);
  return v;
}

BruteForceResult brute_force_qap(const QapInstance& inst, double tolerance) {
  std::vector<std::pair<double, Matching>> all;
  for_each_matching(inst.n1, inst.n2, inst.complete, [&](const std::vector<Index>& rows) {
    all.emplace_back(dense_objective(inst, rows), Matching::from_rows(inst.n2, rows));
  });
  if (all.empty()) throw std::runtime_error("brute_force_qap: no feasible matching");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [v, m] : all) best = std::min(best, v);
  BruteForceResult r;
  r.enumerated = static_cast<long>(all.size());
  bool have = false;
  for (const auto& [v, m] : all) {
    if (v > best + tolerance) continue;
    if (!have || lex_less(m, r.matching)) {
      r.matching = m;
      r.objective = v;
      have = true;
    }
  }
  return r;
}

double brute_force_lap(const MatrixX& unary) {
  const Index n = static_cast<Index>(unary.rows());
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (Index i = 0; i < n; ++i) v += unary(i, perm[i]);
    best = std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

long dense_total_loss(const MatrixX& a, const MatrixX& b, const MatrixX& c) {
  long total = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index s = 0; s < a.cols(); ++s)
      for (Index k = 0; k < b.cols(); ++k) {
        const int x = static_cast<int>(a(i, s)), y = static_cast<int>(b(s, k)),
                  z = static_cast<int>(c(k, i));
        total += x * y + y * z + x * z - 3 * x * y * z;
      }
  return total;
}

long brute_force_total_loss(const MatchingTriple& t) {
  return dense_total_loss(t.x12.dense(), t.x23.dense(), t.x31.dense());
}

std::array<MatrixX, 3> flip_difference_gradient(const MatchingTriple& t) {
  std::array<MatrixX, 3> x{t.x12.dense(), t.x23.dense(), t.x31.dense()};
  std::array<MatrixX, 3> g;
  for (int m = 0; m < 3; ++m) {
    g[m] = MatrixX::Zero(x[m].rows(), x[m].cols());
    for (Index r = 0; r < x[m].rows(); ++r)
      for (Index c = 0; c < x[m].cols(); ++c) {
        auto y = x;
        y[m](r, c) = 1.0;
        const long up = dense_total_loss(y[0], y[1], y[2]);
        y[m](r, c) = 0.0;
        g[m](r, c) = static_cast<double>(up - dense_total_loss(y[0], y[1], y[2]));
      }
  }
  return g;
}

long count_two_of_three(const MatchingTriple& t) {
  const MatrixX a = t.x12.dense(), b = t.x23.dense(), c = t.x31.dense();
  long count = 0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index s = 0; s < a.cols(); ++s)
      for (Index k = 0; k < b.cols(); ++k)
        if (a(i, s) + b(s, k) + c(k, i) == 2.0) ++count;
  return count;
}

bool chain_walk_consistent(const MatchingSystem& system) {
  const Index d = system.num_sets();
  // match[a][b][p] = point of set b matched to point p of set a, or -1
  std::vector<std::vector<std::vector<Index>>> match(d, std::vector<std::vector<Index>>(d));
  for (Index a = 0; a < d; ++a)
    for (Index b = 0; b < d; ++b)
      if (a != b) match[a][b] = system.get(a, b).row_to_col();

  std::vector<char> visited(d, 0);
  bool ok = true;
  std::function<void(Index, Index, Index, Index, int)> walk = [&](Index start_set, Index start_pt,
                                                                  Index set, Index pt, int length) {
    if (!ok) return;
    if (length >= 3 && match[set][start_set][pt] != start_pt) {
      ok = false;
      return;
    }
    for (Index next = 0; next < d; ++next) {
      if (visited[next]) continue;
      const Index q = match[set][next][pt];
      if (q < 0) continue;
      visited[next] = 1;
      walk(start_set, start_pt, next, q, length + 1);
      visited[next] = 0;
    }
  };
  for (Index a = 0; a < d && ok; ++a)
    for (Index p = 0; p < system.set_size(a) && ok; ++p) {
      visited.assign(d, 0);
      visited[a] = 1;
      walk(a, p, a, p, 1);
    }
  return ok;
}

namespace {

using Real = long double;

Real circle_test(const Points2& P, Index a, Index b, Index c, Index d) {
  const Real adx = P(a, 0) - P(d, 0), ady = P(a, 1) - P(d, 1);
  const Real bdx = P(b, 0) - P(d, 0), bdy = P(b, 1) - P(d, 1);
  const Real cdx = P(c, 0) - P(d, 0), cdy = P(c, 1) - P(d, 1);
  const Real det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                   (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                   (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
  const Real orient = (P(b, 0) - P(a, 0)) * (P(c, 1) - P(a, 1)) - (P(b, 1) - P(a, 1)) * (P(c, 0) - P(a, 0));
  return orient > 0 ? det : -det;
}

Real orientation(const Points2& P, Index a, Index b, Index c) {
  return (Real(P(b, 0)) - P(a, 0)) * (Real(P(c, 1)) - P(a, 1)) -
         (Real(P(b, 1)) - P(a, 1)) * (Real(P(c, 0)) - P(a, 0));
}

constexpr Real kEps = 1e-12L;

}  // namespace

bool circumcircles_empty(const Points2& points, const std::vector<std::array<Index, 3>>& triangles) {
  const Index n = static_cast<Index>(points.rows());
  for (const auto& t : triangles)
    for (Index d = 0; d < n; ++d) {
      if (d == t[0] || d == t[1] || d == t[2]) continue;
      if (circle_test(points, t[0], t[1], t[2], d) > kEps) return false;
    }
  return true;
}

std::vector<Edge> brute_force_delaunay_edges(const Points2& points) {
  const Index n = static_cast<Index>(points.rows());
  std::set<Edge> edges;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      for (Index c = b + 1; c < n; ++c) {
        if (std::fabs(orientation(points, a, b, c)) <= kEps) continue;
        bool empty = true;
        for (Index d = 0; d < n && empty; ++d)
          if (d != a && d != b && d != c && circle_test(points, a, b, c, d) > kEps) empty = false;
        if (empty) {
          edges.insert({a, b});
          edges.insert({b, c});
          edges.insert({a, c});
        }
      }
  return {edges.begin(), edges.end()};
}

int hull_size(const Points2& points) {
  // a is a strict hull vertex iff some line through a and another point b
  // has every remaining point strictly on one side
  const Index n = static_cast<Index>(points.rows());
  int count = 0;
  for (Index a = 0; a < n; ++a) {
    bool on_hull = false;
    for (Index b = 0; b < n && !on_hull; ++b) {
      if (b == a) continue;
      bool left = true, right = true;
      for (Index c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        const Real o = orientation(points, a, b, c);
        if (o <= 0) left = false;
        if (o >= 0) right = false;
      }
      on_hull = left || right;
    }
    if (on_hull) ++count;
  }
  return count;
}

ParamGradient finite_difference_gradient(const KeypointSet& ks1, const KeypointSet& ks2,
                                         const CostModelParams& p, const CostGradient& cg,
                                         double step) {
  auto f = [&](const CostModelParams& q) {
    const QapInstance inst = build_instance(ks1, ks2, q, false, true);
    double v = (cg.unary.array() * inst.unary.array()).sum();
    for (const auto& [k, g] : cg.pairwise) v += g * inst.pairwise.at(k);
    return v;
  };
  ParamGradient g = ParamGradient::zeros_like(p);
  CostModelParams q = p;
  for (Index r = 0; r < p.node_proj.rows(); ++r)
    for (Index c = 0; c < p.node_proj.cols(); ++c) {
      q.node_proj(r, c) = p.node_proj(r, c) + step;
      const double up = f(q);
      q.node_proj(r, c) = p.node_proj(r, c) - step;
      g.d_node_proj(r, c) = (up - f(q)) / (2 * step);
      q.node_proj(r, c) = p.node_proj(r, c);
    }
  for (Index r = 0; r < p.edge_proj.rows(); ++r)
    for (Index c = 0; c < p.edge_proj.cols(); ++c) {
      q.edge_proj(r, c) = p.edge_proj(r, c) + step;
      const double up = f(q);
      q.edge_proj(r, c) = p.edge_proj(r, c) - step;
      g.d_edge_proj(r, c) = (up - f(q)) / (2 * step);
      q.edge_proj(r, c) = p.edge_proj(r, c);
    }
  q.c_hat = p.c_hat + step;
  const double up = f(q);
  q.c_hat = p.c_hat - step;
  g.d_c_hat = (up - f(q)) / (2 * step);
  return g;
}

double relative_error(const ParamGradient& a, const ParamGradient& b) {
  auto flat = [](const ParamGradient& g) {
    VectorX v(g.d_node_proj.size() + g.d_edge_proj.size() + 1);
    v << g.d_node_proj.reshaped(), g.d_edge_proj.reshaped(), g.d_c_hat;
    return v;
  };
  const VectorX va = flat(a), vb = flat(b);
  const double scale = std::max({va.norm(), vb.norm(), 1e-10});
  return (va - vb).norm() / scale;
}

QapInstance random_instance(Index n1, Index n2, bool complete, double density, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  QapInstance inst;
  inst.n1 = n1;
  inst.n2 = n2;
  inst.complete = complete;
  inst.unary.resize(n1, n2);
  for (Index i = 0; i < n1; ++i)
    for (Index s = 0; s < n2; ++s) inst.unary(i, s) = u(rng);
  for (Index i = 0; i < n1; ++i)
    for (Index j = i + 1; j < n1; ++j)
      for (Index s = 0; s < n2; ++s)
        for (Index l = 0; l < n2; ++l)
          if (s != l && coin(rng) < density) inst.pairwise[{i, j, s, l}] = u(rng);
  return inst;
}

Matching random_matching(Index n1, Index n2, Rng& rng, bool complete) {
  std::vector<Index> cols(n2);
  std::iota(cols.begin(), cols.end(), 0);
  std::shuffle(cols.begin(), cols.end(), rng);
  std::bernoulli_distribution keep(0.6);
  std::vector<Assignment> pairs;
  for (Index i = 0; i < std::min(n1, n2); ++i)
    if (complete || keep(rng)) pairs.emplace_back(i, cols[i]);
  // scatter rows too
  std::vector<Index> rows(n1);
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  for (auto& [i, s] : pairs) i = rows[i];
  return Matching(n1, n2, std::move(pairs));
}

// ------------------------------------------------------------------ suite

namespace {

CheckResult check_exact_solver(Rng& rng, int trials) {
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Index n1 = 1 + static_cast<Index>(rng() % 6);
    const bool complete = rng() % 2 == 0;
    const Index n2 = complete ? n1 : 1 + static_cast<Index>(rng() % 6);
    const QapInstance inst = random_instance(n1, n2, complete, 0.3, rng);
    const double got = objective(inst, solve_qap_exact(inst, 8));
    const double want = brute_force_qap(inst).objective;
    worst = std::max(worst, std::fabs(got - want));
    if (std::fabs(got - want) > 1e-9) ++failures;
  }
  std::ostringstream os;
  os << trials << " instances, max |diff| " << worst;
  return {"qap_exact vs enumeration", failures == 0, os.str()};
}

CheckResult check_hungarian(Rng& rng, int trials) {
  int failures = 0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    const Index n = 1 + static_cast<Index>(rng() % 7);
    MatrixX c(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index s = 0; s < n; ++s) c(i, s) = u(rng);
    const Matching m = solve_lap_hungarian(c, true);
    double v = 0.0;
    for (auto [i, s] : m.pairs()) v += c(i, s);
    if (v != brute_force_lap(c) && std::fabs(v - brute_force_lap(c)) > 1e-12) ++failures;
  }
  return {"hungarian vs permutations", failures == 0, std::to_string(trials) + " matrices"};
}

CheckResult check_cycle_loss(Rng& rng, int trials) {
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const Index a = 1 + rng() % 5, b = 1 + rng() % 5, c = 1 + rng() % 5;
    const MatchingTriple tr{random_matching(a, b, rng), random_matching(b, c, rng),
                            random_matching(c, a, rng)};
    if (total_loss(tr) != brute_force_total_loss(tr) || total_loss(tr) != count_two_of_three(tr))
      ++failures;
    const auto grads = loss_gradient(tr);
    const auto flips = flip_difference_gradient(tr);
    for (int m = 0; m < 3; ++m)
      if (grads[m] != flips[m]) ++failures;
  }
  return {"cycle loss vs triple counter", failures == 0, std::to_string(trials) + " triples"};
}

KeypointSet random_keypoints(Index n, Index dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  KeypointSet ks;
  ks.points.resize(n, 2);
  ks.features.resize(n, dim);
  for (Index r = 0; r < n; ++r) {
    ks.points(r, 0) = normal(rng);
    ks.points(r, 1) = normal(rng);
    for (Index c = 0; c < dim; ++c) ks.features(r, c) = normal(rng);
  }
  ks.edges = delaunay(ks.points);
  return ks;
}

CostGradient random_cost_gradient(const QapInstance& inst, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CostGradient cg;
  cg.unary.resize(inst.n1, inst.n2);
  for (Index i = 0; i < inst.n1; ++i)
    for (Index s = 0; s < inst.n2; ++s) cg.unary(i, s) = normal(rng);
  for (const auto& [k, c] : inst.pairwise) cg.pairwise[k] = normal(rng);
  return cg;
}

CheckResult check_gradients(Rng& rng, int trials, const std::optional<CostModelParams>& fixed) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Index dim = fixed ? static_cast<Index>(fixed->feature_dim()) : 1 + rng() % 4;
    const Index emb = fixed ? static_cast<Index>(fixed->embedding_dim()) : 1 + rng() % 4;
    CostModelParams p = fixed ? *fixed : init_params(dim, emb, 0.3, 1.0, rng);
    const KeypointSet ks1 = random_keypoints(1 + rng() % 4, dim, rng);
    const KeypointSet ks2 = random_keypoints(1 + rng() % 4, dim, rng);
    const CostGradient cg = random_cost_gradient(build_instance(ks1, ks2, p, false), rng);
    worst = std::max(worst, relative_error(backward(ks1, ks2, p, cg),
                                           finite_difference_gradient(ks1, ks2, p, cg)));
  }
  std::ostringstream os;
  os << trials << " configurations, max relative error " << worst;
  return {"cost head backward vs finite differences", worst <= 1e-5, os.str()};
}

}  // namespace

std::vector<CheckResult> run_verification_suite(std::uint64_t seed,
                                                const std::optional<CostModelParams>& params) {
  if (params) validate(*params);
  Rng rng = make_rng(seed, stream_id("check"));
  std::vector<CheckResult> out;
  out.push_back(check_exact_solver(rng, 50));
  out.push_back(check_hungarian(rng, 50));
  out.push_back(check_cycle_loss(rng, 200));
  out.push_back(check_gradients(rng, 20, params));
  return out;
}

}  // namespace clgm::verify
