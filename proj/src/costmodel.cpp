#include "clgm/costmodel.hpp"

#include <random>

namespace clgm {
namespace {

// Stored edge index and orientation for each directed node pair.
class EdgeLookup {
 public:
  explicit EdgeLookup(const KeypointSet& ks) {
    for (std::size_t e = 0; e < ks.edges.size(); ++e) {
      auto [a, b] = ks.edges[e];
      table_[{a, b}] = {static_cast<Index>(e), 1.0};
      table_[{b, a}] = {static_cast<Index>(e), -1.0};
    }
  }

  struct Entry {
    Index edge;
    double sign;
  };
  const Entry& at(Index a, Index b) const { return table_.at({a, b}); }

 private:
  std::map<Edge, Entry> table_;
};

void check_inputs(const KeypointSet& ks1, const KeypointSet& ks2, const CostModelParams& p) {
  validate(p);
  validate(ks1);
  validate(ks2);
  if (ks1.feature_dim() != p.feature_dim() || ks2.feature_dim() != p.feature_dim())
    throw precondition_error("cost model: feature dimension does not match parameters");
}

}  // namespace

void validate(const CostModelParams& p) {
  if (p.embedding_dim() < 1) throw precondition_error("cost model: embedding dimension must be >= 1");
  if (p.edge_proj.rows() != p.node_proj.rows() || p.edge_proj.cols() != p.node_proj.cols())
    throw precondition_error("cost model: node and edge projections differ in shape");
  if (!p.node_proj.allFinite() || !p.edge_proj.allFinite() || !std::isfinite(p.c_hat))
    throw precondition_error("cost model: non-finite parameter");
}

CostModelParams init_params(Index feature_dim, Index embedding_dim, double c_hat, double scale,
                            Rng& rng) {
  if (feature_dim < 1 || embedding_dim < 1)
    throw precondition_error("init_params: dimensions must be >= 1");
  std::normal_distribution<double> normal(0.0, scale);
  CostModelParams p;
  p.node_proj.resize(feature_dim, embedding_dim);
  p.edge_proj.resize(feature_dim, embedding_dim);
  for (Index c = 0; c < embedding_dim; ++c)
    for (Index r = 0; r < feature_dim; ++r) p.node_proj(r, c) = normal(rng);
  for (Index c = 0; c < embedding_dim; ++c)
    for (Index r = 0; r < feature_dim; ++r) p.edge_proj(r, c) = normal(rng);
  p.c_hat = c_hat;
  return p;
}

QapInstance build_instance(const KeypointSet& ks1, const KeypointSet& ks2, const CostModelParams& p,
                           bool complete, bool with_pairwise) {
  check_inputs(ks1, ks2, p);
  const auto e1 = embed(ks1, p);
  const auto e2 = embed(ks2, p);

  QapInstance inst;
  inst.n1 = ks1.size();
  inst.n2 = ks2.size();
  inst.complete = complete;
  inst.unary = -(normalize_rows(e1.nodes) * normalize_rows(e2.nodes).transpose()).array() - p.c_hat;
  if (!with_pairwise) return inst;

  // sim(e, f) = <y1_e, y2_f> for stored orientations; reversing one edge
  // flips the sign.
  const MatrixX sim = normalize_rows(e1.edges) * normalize_rows(e2.edges).transpose();
  for (std::size_t a = 0; a < ks1.edges.size(); ++a) {
    auto [i, j] = ks1.edges[a];
    const double sign1 = i < j ? 1.0 : -1.0;
    if (j < i) std::swap(i, j);
    for (std::size_t b = 0; b < ks2.edges.size(); ++b) {
      const auto [s, l] = ks2.edges[b];
      const double c = -sign1 * sim(a, b);
      inst.pairwise.emplace(PairKey{i, j, s, l}, c);
      inst.pairwise.emplace(PairKey{i, j, l, s}, -c);
    }
  }
  return inst;
}

ParamGradient backward(const KeypointSet& ks1, const KeypointSet& ks2, const CostModelParams& p,
                       const CostGradient& cg) {
  check_inputs(ks1, ks2, p);
  if (cg.unary.rows() != ks1.size() || cg.unary.cols() != ks2.size())
    throw precondition_error("backward: cost gradient shape does not match instance");

  const auto e1 = embed(ks1, p);
  const auto e2 = embed(ks2, p);
  const MatrixX n1 = normalize_rows(e1.nodes);
  const MatrixX n2 = normalize_rows(e2.nodes);

  ParamGradient g = ParamGradient::zeros_like(p);

  // c = -n1 n2^T - c_hat
  const MatrixX dn1 = -cg.unary * n2;
  const MatrixX dn2 = -cg.unary.transpose() * n1;
  g.d_node_proj = ks1.features.transpose() * normalize_rows_backward(e1.nodes, dn1) +
                  ks2.features.transpose() * normalize_rows_backward(e2.nodes, dn2);
  g.d_c_hat = -cg.unary.sum();

  if (cg.pairwise.empty()) return g;
  const EdgeLookup look1(ks1), look2(ks2);
  const MatrixX m1 = normalize_rows(e1.edges);
  const MatrixX m2 = normalize_rows(e2.edges);
  MatrixX dm1 = MatrixX::Zero(m1.rows(), m1.cols());
  MatrixX dm2 = MatrixX::Zero(m2.rows(), m2.cols());
  for (const auto& [k, grad] : cg.pairwise) {
    if (grad == 0.0) continue;
    const auto a = look1.at(k.i, k.j);
    const auto b = look2.at(k.s, k.l);
    // c = -sign_a sign_b <m1_a, m2_b>
    const double w = -grad * a.sign * b.sign;
    dm1.row(a.edge) += w * m2.row(b.edge);
    dm2.row(b.edge) += w * m1.row(a.edge);
  }
  g.d_edge_proj = edge_feature_differences<double>(ks1).transpose() * normalize_rows_backward(e1.edges, dm1) +
                  edge_feature_differences<double>(ks2).transpose() * normalize_rows_backward(e2.edges, dm2);
  return g;
}

}  // namespace clgm
