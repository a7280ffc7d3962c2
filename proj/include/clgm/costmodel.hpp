#pragma once

#include "clgm/blackbox.hpp"
#include "clgm/instances.hpp"
#include "clgm/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <map>

namespace clgm {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Guard added to every norm before dividing by it.
inline constexpr double kNormEpsilon = 1e-12;

/// Shared cost head: keypoint features (D) are projected to node and edge
/// embeddings (E) by two learnable matrices. c_hat shifts every unary cost.
template <typename Scalar>
struct BasicCostModelParams {
  Mat<Scalar> node_proj;  // D x E
  Mat<Scalar> edge_proj;  // D x E
  Scalar c_hat = Scalar(0);

  Eigen::Index feature_dim() const { return node_proj.rows(); }
  Eigen::Index embedding_dim() const { return node_proj.cols(); }
};

template <typename Scalar>
struct BasicParamGradient {
  Mat<Scalar> d_node_proj;
  Mat<Scalar> d_edge_proj;
  Scalar d_c_hat = Scalar(0);

  static BasicParamGradient zeros_like(const BasicCostModelParams<Scalar>& p) {
    return {Mat<Scalar>::Zero(p.node_proj.rows(), p.node_proj.cols()),
            Mat<Scalar>::Zero(p.edge_proj.rows(), p.edge_proj.cols()), Scalar(0)};
  }

  BasicParamGradient& operator+=(const BasicParamGradient& o) {
    d_node_proj += o.d_node_proj;
    d_edge_proj += o.d_edge_proj;
    d_c_hat += o.d_c_hat;
    return *this;
  }
};

using CostModelParams = BasicCostModelParams<double>;
using ParamGradient = BasicParamGradient<double>;

void validate(const CostModelParams& p);

/// Random N(0, scale^2) projections.
CostModelParams init_params(Index feature_dim, Index embedding_dim, double c_hat, double scale,
                            Rng& rng);

/// Rows scaled to unit length, each norm guarded by kNormEpsilon.
template <typename Derived>
auto normalize_rows(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> out = z;
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.row(r) /= out.row(r).norm() + Scalar(kNormEpsilon);
  return out;
}

/// Gradient with respect to the rows of z, given the gradient `dn` with
/// respect to normalize_rows(z):
///   dz = dn / (|z| + eps) - z (z . dn) / (|z| (|z| + eps)^2)
template <typename DerivedZ, typename DerivedG>
auto normalize_rows_backward(const Eigen::MatrixBase<DerivedZ>& z,
                             const Eigen::MatrixBase<DerivedG>& dn) {
  using Scalar = typename DerivedZ::Scalar;
  Mat<Scalar> dz(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const Scalar norm = z.row(r).norm();
    const Scalar denom = norm + Scalar(kNormEpsilon);
    dz.row(r) = dn.row(r) / denom;
    if (norm > Scalar(0))
      dz.row(r) -= z.row(r) * (z.row(r).dot(dn.row(r)) / (norm * denom * denom));
  }
  return dz;
}

/// Node embeddings (one row per point) and edge embeddings (one row per
/// stored edge (a, b), from the feature difference f_a - f_b).
template <typename Scalar>
struct Embeddings {
  Mat<Scalar> nodes;
  Mat<Scalar> edges;
};

template <typename Scalar>
Mat<Scalar> edge_feature_differences(const KeypointSet& ks) {
  Mat<Scalar> diff(static_cast<Eigen::Index>(ks.edges.size()), ks.features.cols());
  for (std::size_t e = 0; e < ks.edges.size(); ++e) {
    auto [a, b] = ks.edges[e];
    diff.row(e) = (ks.features.row(a) - ks.features.row(b)).template cast<Scalar>();
  }
  return diff;
}

template <typename Scalar>
Embeddings<Scalar> embed(const KeypointSet& ks, const BasicCostModelParams<Scalar>& p) {
  if (ks.features.cols() != p.node_proj.rows())
    throw precondition_error("embed: feature dimension does not match projection");
  return {ks.features.template cast<Scalar>() * p.node_proj,
          edge_feature_differences<Scalar>(ks) * p.edge_proj};
}

/// Costs for matching ks1 against ks2 under a minimizing solver:
///   c_is        = -<z1_i/|z1_i|, z2_s/|z2_s|> - c_hat
///   c_{is,jl}   = -<y1_ij/|y1_ij|, y2_sl/|y2_sl|>
/// for every edge {i,j} of ks1 (i < j) and both orientations of every edge
/// {s,l} of ks2. Larger c_hat makes assignments cheaper.
QapInstance build_instance(const KeypointSet& ks1, const KeypointSet& ks2, const CostModelParams& p,
                           bool complete, bool with_pairwise = true);

/// Chain rule of <cg, costs> back to the parameters. `cg` must mirror the
/// instance built from the same arguments.
ParamGradient backward(const KeypointSet& ks1, const KeypointSet& ks2, const CostModelParams& p,
                       const CostGradient& cg);

struct AdamConfig {
  double lr = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int halving_period = 200;  // lr halves every this many steps; 0 disables
  bool learn_c_hat = false;
};

template <typename Scalar>
struct BasicAdamState {
  AdamConfig config;
  Mat<Scalar> m_node, v_node, m_edge, v_edge;
  Scalar m_c_hat = Scalar(0), v_c_hat = Scalar(0);
  long step = 0;

  static BasicAdamState for_params(const BasicCostModelParams<Scalar>& p, AdamConfig cfg = {}) {
    BasicAdamState st;
    st.config = cfg;
    st.m_node = st.v_node = Mat<Scalar>::Zero(p.node_proj.rows(), p.node_proj.cols());
    st.m_edge = st.v_edge = Mat<Scalar>::Zero(p.edge_proj.rows(), p.edge_proj.cols());
    return st;
  }

  double current_lr() const {
    if (config.halving_period <= 0) return config.lr;
    return config.lr * std::pow(0.5, static_cast<double>(step / config.halving_period));
  }
};

using AdamState = BasicAdamState<double>;

namespace detail {

template <typename Scalar, typename P, typename G, typename M>
void adam_update(P& param, const G& grad, M& m, M& v, double lr, const AdamConfig& c, long t) {
  m = Scalar(c.beta1) * m + Scalar(1 - c.beta1) * grad;
  v = Scalar(c.beta2) * v + Scalar(1 - c.beta2) * grad.cwiseProduct(grad);
  const Scalar bc1 = Scalar(1 - std::pow(c.beta1, double(t)));
  const Scalar bc2 = Scalar(1 - std::pow(c.beta2, double(t)));
  param -= (Scalar(lr) * (m / bc1).array() / ((v / bc2).array().sqrt() + Scalar(c.epsilon))).matrix();
}

}  // namespace detail

/// One Adam update of every parameter (c_hat only when learn_c_hat).
template <typename Scalar>
void adam_step(BasicCostModelParams<Scalar>& p, const BasicParamGradient<Scalar>& g,
               BasicAdamState<Scalar>& st) {
  if (g.d_node_proj.rows() != p.node_proj.rows() || g.d_node_proj.cols() != p.node_proj.cols() ||
      g.d_edge_proj.rows() != p.edge_proj.rows() || g.d_edge_proj.cols() != p.edge_proj.cols() ||
      st.m_node.rows() != p.node_proj.rows() || st.m_node.cols() != p.node_proj.cols())
    throw precondition_error("adam_step: shape mismatch");
  const double lr = st.current_lr();
  const long t = ++st.step;
  detail::adam_update<Scalar>(p.node_proj, g.d_node_proj, st.m_node, st.v_node, lr, st.config, t);
  detail::adam_update<Scalar>(p.edge_proj, g.d_edge_proj, st.m_edge, st.v_edge, lr, st.config, t);
  if (st.config.learn_c_hat) {
    Eigen::Matrix<Scalar, 1, 1> c{p.c_hat}, dc{g.d_c_hat}, m{st.m_c_hat}, v{st.v_c_hat};
    detail::adam_update<Scalar>(c, dc, m, v, lr, st.config, t);
    p.c_hat = c(0);
    st.m_c_hat = m(0);
    st.v_c_hat = v(0);
  }
}

/// JSON checkpoint with shape-tagged, hex-encoded matrices.
void save_checkpoint(const CostModelParams& p, const std::filesystem::path& path);
CostModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace clgm
