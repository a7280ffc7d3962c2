#include "clgm/data.hpp"
#include "clgm/random.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

namespace clgm {

void validate(const SyntheticConfig& cfg) {
  auto fail = [](const std::string& what) { throw precondition_error("synthetic config: " + what); };
  if (cfg.universe_size < 1) fail("universe_size must be >= 1");
  if (cfg.num_sets < 1) fail("num_sets must be >= 1");
  if (cfg.feature_dim < 1) fail("feature_dim must be >= 1");
  if (cfg.informative_dim < 1 || cfg.informative_dim > cfg.feature_dim)
    fail("informative_dim must be in [1, feature_dim]");
  if (!(cfg.coord_noise_sigma >= 0) || !(cfg.feature_noise_sigma >= 0) || !(cfg.clutter_sigma >= 0))
    fail("noise scales must be >= 0");
  if (!(cfg.occlusion_rate >= 0 && cfg.occlusion_rate <= 1)) fail("occlusion_rate must be in [0, 1]");
  if (!(cfg.outlier_rate >= 0 && cfg.outlier_rate <= 1)) fail("outlier_rate must be in [0, 1]");
  if (cfg.visible_points < 0 || cfg.visible_points > cfg.universe_size)
    fail("visible_points must be in [0, universe_size]");
  if (cfg.min_common < 0) fail("min_common must be >= 0");
  if (cfg.max_retries < 1) fail("max_retries must be >= 1");
}

void validate(const Dataset& ds) {
  if (ds.universe_size < 0) throw precondition_error("dataset: negative universe size");
  for (const auto& ks : ds.sets) {
    validate(ks);
    if (ks.universe_labels)
      for (int label : *ks.universe_labels)
        if (label < -1 || label >= ds.universe_size)
          throw precondition_error("dataset: label out of range in set '" + ks.set_id + "'");
  }
}

namespace {

struct Universe {
  Points2 landmarks;
  MatrixX prototypes;
};

Universe sample_universe(const SyntheticConfig& cfg) {
  Rng rng = make_rng(cfg.rng_seed, stream_id("universe"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Universe u;
  u.landmarks.resize(cfg.universe_size, 2);
  for (int k = 0; k < cfg.universe_size; ++k) {
    u.landmarks(k, 0) = unit(rng);
    u.landmarks(k, 1) = unit(rng);
  }
  u.prototypes = MatrixX::Zero(cfg.universe_size, cfg.feature_dim);
  for (int k = 0; k < cfg.universe_size; ++k)
    for (int d = 0; d < cfg.informative_dim; ++d) u.prototypes(k, d) = normal(rng);
  return u;
}

Eigen::RowVectorXd sample_feature(const SyntheticConfig& cfg, const Eigen::RowVectorXd& prototype,
                                  Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::RowVectorXd f = prototype;
  for (int d = 0; d < cfg.feature_dim; ++d) {
    f(d) += cfg.feature_noise_sigma * noise(rng);
    if (d >= cfg.informative_dim) f(d) += cfg.clutter_sigma * noise(rng);
  }
  return f;
}

std::string set_name(int k) {
  std::ostringstream os;
  os << "set_" << std::setw(3) << std::setfill('0') << k;
  return os.str();
}

std::optional<KeypointSet> sample_set(const SyntheticConfig& cfg, const Universe& u, int k, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<int> visible;
  if (cfg.visible_points > 0) {
    std::vector<int> all(cfg.universe_size);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    visible.assign(all.begin(), all.begin() + cfg.visible_points);
  } else {
    for (int l = 0; l < cfg.universe_size; ++l)
      if (unit(rng) >= cfg.occlusion_rate) visible.push_back(l);
  }
  int outliers = 0;
  for (int l = 0; l < cfg.universe_size; ++l)
    if (unit(rng) < cfg.outlier_rate) ++outliers;

  const int labelled = static_cast<int>(visible.size());
  if (labelled < std::max(cfg.min_common, 1) || labelled + outliers < 3) return std::nullopt;

  const double theta = 2.0 * std::numbers::pi * unit(rng);
  const double tx = 2.0 * unit(rng) - 1.0;
  const double ty = 2.0 * unit(rng) - 1.0;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);

  const int n = labelled + outliers;
  std::vector<int> labels;
  Points2 pts(n, 2);
  MatrixX feats(n, cfg.feature_dim);
  for (int r = 0; r < labelled; ++r) {
    const int l = visible[r];
    Eigen::Vector2d p = rot * u.landmarks.row(l).transpose() + Eigen::Vector2d(tx, ty);
    p += cfg.coord_noise_sigma * Eigen::Vector2d(normal(rng), normal(rng));
    pts.row(r) = p.transpose();
    feats.row(r) = sample_feature(cfg, u.prototypes.row(l), rng);
    labels.push_back(l);
  }
  for (int r = labelled; r < n; ++r) {
    Eigen::Vector2d p = rot * Eigen::Vector2d(unit(rng), unit(rng)) + Eigen::Vector2d(tx, ty);
    pts.row(r) = p.transpose();
    Eigen::RowVectorXd proto = Eigen::RowVectorXd::Zero(cfg.feature_dim);
    for (int d = 0; d < cfg.informative_dim; ++d) proto(d) = normal(rng);
    feats.row(r) = sample_feature(cfg, proto, rng);
    labels.push_back(-1);
  }

  // present points in random order so that indices carry no label signal
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  KeypointSet ks;
  ks.set_id = set_name(k);
  ks.points.resize(n, 2);
  ks.features.resize(n, cfg.feature_dim);
  std::vector<int> shuffled(n);
  for (int r = 0; r < n; ++r) {
    ks.points.row(r) = pts.row(order[r]);
    ks.features.row(r) = feats.row(order[r]);
    shuffled[r] = labels[order[r]];
  }
  ks.universe_labels = std::move(shuffled);
  ks.edges = delaunay(ks.points);
  return ks;
}

}  // namespace

Dataset generate(const SyntheticConfig& cfg) {
  validate(cfg);
  const Universe u = sample_universe(cfg);
  Dataset ds;
  ds.universe_size = cfg.universe_size;
  for (int k = 0; k < cfg.num_sets; ++k) {
    Rng rng = make_rng(cfg.rng_seed, stream_id("set") + static_cast<std::uint64_t>(k));
    std::optional<KeypointSet> ks;
    for (int attempt = 0; attempt < cfg.max_retries && !ks; ++attempt) ks = sample_set(cfg, u, k, rng);
    if (!ks)
      throw data_error("generate: set " + std::to_string(k) + " kept fewer than " +
                       std::to_string(std::max(cfg.min_common, 3)) + " points after " +
                       std::to_string(cfg.max_retries) + " attempts");
    ds.sets.push_back(std::move(*ks));
  }
  return ds;
}

namespace {

const std::vector<int>& labels_of(const KeypointSet& ks) {
  if (!ks.universe_labels)
    throw precondition_error("keypoint set '" + ks.set_id + "' has no ground-truth labels");
  return *ks.universe_labels;
}

int correct_pairs(const Matching& pred, const KeypointSet& ks1, const KeypointSet& ks2) {
  if (pred.n1() != ks1.size() || pred.n2() != ks2.size())
    throw precondition_error("metrics: matching shape does not match keypoint sets");
  const auto& l1 = labels_of(ks1);
  const auto& l2 = labels_of(ks2);
  int correct = 0;
  for (auto [i, s] : pred.pairs())
    if (l1[i] >= 0 && l1[i] == l2[s]) ++correct;
  return correct;
}

}  // namespace

std::set<int> label_set(const KeypointSet& ks) {
  std::set<int> s;
  for (int l : labels_of(ks))
    if (l >= 0) s.insert(l);
  return s;
}

KeypointSet restrict_to_labels(const KeypointSet& ks, const std::set<int>& keep) {
  const auto& labels = labels_of(ks);
  std::vector<Index> rows;
  for (Index r = 0; r < ks.size(); ++r)
    if (keep.contains(labels[r])) rows.push_back(r);
  KeypointSet out;
  out.set_id = ks.set_id;
  out.points.resize(static_cast<Index>(rows.size()), 2);
  out.features.resize(static_cast<Index>(rows.size()), ks.features.cols());
  std::vector<int> kept;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.points.row(k) = ks.points.row(rows[k]);
    out.features.row(k) = ks.features.row(rows[k]);
    kept.push_back(labels[rows[k]]);
  }
  out.universe_labels = std::move(kept);
  out.edges = delaunay(out.points);
  return out;
}

int common_labels(const KeypointSet& a, const KeypointSet& b) {
  const auto sa = label_set(a), sb = label_set(b);
  return static_cast<int>(std::count_if(sa.begin(), sa.end(), [&](int l) { return sb.contains(l); }));
}

int common_labels(const KeypointSet& a, const KeypointSet& b, const KeypointSet& c) {
  const auto sa = label_set(a), sb = label_set(b), sc = label_set(c);
  return static_cast<int>(std::count_if(
      sa.begin(), sa.end(), [&](int l) { return sb.contains(l) && sc.contains(l); }));
}

double accuracy(const Matching& pred, const KeypointSet& ks1, const KeypointSet& ks2) {
  const int correct = correct_pairs(pred, ks1, ks2);
  const int common = common_labels(ks1, ks2);
  if (common == 0) return pred.empty() ? 1.0 : 0.0;
  return static_cast<double>(correct) / common;
}

PrecisionRecall precision_recall(const Matching& pred, const KeypointSet& ks1,
                                 const KeypointSet& ks2) {
  const int correct = correct_pairs(pred, ks1, ks2);
  const int common = common_labels(ks1, ks2);
  if (pred.empty() && common == 0) return {1.0, 1.0, 1.0};
  PrecisionRecall pr;
  pr.precision = pred.empty() ? 0.0 : static_cast<double>(correct) / pred.size();
  pr.recall = common == 0 ? 0.0 : static_cast<double>(correct) / common;
  if (pred.empty() || common == 0 || pr.precision + pr.recall == 0.0) return pr;
  pr.f1 = 2.0 * pr.precision * pr.recall / (pr.precision + pr.recall);
  return pr;
}

double f1(const Matching& pred, const KeypointSet& ks1, const KeypointSet& ks2) {
  return precision_recall(pred, ks1, ks2).f1;
}

}  // namespace clgm
