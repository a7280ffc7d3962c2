#pragma once

#include "clgm/instances.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace clgm {

/// Malformed or unsupported dataset / checkpoint / instance files.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetSchemaVersion = 1;

struct SyntheticConfig {
  int universe_size = 10;
  int num_sets = 20;
  double coord_noise_sigma = 0.02;
  int feature_dim = 16;
  double feature_noise_sigma = 0.1;
  double occlusion_rate = 0.0;
  double outlier_rate = 0.0;
  std::uint64_t rng_seed = 0;

  // Exact number of visible landmarks per set; 0 samples occlusion i.i.d.
  // with occlusion_rate instead.
  int visible_points = 0;
  // Leading feature dimensions that carry the landmark identity; the rest
  // only carry per-point clutter of scale clutter_sigma.
  int informative_dim = 8;
  double clutter_sigma = 2.0;
  // Minimum number of labels every set must share with the landmark
  // universe, and every admissible triple must share.
  int min_common = 3;
  int max_retries = 100;
};

void validate(const SyntheticConfig& cfg);

struct Dataset {
  std::vector<KeypointSet> sets;
  int universe_size = 0;
};

void validate(const Dataset& ds);

/// Deterministic synthetic multi-set keypoint data with ground truth.
Dataset generate(const SyntheticConfig& cfg);

/// Delaunay triangulation edges (Bowyer-Watson). Collinear input yields the
/// path through the points in (x, y) order. Fewer than 3 points yield the
/// path as well.
std::vector<Edge> delaunay(const Points2& points);

/// Triangles of the Delaunay triangulation as sorted index triples.
std::vector<std::array<Index, 3>> delaunay_triangles(const Points2& points);

/// Non-negative labels of a labelled set.
std::set<int> label_set(const KeypointSet& ks);

/// The points whose label is in `keep`, in their original order, with the
/// Delaunay edges recomputed on the remaining coordinates.
KeypointSet restrict_to_labels(const KeypointSet& ks, const std::set<int>& keep);

/// Labels shared by two sets.
int common_labels(const KeypointSet& a, const KeypointSet& b);
int common_labels(const KeypointSet& a, const KeypointSet& b, const KeypointSet& c);

/// Correct pairs over the number of labels the two sets have in common.
double accuracy(const Matching& pred, const KeypointSet& ks1, const KeypointSet& ks2);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PrecisionRecall precision_recall(const Matching& pred, const KeypointSet& ks1,
                                 const KeypointSet& ks2);
double f1(const Matching& pred, const KeypointSet& ks1, const KeypointSet& ks2);

/// Hex-float JSON round trip; load throws data_error with field context.
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);
std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const std::string& text);

}  // namespace clgm
