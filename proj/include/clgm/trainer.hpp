#pragma once

#include "clgm/blackbox.hpp"
#include "clgm/costmodel.hpp"
#include "clgm/cycleloss.hpp"
#include "clgm/data.hpp"
#include "clgm/random.hpp"
#include "clgm/solvers.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace clgm {

struct TrainConfig {
  int batch_triples = 12;
  double lambda = 80.0;
  int steps = 500;
  AdamConfig adam;
  SolverConfig solver;
  bool complete = true;
  // Complete matching on labelled data keeps only the keypoints visible in
  // every set of a triple (or pair), like the filtered benchmark regime.
  bool filter_common = true;
  // Train edge projections from lifted-solution differences.
  bool pairwise_gradients = true;
  int eval_every = 50;
  int eval_triples = 50;
  int min_common = 3;
  int threads = 1;
  std::uint64_t rng_seed = 0;
};

void validate(const TrainConfig& cfg);

/// Indices of three distinct sets of a dataset, in cycle order 1 -> 2 -> 3.
using TripleIndex = std::array<std::size_t, 3>;

/// Uniform sampling among triples of sets sharing at least `min_common`
/// labels. Sets without labels are treated as compatible with everything.
class TripleSampler {
 public:
  TripleSampler(const Dataset& ds, int min_common);

  const std::vector<TripleIndex>& admissible() const { return admissible_; }
  TripleIndex sample(Rng& rng) const;
  /// `count` triples, distinct while enough admissible triples exist.
  std::vector<TripleIndex> sample_batch(Rng& rng, int count) const;

 private:
  std::vector<TripleIndex> admissible_;
};

TripleIndex sample_triple(const Dataset& ds, Rng& rng, int min_common = 3);

/// The keypoint sets as they enter matching: restricted to their shared
/// labels when `filter` is set and all of them are labelled, copies otherwise.
std::array<KeypointSet, 3> triple_view(const Dataset& ds, const TripleIndex& t, bool filter);
std::array<KeypointSet, 2> pair_view(const Dataset& ds, std::size_t a, std::size_t b, bool filter);

/// Everything computed for one triple during a training step.
struct TripleSample {
  TripleIndex sets{};
  std::array<QapInstance, 3> instances;
  MatchingTriple matchings;
  MatchingTriple perturbed;
  std::array<CostGradient, 3> cost_gradients;
  long cycle_loss = 0;
  int solver_calls = 0;
};

/// Forward solves, cycle loss, perturbed solves and bb gradients for one
/// triple, followed by the backward pass into `grad` (accumulated).
TripleSample process_triple(const Dataset& ds, const TripleIndex& t, const CostModelParams& p,
                            const TrainConfig& cfg, ParamGradient& grad);

struct StepResult {
  double mean_cycle_loss = 0.0;
  long solver_calls = 0;
  ParamGradient gradient;
  std::vector<TripleSample> samples;  // filled when keep_samples
};

/// One update on a batch: gradients are summed over the batch, then one Adam
/// step is applied.
StepResult train_step(const Dataset& ds, const std::vector<TripleIndex>& batch,
                      CostModelParams& p, AdamState& adam, const TrainConfig& cfg,
                      bool keep_samples = false);

struct EvalSummary {
  double mean_accuracy = 0.0;
  double mean_f1 = 0.0;
  double mean_cycle_loss = 0.0;
  int pairs = 0;
  int triples = 0;
};

struct EvalConfig {
  SolverConfig solver;
  bool complete = true;
  bool filter_common = true;
  int min_common = 3;
  int eval_triples = 50;
  std::uint64_t seed = 0;
  int threads = 1;
};

EvalConfig eval_config(const TrainConfig& cfg);

/// Metrics over all set pairs sharing at least `min_common` labels, and the
/// mean cycle loss over `eval_triples` triples drawn with `seed`.
EvalSummary evaluate(const Dataset& ds, const CostModelParams& p, const EvalConfig& cfg);

/// Mean cycle loss over the given triples.
double mean_cycle_loss(const Dataset& ds, const CostModelParams& p, const EvalConfig& cfg,
                       const std::vector<TripleIndex>& triples);

struct StepRecord {
  int step = 0;
  double cycle_loss = 0.0;
  double accuracy_or_f1 = -1.0;  // < 0 when not evaluated at this step
  long solver_calls = 0;
  double wall_ms = 0.0;
};

struct TrainReport {
  std::map<std::string, std::string> config;  // resolved settings, for provenance
  std::vector<StepRecord> records;
  EvalSummary initial;
  EvalSummary final;
};

inline constexpr int kReportSchemaVersion = 1;

void write_report_csv(const TrainReport& report, std::ostream& out);

/// Runs `cfg.steps` unsupervised cycle-loss updates.
TrainReport train(const Dataset& ds, CostModelParams& p, const TrainConfig& cfg);

/// Runs fn(k) for k in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace clgm
