#include "clgm/trainer.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace clgm;

namespace {

SyntheticConfig easy(int sets = 6) {
  SyntheticConfig c;
  c.universe_size = 6;
  c.num_sets = sets;
  c.visible_points = 5;
  c.feature_dim = 6;
  c.informative_dim = 6;
  c.clutter_sigma = 0.0;
  c.rng_seed = 5;
  return c;
}

CostModelParams identity_params(Index d) {
  CostModelParams p;
  p.node_proj = MatrixX::Identity(d, d);
  p.edge_proj = MatrixX::Identity(d, d);
  return p;
}

TrainConfig lap_config() {
  TrainConfig t;
  t.solver.kind = SolverKind::lap;
  t.eval_triples = 10;
  return t;
}

}  // namespace

TEST(SampleTriple, ThreeSetsGiveThatTriple) {
  const Dataset ds = generate(easy(3));
  Rng rng = make_rng(1, 0);
  EXPECT_EQ(sample_triple(ds, rng), (TripleIndex{0, 1, 2}));
}

TEST(SampleTriple, ReproducibleForSeed) {
  const Dataset ds = generate(easy(8));
  Rng a = make_rng(2, 0), b = make_rng(2, 0);
  for (int k = 0; k < 20; ++k) EXPECT_EQ(sample_triple(ds, a), sample_triple(ds, b));
}

TEST(SampleTriple, NeedsThreeSets) {
  const Dataset ds = generate(easy(1));
  Rng rng = make_rng(3, 0);
  EXPECT_THROW(sample_triple(ds, rng), precondition_error);
}

TEST(SampleTriple, RespectsCommonLabelRule) {
  SyntheticConfig c = easy(10);
  c.universe_size = 10;
  c.visible_points = 4;
  c.min_common = 1;
  const Dataset ds = generate(c);
  const TripleSampler sampler(ds, 2);
  for (const auto& t : sampler.admissible()) {
    EXPECT_GE(common_labels(ds.sets[t[0]], ds.sets[t[1]], ds.sets[t[2]]), 2);
    EXPECT_LT(t[0], t[1]);
    EXPECT_LT(t[1], t[2]);
  }
  Rng rng = make_rng(4, 0);
  const auto batch = sampler.sample_batch(rng, 5);
  EXPECT_EQ(std::set<TripleIndex>(batch.begin(), batch.end()).size(), 5u);
}

TEST(TripleView, FiltersToSharedLabels) {
  const Dataset ds = generate(easy());
  const auto v = triple_view(ds, {0, 1, 2}, true);
  const auto shared = label_set(v[0]);
  EXPECT_EQ(static_cast<int>(shared.size()), common_labels(ds.sets[0], ds.sets[1], ds.sets[2]));
  for (const auto& ks : v) {
    EXPECT_EQ(label_set(ks), shared);
    EXPECT_NO_THROW(validate(ks));
  }
  EXPECT_EQ(triple_view(ds, {0, 1, 2}, false)[0].size(), ds.sets[0].size());
}

TEST(TrainStep, SixSolvesPerTriple) {
  const Dataset ds = generate(easy(8));
  Rng rng = make_rng(5, 0);
  CostModelParams p = init_params(6, 4, 0.0, 1.0, rng);
  TrainConfig cfg;
  cfg.solver.kind = SolverKind::qap_local;
  AdamState adam = AdamState::for_params(p);
  const auto batch = TripleSampler(ds, 3).sample_batch(rng, 4);
  EXPECT_EQ(train_step(ds, batch, p, adam, cfg).solver_calls, 24);
}

TEST(TrainStep, ConsistentMatchingsAreAFixedPoint) {
  const Dataset ds = generate(easy());
  CostModelParams p = identity_params(6);
  const CostModelParams before = p;
  AdamState adam = AdamState::for_params(p);
  const StepResult r = train_step(ds, {{0, 1, 2}, {1, 3, 5}}, p, adam, lap_config(), true);
  EXPECT_EQ(r.mean_cycle_loss, 0.0);
  EXPECT_TRUE(r.gradient.d_node_proj.isZero(0.0));
  EXPECT_TRUE(r.gradient.d_edge_proj.isZero(0.0));
  EXPECT_EQ(p.node_proj, before.node_proj);
  EXPECT_EQ(p.edge_proj, before.edge_proj);
}

TEST(TrainStep, CostGradientsAreMultiplesOfInverseLambda) {
  SyntheticConfig c = easy();
  c.clutter_sigma = 1.0;
  c.informative_dim = 2;
  const Dataset ds = generate(c);
  Rng rng = make_rng(6, 0);
  CostModelParams p = init_params(6, 4, 0.0, 1.0, rng);
  AdamState adam = AdamState::for_params(p);
  TrainConfig cfg;
  cfg.solver.kind = SolverKind::qap_exact;
  const StepResult r = train_step(ds, {{0, 1, 2}}, p, adam, cfg, true);
  for (const auto& cg : r.samples[0].cost_gradients) {
    for (Index i = 0; i < cg.unary.rows(); ++i)
      for (Index s = 0; s < cg.unary.cols(); ++s) {
        const double v = cg.unary(i, s);
        EXPECT_TRUE(v == 0.0 || v == 1.0 / 80.0 || v == -1.0 / 80.0) << v;
      }
    for (const auto& [k, v] : cg.pairwise)
      EXPECT_TRUE(v == 0.0 || v == 1.0 / 80.0 || v == -1.0 / 80.0) << v;
  }
}

TEST(Train, DeterministicAndThreadIndependent) {
  SyntheticConfig c = easy(8);
  c.clutter_sigma = 1.0;
  c.informative_dim = 3;
  const Dataset ds = generate(c);
  TrainConfig cfg = lap_config();
  cfg.steps = 20;
  cfg.batch_triples = 4;
  auto run = [&](int threads) {
    Rng rng = make_rng(7, 0);
    CostModelParams p = init_params(6, 4, 0.0, 0.1, rng);
    TrainConfig t = cfg;
    t.threads = threads;
    train(ds, p, t);
    return p;
  };
  const CostModelParams a = run(1), b = run(1), d = run(4);
  EXPECT_EQ(a.node_proj, b.node_proj);
  EXPECT_EQ(a.node_proj, d.node_proj);
  EXPECT_EQ(a.edge_proj, d.edge_proj);
}

TEST(Train, ReportRecordsEveryStep) {
  const Dataset ds = generate(easy());
  TrainConfig cfg = lap_config();
  cfg.steps = 7;
  cfg.eval_every = 3;
  Rng rng = make_rng(8, 0);
  CostModelParams p = init_params(6, 4, 0.0, 0.1, rng);
  TrainReport report = train(ds, p, cfg);
  ASSERT_EQ(report.records.size(), 7u);
  for (std::size_t k = 0; k < report.records.size(); ++k) {
    EXPECT_EQ(report.records[k].step, static_cast<int>(k));
    EXPECT_EQ(report.records[k].solver_calls, 6 * cfg.batch_triples);
  }
  report.config["lambda"] = "80";
  std::ostringstream os;
  write_report_csv(report, os);
  EXPECT_NE(os.str().find("# lambda=80\n"), std::string::npos);
  EXPECT_NE(os.str().find("step,cycle_loss,accuracy_or_f1,wall_ms\n"), std::string::npos);
}

TEST(Train, InvalidConfigRejected) {
  TrainConfig cfg;
  cfg.batch_triples = 0;
  EXPECT_THROW(validate(cfg), precondition_error);
  cfg = {};
  cfg.lambda = 0.0;
  EXPECT_THROW(validate(cfg), precondition_error);
}

TEST(Evaluate, OracleCostsAreExact) {
  SyntheticConfig c = easy();
  c.feature_noise_sigma = 0.0;
  const Dataset ds = generate(c);
  EvalConfig ec;
  ec.solver.kind = SolverKind::qap_exact;
  const EvalSummary s = evaluate(ds, identity_params(6), ec);
  EXPECT_EQ(s.mean_accuracy, 1.0);
  EXPECT_EQ(s.mean_cycle_loss, 0.0);
  // unfiltered incomplete matching: only near-identical embeddings are worth assigning
  ec.complete = false;
  ec.solver.kind = SolverKind::lap;
  CostModelParams strict = identity_params(6);
  strict.c_hat = -0.99;
  EXPECT_EQ(evaluate(ds, strict, ec).mean_f1, 1.0);
}

TEST(Evaluate, RandomParamsOnUninformativeDataAreNearChance) {
  SyntheticConfig c;
  c.universe_size = 10;
  c.num_sets = 20;
  c.informative_dim = 1;
  c.clutter_sigma = 10.0;
  c.rng_seed = 3;
  const Dataset ds = generate(c);
  // a uniformly random complete matching of n points is right on 1/n of them
  const double chance = 1.0 / c.universe_size;
  EvalConfig ec;
  ec.solver.kind = SolverKind::lap;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng = make_rng(seed, 1);
    total += evaluate(ds, init_params(16, 16, 0.0, 1.0, rng), ec).mean_accuracy;
  }
  EXPECT_NEAR(total / 5.0, chance, 0.05);
}

TEST(Evaluate, EmptyDatasetRejected) {
  EXPECT_THROW(evaluate(Dataset{}, identity_params(2), EvalConfig{}), precondition_error);
}
