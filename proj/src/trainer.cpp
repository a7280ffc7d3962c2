#include "clgm/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

namespace clgm {

void validate(const TrainConfig& cfg) {
  auto fail = [](const std::string& what) { throw precondition_error("train config: " + what); };
  if (cfg.batch_triples < 1) fail("batch_triples must be >= 1");
  if (!(cfg.lambda > 0.0)) fail("lambda must be > 0");
  if (cfg.steps < 0) fail("steps must be >= 0");
  if (!(cfg.adam.lr > 0.0)) fail("lr must be > 0");
  if (cfg.adam.halving_period < 0) fail("lr halving period must be >= 0");
  if (cfg.eval_every < 0) fail("eval_every must be >= 0");
  if (cfg.eval_triples < 0) fail("eval_triples must be >= 0");
  if (cfg.threads < 1) fail("threads must be >= 1");
  validate(cfg.solver);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) {
          try {
            fn(k);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

// ------------------------------------------------------------- sampling

TripleSampler::TripleSampler(const Dataset& ds, int min_common) {
  const std::size_t n = ds.sets.size();
  auto labelled = [&](std::size_t k) { return ds.sets[k].universe_labels.has_value(); };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c) {
        const bool ok = !(labelled(a) && labelled(b) && labelled(c)) ||
                        common_labels(ds.sets[a], ds.sets[b], ds.sets[c]) >= min_common;
        if (ok) admissible_.push_back({a, b, c});
      }
  if (admissible_.empty())
    throw precondition_error("no admissible triple: need 3 sets sharing at least " +
                             std::to_string(min_common) + " labels");
}

TripleIndex TripleSampler::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, admissible_.size() - 1);
  return admissible_[pick(rng)];
}

std::vector<TripleIndex> TripleSampler::sample_batch(Rng& rng, int count) const {
  std::vector<TripleIndex> out;
  std::set<std::size_t> used;
  std::uniform_int_distribution<std::size_t> pick(0, admissible_.size() - 1);
  while (static_cast<int>(out.size()) < count) {
    std::size_t k = pick(rng);
    if (used.size() < admissible_.size())
      while (used.contains(k)) k = pick(rng);
    used.insert(k);
    out.push_back(admissible_[k]);
  }
  return out;
}

TripleIndex sample_triple(const Dataset& ds, Rng& rng, int min_common) {
  return TripleSampler(ds, min_common).sample(rng);
}

// -------------------------------------------------------------- training

namespace {

std::string triple_name(const Dataset& ds, const TripleIndex& t) {
  return "(" + ds.sets[t[0]].set_id + ", " + ds.sets[t[1]].set_id + ", " + ds.sets[t[2]].set_id + ")";
}

std::array<QapInstance, 3> build_triple(const std::array<KeypointSet, 3>& sets,
                                        const CostModelParams& p, const SolverConfig& solver,
                                        bool complete) {
  const bool pairwise = solver.kind != SolverKind::lap;
  return {build_instance(sets[0], sets[1], p, complete, pairwise),
          build_instance(sets[1], sets[2], p, complete, pairwise),
          build_instance(sets[2], sets[0], p, complete, pairwise)};
}

template <std::size_t N>
std::array<KeypointSet, N> restricted_view(std::array<KeypointSet, N> sets, bool filter) {
  if (!filter) return sets;
  for (const auto& ks : sets)
    if (!ks.universe_labels) return sets;
  std::set<int> shared = label_set(sets[0]);
  for (std::size_t k = 1; k < N; ++k) {
    const auto other = label_set(sets[k]);
    std::erase_if(shared, [&](int l) { return !other.contains(l); });
  }
  for (auto& ks : sets) ks = restrict_to_labels(ks, shared);
  return sets;
}

}  // namespace

std::array<KeypointSet, 3> triple_view(const Dataset& ds, const TripleIndex& t, bool filter) {
  return restricted_view<3>({ds.sets.at(t[0]), ds.sets.at(t[1]), ds.sets.at(t[2])}, filter);
}

std::array<KeypointSet, 2> pair_view(const Dataset& ds, std::size_t a, std::size_t b, bool filter) {
  return restricted_view<2>({ds.sets.at(a), ds.sets.at(b)}, filter);
}

TripleSample process_triple(const Dataset& ds, const TripleIndex& t, const CostModelParams& p,
                            const TrainConfig& cfg, ParamGradient& grad) {
  try {
    TripleSample out;
    out.sets = t;
    const auto sets = triple_view(ds, t, cfg.complete && cfg.filter_common);
    out.instances = build_triple(sets, p, cfg.solver, cfg.complete);
    const auto& inst = out.instances;

    std::array<Matching, 3> x;
    for (int k = 0; k < 3; ++k) x[k] = solve(inst[k], cfg.solver);
    out.matchings = {x[0], x[1], x[2]};
    out.cycle_loss = total_loss(out.matchings);
    const auto dl_dx = loss_gradient(out.matchings);

    std::array<Matching, 3> xp;
    for (int k = 0; k < 3; ++k) {
      const QapInstance perturbed = perturb_costs(inst[k], {dl_dx[k]}, cfg.lambda);
      xp[k] = solve(perturbed, cfg.solver, x[k]);
    }
    out.perturbed = {xp[0], xp[1], xp[2]};
    out.solver_calls = 6;

    for (int k = 0; k < 3; ++k) {
      out.cost_gradients[k] = bb_gradient(inst[k], lift(x[k], inst[k]), lift(xp[k], inst[k]),
                                          cfg.lambda, cfg.pairwise_gradients);
      grad += backward(sets[k], sets[(k + 1) % 3], p, out.cost_gradients[k]);
    }
    return out;
  } catch (const std::exception& e) {
    throw std::runtime_error("triple " + triple_name(ds, t) + ": " + e.what());
  }
}

StepResult train_step(const Dataset& ds, const std::vector<TripleIndex>& batch,
                      CostModelParams& p, AdamState& adam, const TrainConfig& cfg,
                      bool keep_samples) {
  validate(cfg);
  if (batch.empty()) throw precondition_error("train_step: empty batch");
  std::vector<ParamGradient> grads(batch.size(), ParamGradient::zeros_like(p));
  std::vector<TripleSample> samples(batch.size());
  parallel_for(batch.size(), cfg.threads,
               [&](std::size_t k) { samples[k] = process_triple(ds, batch[k], p, cfg, grads[k]); });

  StepResult r;
  r.gradient = ParamGradient::zeros_like(p);
  long loss = 0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    r.gradient += grads[k];
    loss += samples[k].cycle_loss;
    r.solver_calls += samples[k].solver_calls;
  }
  r.mean_cycle_loss = static_cast<double>(loss) / static_cast<double>(batch.size());
  adam_step(p, r.gradient, adam);
  if (keep_samples) r.samples = std::move(samples);
  return r;
}

// ------------------------------------------------------------ evaluation

EvalConfig eval_config(const TrainConfig& cfg) {
  return {cfg.solver, cfg.complete, cfg.filter_common, cfg.min_common, cfg.eval_triples,
          cfg.rng_seed, cfg.threads};
}

double mean_cycle_loss(const Dataset& ds, const CostModelParams& p, const EvalConfig& cfg,
                       const std::vector<TripleIndex>& triples) {
  if (triples.empty()) return 0.0;
  std::vector<long> losses(triples.size(), 0);
  parallel_for(triples.size(), cfg.threads, [&](std::size_t k) {
    const auto sets = triple_view(ds, triples[k], cfg.complete && cfg.filter_common);
    const auto inst = build_triple(sets, p, cfg.solver, cfg.complete);
    losses[k] = total_loss(
        {solve(inst[0], cfg.solver), solve(inst[1], cfg.solver), solve(inst[2], cfg.solver)});
  });
  double total = 0.0;
  for (long l : losses) total += static_cast<double>(l);
  return total / static_cast<double>(triples.size());
}

EvalSummary evaluate(const Dataset& ds, const CostModelParams& p, const EvalConfig& cfg) {
  if (ds.sets.empty()) throw precondition_error("evaluate: empty dataset");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < ds.sets.size(); ++a)
    for (std::size_t b = a + 1; b < ds.sets.size(); ++b)
      if (common_labels(ds.sets[a], ds.sets[b]) >= cfg.min_common) pairs.emplace_back(a, b);
  if (pairs.empty()) throw precondition_error("evaluate: no set pair shares enough labels");

  const bool with_pairwise = cfg.solver.kind != SolverKind::lap;
  std::vector<double> acc(pairs.size()), f(pairs.size());
  parallel_for(pairs.size(), cfg.threads, [&](std::size_t k) {
    const auto [ks1, ks2] =
        pair_view(ds, pairs[k].first, pairs[k].second, cfg.complete && cfg.filter_common);
    const Matching m = solve(build_instance(ks1, ks2, p, cfg.complete, with_pairwise), cfg.solver);
    acc[k] = accuracy(m, ks1, ks2);
    f[k] = f1(m, ks1, ks2);
  });

  EvalSummary s;
  s.pairs = static_cast<int>(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    s.mean_accuracy += acc[k];
    s.mean_f1 += f[k];
  }
  s.mean_accuracy /= s.pairs;
  s.mean_f1 /= s.pairs;

  if (cfg.eval_triples > 0 && ds.sets.size() >= 3) {
    Rng rng = make_rng(cfg.seed, stream_id("eval-triples"));
    const auto triples = TripleSampler(ds, cfg.min_common).sample_batch(rng, cfg.eval_triples);
    s.triples = static_cast<int>(triples.size());
    s.mean_cycle_loss = mean_cycle_loss(ds, p, cfg, triples);
  }
  return s;
}

// -------------------------------------------------------------- reporting

void write_report_csv(const TrainReport& report, std::ostream& out) {
  out << "# schema_version=" << kReportSchemaVersion << "\n";
  for (const auto& [k, v] : report.config) out << "# " << k << "=" << v << "\n";
  out << "# initial_accuracy=" << report.initial.mean_accuracy << "\n"
      << "# initial_f1=" << report.initial.mean_f1 << "\n"
      << "# initial_cycle_loss=" << report.initial.mean_cycle_loss << "\n"
      << "# final_accuracy=" << report.final.mean_accuracy << "\n"
      << "# final_f1=" << report.final.mean_f1 << "\n"
      << "# final_cycle_loss=" << report.final.mean_cycle_loss << "\n";
  out << "step,cycle_loss,accuracy_or_f1,wall_ms\n";
  for (const auto& r : report.records) {
    out << r.step << "," << r.cycle_loss << ",";
    if (r.accuracy_or_f1 >= 0) out << r.accuracy_or_f1;
    out << "," << r.wall_ms << "\n";
  }
}

TrainReport train(const Dataset& ds, CostModelParams& p, const TrainConfig& cfg) {
  validate(cfg);
  TrainReport report;
  const TripleSampler sampler(ds, cfg.min_common);
  Rng rng = make_rng(cfg.rng_seed, stream_id("sampling"));
  AdamState adam = AdamState::for_params(p, cfg.adam);

  const EvalConfig ecfg = eval_config(cfg);
  auto eval = [&] { return evaluate(ds, p, ecfg); };
  auto headline = [&](const EvalSummary& s) { return cfg.complete ? s.mean_accuracy : s.mean_f1; };

  report.initial = eval();
  for (int step = 0; step < cfg.steps; ++step) {
    const auto start = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.step = step;
    if (step > 0 && cfg.eval_every > 0 && step % cfg.eval_every == 0) rec.accuracy_or_f1 = headline(eval());
    if (step == 0) rec.accuracy_or_f1 = headline(report.initial);
    const auto batch = sampler.sample_batch(rng, cfg.batch_triples);
    const StepResult r = train_step(ds, batch, p, adam, cfg);
    rec.cycle_loss = r.mean_cycle_loss;
    rec.solver_calls = r.solver_calls;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.records.push_back(rec);
  }
  report.final = cfg.steps > 0 ? eval() : report.initial;
  return report;
}

}  // namespace clgm
