// clgm: generate data, train the cost head with the cycle loss, evaluate,
// solve single instances and run the verification suite.
#include "clgm/costmodel.hpp"
#include "clgm/data.hpp"
#include "clgm/io.hpp"
#include "clgm/solvers.hpp"
#include "clgm/trainer.hpp"
#include "clgm/verification.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace clgm;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kCheckFailed = 3 };

// Merged view of every setting a command can take. Config files use the
// long flag names as keys: `steps = 500`.
struct RunConfig {
  SyntheticConfig synthetic;
  TrainConfig train;
  std::string solver = "qap_local";
  int embedding_dim = 32;
  double c_hat = 1.0;
  double init_scale = 0.05;
  std::string lambda_text = "80";
  bool incomplete = false;
  bool no_filter = false;
  bool no_pairwise_grad = false;
  std::uint64_t seed = 0;
  std::string dataset, checkpoint, init_checkpoint, output, report, instance, csv;
  std::vector<std::size_t> pair;
};

void add_common(CLI::App& cmd, RunConfig& rc) {
  // Consumed by expand_config before parsing; registered for --help.
  cmd.add_option("--config", "key = value settings file; command-line flags override it");
  cmd.add_option("--seed", rc.seed, "master seed for every random sub-stream")->capture_default_str();
  cmd.add_option("--threads", rc.train.threads, "worker cap")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_solver(CLI::App& cmd, RunConfig& rc) {
  cmd.add_option("--solver", rc.solver, "lap | qap_exact | qap_local")
      ->capture_default_str()
      ->check(CLI::IsMember({"lap", "qap_exact", "qap_local"}));
  cmd.add_option("--node-limit", rc.train.solver.node_limit, "qap_exact size cap")->capture_default_str();
  cmd.add_option("--ls-passes", rc.train.solver.local_search.max_passes)->capture_default_str();
  cmd.add_option("--ls-restarts", rc.train.solver.local_search.restarts)->capture_default_str();
  cmd.add_flag("--incomplete", rc.incomplete, "allow unassigned nodes (F1 regime)");
}

void add_regime(CLI::App& cmd, RunConfig& rc) {
  cmd.add_flag("--no-filter", rc.no_filter, "keep keypoints not shared by every set of a pair/triple");
  cmd.add_option("--min-common", rc.train.min_common, "labels a pair/triple must share")->capture_default_str();
  cmd.add_option("--eval-triples", rc.train.eval_triples)->capture_default_str();
}

SolverConfig resolved_solver(const RunConfig& rc) {
  SolverConfig s = rc.train.solver;
  s.kind = solver_kind_from_string(rc.solver);
  s.local_search.rng_seed = rc.seed;
  return s;
}

TrainConfig resolved_train(const RunConfig& rc) {
  TrainConfig t = rc.train;
  t.solver = resolved_solver(rc);
  t.complete = !rc.incomplete;
  t.filter_common = !rc.no_filter;
  t.pairwise_gradients = !rc.no_pairwise_grad;
  t.rng_seed = rc.seed;
  std::size_t used = 0;
  try {
    t.lambda = std::stod(rc.lambda_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != rc.lambda_text.size())
    throw precondition_error("--lambda: not a number: '" + rc.lambda_text + "'");
  validate(t);
  return t;
}

std::string text(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void print_summary(const EvalSummary& s, bool complete) {
  std::cout << (complete ? "accuracy " : "f1 ") << (complete ? s.mean_accuracy : s.mean_f1)
            << "\npairs " << s.pairs << "\ncycle_loss " << s.mean_cycle_loss << "\ntriples "
            << s.triples << "\n";
}

int cmd_gen(const RunConfig& rc) {
  SyntheticConfig sc = rc.synthetic;
  sc.rng_seed = rc.seed;
  const Dataset ds = generate(sc);
  save_dataset(ds, rc.output);
  std::size_t points = 0, edges = 0;
  for (const auto& ks : ds.sets) {
    points += static_cast<std::size_t>(ks.size());
    edges += ks.edges.size();
  }
  std::cout << "sets " << ds.sets.size() << "\npoints " << points << "\nedges " << edges << "\n";
  return kOk;
}

int cmd_train(const RunConfig& rc) {
  const TrainConfig tc = resolved_train(rc);
  const Dataset ds = load_dataset(rc.dataset);
  if (ds.sets.empty()) throw data_error("dataset has no sets");
  CostModelParams p;
  if (!rc.init_checkpoint.empty()) {
    p = load_checkpoint(rc.init_checkpoint);
  } else {
    Rng rng = make_rng(rc.seed, stream_id("init"));
    p = init_params(ds.sets.front().feature_dim(), rc.embedding_dim, rc.c_hat, rc.init_scale, rng);
  }
  TrainReport report = train(ds, p, tc);
  report.config = {{"dataset", rc.dataset},
                   {"seed", std::to_string(rc.seed)},
                   {"lambda", rc.lambda_text},
                   {"batch_triples", std::to_string(tc.batch_triples)},
                   {"steps", std::to_string(tc.steps)},
                   {"lr", text(tc.adam.lr)},
                   {"lr_halving", std::to_string(tc.adam.halving_period)},
                   {"learn_c_hat", tc.adam.learn_c_hat ? "true" : "false"},
                   {"solver", rc.solver},
                   {"node_limit", std::to_string(tc.solver.node_limit)},
                   {"ls_passes", std::to_string(tc.solver.local_search.max_passes)},
                   {"ls_restarts", std::to_string(tc.solver.local_search.restarts)},
                   {"complete", tc.complete ? "true" : "false"},
                   {"filter_common", tc.filter_common ? "true" : "false"},
                   {"pairwise_gradients", tc.pairwise_gradients ? "true" : "false"},
                   {"min_common", std::to_string(tc.min_common)},
                   {"eval_every", std::to_string(tc.eval_every)},
                   {"eval_triples", std::to_string(tc.eval_triples)},
                   {"embedding_dim", std::to_string(p.embedding_dim())},
                   {"c_hat", text(p.c_hat)},
                   {"init", rc.init_checkpoint.empty() ? "random scale=" + text(rc.init_scale)
                                                       : rc.init_checkpoint}};
  save_checkpoint(p, rc.checkpoint);
  if (!rc.report.empty()) {
    std::ofstream out(rc.report);
    if (!out) throw data_error("cannot write '" + rc.report + "'");
    write_report_csv(report, out);
  }
  std::cout << "initial\n";
  print_summary(report.initial, tc.complete);
  std::cout << "final\n";
  print_summary(report.final, tc.complete);
  return kOk;
}

int cmd_eval(const RunConfig& rc) {
  const TrainConfig tc = resolved_train(rc);
  const Dataset ds = load_dataset(rc.dataset);
  if (ds.sets.empty()) throw data_error("dataset has no sets");
  const CostModelParams p = load_checkpoint(rc.checkpoint);
  EvalConfig ec = eval_config(tc);
  const EvalSummary s = evaluate(ds, p, ec);
  print_summary(s, tc.complete);
  if (!rc.csv.empty()) {
    std::ofstream out(rc.csv);
    if (!out) throw data_error("cannot write '" + rc.csv + "'");
    out << "# schema_version=" << kReportSchemaVersion << "\n"
        << "regime,accuracy,f1,pairs,cycle_loss,triples\n"
        << (tc.complete ? "complete" : "incomplete") << "," << s.mean_accuracy << ","
        << s.mean_f1 << "," << s.pairs << "," << s.mean_cycle_loss << "," << s.triples << "\n";
  }
  return kOk;
}

int cmd_solve(const RunConfig& rc) {
  const SolverConfig sc = resolved_solver(rc);
  QapInstance inst;
  if (!rc.instance.empty()) {
    inst = load_instance(rc.instance);
    if (rc.incomplete) inst.complete = false;
  } else {
    if (rc.dataset.empty() || rc.checkpoint.empty() || rc.pair.size() != 2)
      throw precondition_error("solve: give --instance, or --dataset, --checkpoint and --pair A B");
    const Dataset ds = load_dataset(rc.dataset);
    for (std::size_t k : rc.pair)
      if (k >= ds.sets.size()) throw precondition_error("solve: --pair index out of range");
    const CostModelParams p = load_checkpoint(rc.checkpoint);
    const auto view = pair_view(ds, rc.pair[0], rc.pair[1], !rc.incomplete && !rc.no_filter);
    inst = build_instance(view[0], view[1], p, !rc.incomplete);
  }
  const Matching m = solve(inst, sc);
  const std::string out = matching_to_json(m, objective(inst, m));
  if (!rc.output.empty()) write_text_file(rc.output, out);
  std::cout << out;
  return kOk;
}

int cmd_check(const RunConfig& rc) {
  std::optional<CostModelParams> params;
  if (!rc.checkpoint.empty()) params = load_checkpoint(rc.checkpoint);
  bool ok = true;
  for (const auto& r : verify::run_verification_suite(rc.seed, params)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheckFailed;
}

// Splices `--config FILE` into flags placed before the remaining
// command-line arguments, so that later flags win. Keys are long flag
// names without the dashes; unknown keys are rejected.
std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
  if (args.empty()) return args;
  const CLI::App* cmd = app.get_subcommand_no_throw(args.front());
  if (!cmd) return args;
  std::vector<std::string> from_file, rest;
  for (std::size_t k = 1; k < args.size(); ++k) {
    std::string path;
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
      continue;
    }
    std::istringstream in(read_text_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      auto trim = [](std::string t) {
        const auto b = t.find_first_not_of(" \t\r");
        const auto e = t.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : t.substr(b, e - b + 1);
      };
      if (trim(line).empty()) continue;
      const std::string where = path + ":" + std::to_string(lineno);
      if (eq == std::string::npos) throw CLI::ValidationError(where, "expected key = value");
      const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
      const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
      if (key == "config" || !opt) throw CLI::ValidationError(where, "unknown key '" + key + "'");
      if (opt->get_type_size() == 0) {
        if (value == "true") from_file.push_back("--" + key);
        else if (value != "false") throw CLI::ValidationError(where, "expected true or false");
        continue;
      }
      from_file.push_back("--" + key);
      std::istringstream words(value);
      for (std::string w; words >> w;) from_file.push_back(w);
    }
  }
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised graph matching with a cycle-consistency loss"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  RunConfig rc;
  auto& sc = rc.synthetic;
  auto& tc = rc.train;

  auto* gen = app.add_subcommand("gen", "write a synthetic keypoint dataset");
  add_common(*gen, rc);
  gen->add_option("--universe", sc.universe_size)->capture_default_str();
  gen->add_option("--sets", sc.num_sets)->capture_default_str();
  gen->add_option("--coord-noise", sc.coord_noise_sigma)->capture_default_str();
  gen->add_option("--feature-dim", sc.feature_dim)->capture_default_str();
  gen->add_option("--feature-noise", sc.feature_noise_sigma)->capture_default_str();
  gen->add_option("--occlusion", sc.occlusion_rate)->capture_default_str();
  gen->add_option("--outliers", sc.outlier_rate)->capture_default_str();
  gen->add_option("--visible", sc.visible_points, "exact visible landmarks per set (0: i.i.d. occlusion)")
      ->capture_default_str();
  gen->add_option("--informative-dim", sc.informative_dim)->capture_default_str();
  gen->add_option("--clutter", sc.clutter_sigma)->capture_default_str();
  gen->add_option("--min-common", sc.min_common)->capture_default_str();
  gen->add_option("--max-retries", sc.max_retries)->capture_default_str();
  gen->add_option("-o,--output", rc.output)->required();

  auto* trn = app.add_subcommand("train", "unsupervised training with the cycle loss");
  add_common(*trn, rc);
  add_solver(*trn, rc);
  add_regime(*trn, rc);
  trn->add_option("--dataset", rc.dataset)->required();
  trn->add_option("-o,--checkpoint", rc.checkpoint, "output checkpoint")->required();
  trn->add_option("--report", rc.report, "CSV report path");
  trn->add_option("--init", rc.init_checkpoint, "start from this checkpoint");
  trn->add_option("--embedding-dim", rc.embedding_dim)->capture_default_str();
  trn->add_option("--c-hat", rc.c_hat)->capture_default_str();
  trn->add_option("--init-scale", rc.init_scale)->capture_default_str();
  trn->add_flag("--learn-c-hat", tc.adam.learn_c_hat);
  trn->add_option("--batch", tc.batch_triples)->capture_default_str();
  trn->add_option("--lambda", rc.lambda_text)->capture_default_str();
  trn->add_option("--steps", tc.steps)->capture_default_str();
  trn->add_option("--lr", tc.adam.lr)->capture_default_str();
  trn->add_option("--lr-halving", tc.adam.halving_period, "steps per lr halving (0: constant)")
      ->capture_default_str();
  trn->add_option("--eval-every", tc.eval_every)->capture_default_str();
  trn->add_flag("--no-pairwise-grad", rc.no_pairwise_grad);

  auto* evl = app.add_subcommand("eval", "accuracy / F1 and cycle loss of a checkpoint");
  add_common(*evl, rc);
  add_solver(*evl, rc);
  add_regime(*evl, rc);
  evl->add_option("--dataset", rc.dataset)->required();
  evl->add_option("--checkpoint", rc.checkpoint)->required();
  evl->add_option("--csv", rc.csv, "also write the metrics as CSV");

  auto* slv = app.add_subcommand("solve", "solve one matching instance");
  add_common(*slv, rc);
  add_solver(*slv, rc);
  slv->add_flag("--no-filter", rc.no_filter);
  slv->add_option("--instance", rc.instance, "instance JSON");
  slv->add_option("--dataset", rc.dataset);
  slv->add_option("--checkpoint", rc.checkpoint);
  slv->add_option("--pair", rc.pair, "two set indices")->expected(2);
  slv->add_option("-o,--output", rc.output);

  auto* chk = app.add_subcommand("check", "run the verification suite");
  add_common(*chk, rc);
  chk->add_option("--checkpoint", rc.checkpoint, "gradient-check at these parameters");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const data_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(rc);
    if (trn->parsed()) return cmd_train(rc);
    if (evl->parsed()) return cmd_eval(rc);
    if (slv->parsed()) return cmd_solve(rc);
    if (chk->parsed()) return cmd_check(rc);
  } catch (const precondition_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const solver_refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
