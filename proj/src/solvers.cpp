#include "clgm/solvers.hpp"

#include <string>

namespace clgm {

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::lap: return "lap";
    case SolverKind::qap_exact: return "qap_exact";
    case SolverKind::qap_local: return "qap_local";
  }
  return "?";
}

SolverKind solver_kind_from_string(std::string_view name) {
  if (name == "lap") return SolverKind::lap;
  if (name == "qap_exact") return SolverKind::qap_exact;
  if (name == "qap_local") return SolverKind::qap_local;
  throw precondition_error("unknown solver kind '" + std::string(name) + "'");
}

void validate(const SolverConfig& cfg) {
  if (cfg.node_limit < 1) throw precondition_error("solver: node_limit must be >= 1");
  if (!(cfg.tolerance > 0.0)) throw precondition_error("solver: tolerance must be > 0");
  if (cfg.local_search.max_passes < 1) throw precondition_error("solver: max_passes must be >= 1");
  if (cfg.local_search.restarts < 0) throw precondition_error("solver: restarts must be >= 0");
}

Matching solve(const QapInstance& inst, const SolverConfig& cfg,
               const std::optional<Matching>& warm_start) {
  validate(cfg);
  validate(inst);
  if (inst.complete && inst.n1 != inst.n2)
    throw infeasible_instance("complete matching requested for " + std::to_string(inst.n1) + "x" +
                              std::to_string(inst.n2) + " instance");
  switch (cfg.kind) {
    case SolverKind::lap: return solve_lap_hungarian(inst.unary, inst.complete, cfg.tolerance);
    case SolverKind::qap_exact: return solve_qap_exact(inst, cfg.node_limit, cfg.tolerance);
    case SolverKind::qap_local: return solve_qap_local(inst, cfg, warm_start);
  }
  throw std::logic_error("unreachable solver kind");
}

}  // namespace clgm
