#pragma once

#include "clgm/instances.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace clgm {

enum class SolverKind { lap, qap_exact, qap_local };

std::string_view to_string(SolverKind kind);
SolverKind solver_kind_from_string(std::string_view name);

struct LocalSearchConfig {
  int max_passes = 100;
  int restarts = 4;
  std::uint64_t rng_seed = 0;
};

struct SolverConfig {
  SolverKind kind = SolverKind::qap_local;
  int node_limit = 8;
  LocalSearchConfig local_search;
  double tolerance = 1e-9;
};

void validate(const SolverConfig& cfg);

/// The exact solver refuses instances larger than its node limit.
class solver_refusal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A complete instance with n1 != n2 has no feasible matching.
class infeasible_instance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// x(c) = argmin <c, x> over the matchings allowed by the instance.
///
/// `warm_start`, when given and the solver is local search, replaces the
/// LAP seed and disables restarts: the result is the descent from that
/// matching. Other solver kinds ignore it.
Matching solve(const QapInstance& inst, const SolverConfig& cfg,
               const std::optional<Matching>& warm_start = std::nullopt);

/// Optimal linear assignment. In incomplete mode a row may stay unassigned
/// at zero cost. Among optimal assignments (within `tolerance`) the
/// lexicographically smallest pair set is returned.
Matching solve_lap_hungarian(const MatrixX& unary, bool complete, double tolerance = 1e-9);

/// Optimal value of the linear assignment problem only.
double lap_optimum(const MatrixX& unary, bool complete);

/// Depth-first branch and bound over row decisions. Globally optimal;
/// ties broken towards the lexicographically smallest pair set.
Matching solve_qap_exact(const QapInstance& inst, int node_limit = 8, double tolerance = 1e-9);

/// Objective trajectory of each descent of a local search call: element 0
/// is the starting objective, each following element the objective after
/// one accepted move.
struct LocalSearchTrace {
  std::vector<std::vector<double>> runs;
};

/// Move-based local search seeded by the LAP optimum of the unary costs.
Matching solve_qap_local(const QapInstance& inst, const SolverConfig& cfg,
                         const std::optional<Matching>& warm_start = std::nullopt,
                         LocalSearchTrace* trace = nullptr);

}  // namespace clgm
