#include "clgm/blackbox.hpp"

#include <cmath>

namespace clgm {

QapInstance perturb_costs(const QapInstance& inst, const LossGrad& g, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw precondition_error("perturb_costs: lambda must be positive and finite");
  if (g.unary.rows() != inst.n1 || g.unary.cols() != inst.n2)
    throw precondition_error("perturb_costs: loss gradient shape does not match instance");
  QapInstance out = inst;
  for (Index i = 0; i < inst.n1; ++i)
    for (Index s = 0; s < inst.n2; ++s)
      if (g.unary(i, s) != 0.0) out.unary(i, s) += lambda * g.unary(i, s);
  return out;
}

CostGradient bb_gradient(const QapInstance& inst, const LiftedSolution& x,
                         const LiftedSolution& x_perturbed, double lambda, bool include_pairwise) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw precondition_error("bb_gradient: lambda must be positive and finite");
  for (const auto* sol : {&x, &x_perturbed})
    if (sol->x.n1() != inst.n1 || sol->x.n2() != inst.n2)
      throw precondition_error("bb_gradient: solution shape does not match instance");

  CostGradient g;
  g.unary = (x_perturbed.x.dense() - x.x.dense()) / lambda;
  for (const auto& [k, c] : inst.pairwise) g.pairwise.emplace_hint(g.pairwise.end(), k, 0.0);
  if (!include_pairwise) return g;
  for (const auto& k : x_perturbed.y) g.pairwise.at(k) += 1.0 / lambda;
  for (const auto& k : x.y) g.pairwise.at(k) -= 1.0 / lambda;
  return g;
}

}  // namespace clgm
