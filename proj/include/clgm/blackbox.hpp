#pragma once

#include "clgm/instances.hpp"

namespace clgm {

/// dL/dx for the unary assignment variables. dL/dy is identically zero for
/// the cycle loss, so there is no pairwise part.
struct LossGrad {
  MatrixX unary;
};

/// dL/dc for every cost of an instance.
struct CostGradient {
  MatrixX unary;
  PairwiseMap pairwise;  // same keys as the instance
};

/// c^lambda = c + lambda * dL/dx on the unary costs; pairwise costs are kept.
/// Entries with a zero loss gradient are copied untouched.
QapInstance perturb_costs(const QapInstance& inst, const LossGrad& g, double lambda);

/// (x(c^lambda) - x(c)) / lambda over the lifted vector. With
/// `include_pairwise` false the pairwise part is left at zero.
CostGradient bb_gradient(const QapInstance& inst, const LiftedSolution& x,
                         const LiftedSolution& x_perturbed, double lambda,
                         bool include_pairwise = true);

}  // namespace clgm
