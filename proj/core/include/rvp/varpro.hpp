#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rvp/architecture.hpp"
#include "rvp/mt.hpp"

namespace rvp {

// Least-squares projection of a signal onto the column space of a basis matrix.
struct ProjectionResult {
  Eigen::VectorXcd coefficients;   // c minimizing ||signal - basis * c||_2
  double residual_l2 = 0.0;        // ||signal - reconstruction||_2
  Eigen::VectorXcd reconstruction; // basis * c
};

// Column-pivoted QR solve. Throws RankDeficient when the smallest R pivot
// falls below 1e-10 times the largest (degenerate pole cluster), and
// ValidationError on a row-count mismatch.
ProjectionResult project(const MTBasisMatrix& basis, const Eigen::VectorXcd& signal);

// The variable-projection functional r2(a) = ||f - Theta(a) Theta(a)^+ f||_2,
// with Theta built from `poles` expanded by config's multiplicities on a
// uniform grid of signal-length samples.
double vp_residual(const std::vector<DiscPoint>& poles, const PoleConfiguration& config,
                   const Eigen::VectorXcd& signal);

// Dimension-penalized cost: total = alpha * PRD + (1 - alpha) * RCR, with
// PRD = 100 * ||f - P f||_2 (unit-norm input contract: no denominator) and
// RCR = 100 * 2 * (n + N) / M taken from the architecture row.
struct CostBreakdown {
  double prd = 0.0;    // percent
  double rcr = 0.0;    // percent
  double total = 0.0;
  double alpha = 0.0;
  int dim_index = 0;
};

// When `quantize` is set, the distinct poles are snapped to the 4-bit polar
// grid and the coefficients (in the orthonormal-column scale sqrt(M) * c) to
// the 7-bit grid before the residual is computed, so the optimizer scores the
// quality that will actually be stored.
CostBreakdown generalized_cost(const std::vector<DiscPoint>& poles, int dim_index,
                               const Eigen::VectorXcd& signal, double alpha,
                               bool quantize);

}  // namespace rvp
