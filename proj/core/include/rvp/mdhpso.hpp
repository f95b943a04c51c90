#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rvp/architecture.hpp"
#include "rvp/disc.hpp"
#include "rvp/rng.hpp"

namespace rvp {

// Cost of a candidate: distinct poles (length n(dim)) at a virtual dimension.
// Must be deterministic; return +infinity to signal a failed evaluation.
using Fitness = std::function<double(const std::vector<DiscPoint>&, int dim)>;

// A warm-start candidate injected into the initial swarm at its native
// dimension (one particle per seed, in order).
struct SwarmSeed {
  int dim = 0;
  std::vector<DiscPoint> poles;
};

struct MdhpsoParams {
  int swarm_size = 30;
  int iterations = 20;
  int d_min = kDimMin;
  int d_max = kDimMax;
  std::uint64_t rng_seed = 0;

  double c1 = 1.5;          // cognitive learning factor
  double c2 = 2.0;          // social learning factor
  double w0 = 0.2;          // final inertia
  double wN = 0.8;          // initial inertia
  int vd_max = 8;           // dimension-velocity clamp
  double init_radius = 0.9; // position initialization disc
  double vel_radius = 0.1;  // velocity initialization disc
};

struct MdhpsoResult {
  int dim = 0;
  std::vector<DiscPoint> poles;
  double cost = 0.0;
  std::uint64_t evaluations = 0;  // fitness calls: S * |I| + S * iterations
};

// One velocity/position update of a disc-constrained particle, applied
// independently per complex coordinate with fresh r1, r2 in (0,1) each:
//   v <- (c1 r1 (.) (ybest (-) x)) (+) (c2 r2 (.) (gbest (-) x)) (+) (w (.) v)
//   x <- x (+) v
// where (.) scales the origin-anchored vector, (+)/(-) are the Mobius
// operations; grouping is left to right. All coordinates stay in the disc.
void hpso_position_update(std::vector<DiscPoint>& x, std::vector<DiscPoint>& v,
                          const std::vector<DiscPoint>& local_best,
                          const std::vector<DiscPoint>& global_best, double w,
                          double c1, double c2, Rng& rng);

// One dimension/velocity update:
//   vd' = round(c1 r1 (d_tilde - d) + c2 r2 (d_hat - d) + vd), clamped to
//   [-vd_max, vd_max]; d' = d + vd' clamped to [d_min, d_max].
struct DimUpdate {
  int d = 0;
  int vd = 0;
};
DimUpdate dimension_update(int d, int vd, int d_tilde, int d_hat, double c1, double c2,
                           int vd_max, int d_min, int d_max, Rng& rng);

// Full multi-dimensional swarm search over the architecture dimensions
// [d_min, d_max]. Deterministic for fixed seed/params/fitness. Throws
// AllEvaluationsFailed when every fitness call returned +infinity, and
// ValidationError on malformed parameters or seeds.
MdhpsoResult mdhpso_optimize(const Fitness& fitness, const std::vector<SwarmSeed>& seeds,
                             const MdhpsoParams& params);

}  // namespace rvp
