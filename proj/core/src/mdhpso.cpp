#include "rvp/mdhpso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rvp/errors.hpp"
#include "rvp/log.hpp"

namespace rvp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr DiscPoint kOrigin{0.0, 0.0};

int clamp_int(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }
}  // namespace

void hpso_position_update(std::vector<DiscPoint>& x, std::vector<DiscPoint>& v,
                          const std::vector<DiscPoint>& local_best,
                          const std::vector<DiscPoint>& global_best, double w,
                          double c1, double c2, Rng& rng) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r1 = rng.u01();
    const double r2 = rng.u01();
    const DiscPoint cognitive = hyp_scale(c1 * r1, kOrigin, hyp_sub(local_best[i], x[i]));
    const DiscPoint social = hyp_scale(c2 * r2, kOrigin, hyp_sub(global_best[i], x[i]));
    const DiscPoint inertia = hyp_scale(w, kOrigin, v[i]);
    v[i] = hyp_add(hyp_add(cognitive, social), inertia);
    x[i] = hyp_add(x[i], v[i]);
  }
}

DimUpdate dimension_update(int d, int vd, int d_tilde, int d_hat, double c1, double c2,
                           int vd_max, int d_min, int d_max, Rng& rng) {
  const double r1 = rng.u01();
  const double r2 = rng.u01();
  long v = std::lround(c1 * r1 * static_cast<double>(d_tilde - d) +
                       c2 * r2 * static_cast<double>(d_hat - d) + static_cast<double>(vd));
  const int v_clamped = clamp_int(static_cast<int>(v), -vd_max, vd_max);
  return {clamp_int(d + v_clamped, d_min, d_max), v_clamped};
}

MdhpsoResult mdhpso_optimize(const Fitness& fitness, const std::vector<SwarmSeed>& seeds,
                             const MdhpsoParams& params) {
  const int S = params.swarm_size;
  const int n_it = params.iterations;
  const int d_min = params.d_min;
  const int d_max = params.d_max;
  if (S < 2 || n_it < 1) {
    throw ValidationError("mdhpso_optimize: need swarm_size >= 2 and iterations >= 1");
  }
  if (d_min < kDimMin || d_max > kDimMax || d_min > d_max) {
    throw ValidationError("mdhpso_optimize: dimension range outside the architecture space");
  }
  const int n_dims = d_max - d_min + 1;
  const auto dim_at = [d_min](int slot) { return d_min + slot; };
  const auto slot_of = [d_min](int d) { return d - d_min; };

  // Per-particle deterministic streams; draw order is fixed so runs with the
  // same seed are bit-for-bit identical.
  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(S));
  for (int k = 0; k < S; ++k) {
    rngs.emplace_back(mix_seed(params.rng_seed, static_cast<std::uint64_t>(k)));
  }

  // State per particle and dimension slot.
  std::vector<std::vector<std::vector<DiscPoint>>> x(S), v(S), y_tilde(S);
  std::vector<std::vector<double>> cur_cost(S), pbest_cost(S);
  std::vector<int> d_k(S), vd_k(S), d_tilde(S);

  for (int k = 0; k < S; ++k) {
    x[k].resize(n_dims);
    v[k].resize(n_dims);
    y_tilde[k].resize(n_dims);
    cur_cost[k].assign(n_dims, kInf);
    pbest_cost[k].assign(n_dims, kInf);
    for (int s = 0; s < n_dims; ++s) {
      const int n = architecture_lookup(dim_at(s)).n;
      auto& xs = x[k][static_cast<std::size_t>(s)];
      auto& vs = v[k][static_cast<std::size_t>(s)];
      xs.resize(static_cast<std::size_t>(n));
      vs.resize(static_cast<std::size_t>(n));
      for (auto& p : xs) p = rngs[k].in_disc(params.init_radius);
      for (auto& p : vs) p = rngs[k].in_disc(params.vel_radius);
    }
    d_k[k] = rngs[k].uniform_int(d_min, d_max);
    vd_k[k] = rngs[k].uniform_int(-params.vd_max, params.vd_max);
  }

  // Warm starts overwrite the randomized state of the first |seeds| particles
  // at their native dimension only.
  if (static_cast<int>(seeds.size()) > S) {
    throw ValidationError("mdhpso_optimize: more seeds than particles");
  }
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const SwarmSeed& seed = seeds[i];
    if (seed.dim < d_min || seed.dim > d_max) {
      throw ValidationError("mdhpso_optimize: seed dimension outside the search range");
    }
    const int n = architecture_lookup(seed.dim).n;
    if (static_cast<int>(seed.poles.size()) != n) {
      throw ValidationError("mdhpso_optimize: seed pole count does not match its dimension");
    }
    const auto s = static_cast<std::size_t>(slot_of(seed.dim));
    x[i][s] = seed.poles;
    d_k[i] = seed.dim;
  }

  for (int k = 0; k < S; ++k) {
    for (int s = 0; s < n_dims; ++s) {
      y_tilde[k][static_cast<std::size_t>(s)] = x[k][static_cast<std::size_t>(s)];
    }
    d_tilde[k] = d_k[k];
  }

  std::uint64_t evaluations = 0;
  const auto evaluate = [&](int k, int slot) {
    ++evaluations;
    double c = fitness(x[k][static_cast<std::size_t>(slot)], dim_at(slot));
    return std::isnan(c) ? kInf : c;
  };

  // Initialization sweep: every particle is scored in every dimension.
  std::vector<std::vector<DiscPoint>> y_hat(n_dims);
  std::vector<double> gbest_cost(n_dims, kInf);
  std::vector<int> gbest_idx(n_dims, 0);
  for (int s = 0; s < n_dims; ++s) {
    for (int k = 0; k < S; ++k) {
      const double c = evaluate(k, s);
      cur_cost[k][static_cast<std::size_t>(s)] = c;
      pbest_cost[k][static_cast<std::size_t>(s)] = c;
      if (c < gbest_cost[static_cast<std::size_t>(s)]) {
        gbest_cost[static_cast<std::size_t>(s)] = c;
        gbest_idx[static_cast<std::size_t>(s)] = k;
      }
    }
    y_hat[static_cast<std::size_t>(s)] =
        x[gbest_idx[static_cast<std::size_t>(s)]][static_cast<std::size_t>(s)];
  }
  int d_hat = d_min;
  for (int s = 1; s < n_dims; ++s) {
    if (gbest_cost[static_cast<std::size_t>(s)] <
        gbest_cost[static_cast<std::size_t>(slot_of(d_hat))]) {
      d_hat = dim_at(s);
    }
  }

  for (int iter = 1; iter <= n_it; ++iter) {
    const double w =
        params.wN - static_cast<double>(iter) * (params.wN - params.w0) /
                        static_cast<double>(n_it);

    // Evaluation pass: one fitness call per particle at its current dimension.
    // All costs are refreshed before any best-structure update, so the sweep
    // below compares last-synchronized values regardless of particle order.
    for (int k = 0; k < S; ++k) {
      cur_cost[k][static_cast<std::size_t>(slot_of(d_k[k]))] = evaluate(k, slot_of(d_k[k]));
    }

    for (int k = 0; k < S; ++k) {
      const auto s = static_cast<std::size_t>(slot_of(d_k[k]));
      const double c = cur_cost[k][s];
      if (c < pbest_cost[k][s]) {
        y_tilde[k][s] = x[k][s];
        pbest_cost[k][s] = c;
        if (c < pbest_cost[k][static_cast<std::size_t>(slot_of(d_tilde[k]))]) {
          d_tilde[k] = d_k[k];
        }
      }
      double rho_d = gbest_cost[s];
      for (int i = 0; i < S; ++i) {
        if (i != k) rho_d = std::min(rho_d, cur_cost[i][s]);
      }
      if (c < rho_d) {
        gbest_idx[s] = k;
        y_hat[s] = x[k][s];
        gbest_cost[s] = c;
        if (c < gbest_cost[static_cast<std::size_t>(slot_of(d_hat))]) {
          d_hat = d_k[k];
        }
      }
    }

    for (int k = 0; k < S; ++k) {
      const auto s = static_cast<std::size_t>(slot_of(d_k[k]));
      hpso_position_update(x[k][s], v[k][s], y_tilde[k][s], y_hat[s], w, params.c1,
                           params.c2, rngs[k]);
      const DimUpdate du = dimension_update(d_k[k], vd_k[k], d_tilde[k], d_hat, params.c1,
                                            params.c2, params.vd_max, d_min, d_max, rngs[k]);
      d_k[k] = du.d;
      vd_k[k] = du.vd;
    }
  }

  const auto s_hat = static_cast<std::size_t>(slot_of(d_hat));
  if (!std::isfinite(gbest_cost[s_hat])) {
    throw AllEvaluationsFailed("mdhpso_optimize: every fitness evaluation failed");
  }

  MdhpsoResult result;
  result.dim = d_hat;
  result.poles = y_hat[s_hat];
  result.cost = gbest_cost[s_hat];
  result.evaluations = evaluations;
  log_debug("mdhpso: best dim %d cost %.6f after %llu evaluations", result.dim, result.cost,
            static_cast<unsigned long long>(result.evaluations));
  return result;
}

}  // namespace rvp
