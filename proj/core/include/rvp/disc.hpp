#pragma once

#include <complex>

namespace rvp {

using cx = std::complex<double>;

// A point strictly inside the open unit disc. Pole positions, swarm positions
// and velocities all live here; the hyperbolic operators below keep them here.
struct DiscPoint {
  double re = 0.0;
  double im = 0.0;

  cx c() const { return {re, im}; }
  double abs2() const { return re * re + im * im; }
  bool in_disc() const { return abs2() < 1.0; }

  // Validating constructor from a complex value; throws ValidationError if
  // the point is on or outside the unit circle.
  static DiscPoint from(cx z);

  friend bool operator==(const DiscPoint& a, const DiscPoint& b) {
    return a.re == b.re && a.im == b.im;
  }
};

// The pair (a, eps) of a disc automorphism t -> eps * B(t, a), |eps| = 1.
struct BlaschkeParams {
  DiscPoint a;
  cx eps{1.0, 0.0};
};

// B(z, a) = (z - a) / (1 - conj(a) z). Maps the disc onto itself and the unit
// circle onto itself. Throws NearSingularity when z is numerically the
// reflected pole 1/conj(a) (denominator magnitude below 1e-14).
cx blaschke(cx z, DiscPoint a);

// eps * B(t, params.a) — the full automorphism for (a, eps).
cx blaschke_map(cx t, const BlaschkeParams& params);

// Hyperbolic (Poincare) distance rho(z1, z2) = arctanh(|B(z2, z1)|).
double hyp_metric(DiscPoint z1, DiscPoint z2);

// Parameters of the automorphism mapping [0, p] onto the hyperbolic segment
// from w1 to w2: map(0) = w1, map(p) = w2.
struct SegmentParams {
  double p = 0.0;       // |B(w2, w1)|
  BlaschkeParams map;   // eps = B(w2,w1)/p, a = -conj(eps) * w1
};

// Throws DegenerateSegment when the two points coincide within hyperbolic
// distance 1e-14; callers treating w1->w2 as a vector must handle the null
// vector themselves.
SegmentParams hyp_segment_params(DiscPoint w1, DiscPoint w2);

// Scale the hyperbolic vector w1->w2 by lambda: the new endpoint is
// map(tanh(lambda * arctanh(p))). lambda may be negative (extends the segment
// backwards through w1); w1 == w2 returns w1 for any lambda.
DiscPoint hyp_scale(double lambda, DiscPoint w1, DiscPoint w2);

// Mobius addition/subtraction of origin-anchored vectors:
//   add: (w1 + w2) / (1 + w1 * conj(w2))
//   sub: (w1 - w2) / (1 - w1 * conj(w2))
// Closed on the disc; not commutative or associative.
DiscPoint hyp_add(DiscPoint w1, DiscPoint w2);
DiscPoint hyp_sub(DiscPoint w1, DiscPoint w2);

}  // namespace rvp
