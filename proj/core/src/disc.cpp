#include "rvp/disc.hpp"

#include <cmath>

#include "rvp/errors.hpp"
#include "rvp/log.hpp"

namespace rvp {

DiscPoint DiscPoint::from(cx z) {
  DiscPoint p{z.real(), z.imag()};
  if (!p.in_disc()) {
    throw ValidationError("point is not strictly inside the unit disc: |z| = " +
                          std::to_string(std::abs(z)));
  }
  return p;
}

// Floating-point closure guard: the Mobius formulas are closed on the open
// disc, but inputs within ~1e-16 of the boundary can round onto it. Pull such
// results back inside rather than letting arctanh/|B| blow up downstream.
static DiscPoint clamp_into_disc(cx w) {
  double m2 = std::norm(w);
  if (m2 >= 1.0) {
    double m = std::sqrt(m2);
    log_debug("disc op result |w| = %.17g clamped into the open disc", m);
    w *= (1.0 - 1e-15) / m;
  }
  return {w.real(), w.imag()};
}

cx blaschke(cx z, DiscPoint a) {
  cx av = a.c();
  cx den = 1.0 - std::conj(av) * z;
  if (std::abs(den) <= 1e-14) {
    throw NearSingularity("blaschke: z is numerically the reflected pole 1/conj(a)");
  }
  return (z - av) / den;
}

cx blaschke_map(cx t, const BlaschkeParams& params) {
  return params.eps * blaschke(t, params.a);
}

double hyp_metric(DiscPoint z1, DiscPoint z2) {
  return std::atanh(std::abs(blaschke(z2.c(), z1)));
}

SegmentParams hyp_segment_params(DiscPoint w1, DiscPoint w2) {
  cx b = blaschke(w2.c(), w1);
  double p = std::abs(b);
  if (p < 1e-14) {
    throw DegenerateSegment("hyp_segment_params: w1 and w2 coincide");
  }
  SegmentParams s;
  s.p = p;
  s.map.eps = b / p;
  cx a = -std::conj(s.map.eps) * w1.c();  // |a| = |w1| < 1
  s.map.a = DiscPoint{a.real(), a.imag()};
  return s;
}

DiscPoint hyp_scale(double lambda, DiscPoint w1, DiscPoint w2) {
  if (std::abs(blaschke(w2.c(), w1)) < 1e-14) {
    return w1;  // null vector scales to itself
  }
  SegmentParams s = hyp_segment_params(w1, w2);
  double s_lambda = std::tanh(lambda * std::atanh(s.p));
  return clamp_into_disc(blaschke_map(cx{s_lambda, 0.0}, s.map));
}

DiscPoint hyp_add(DiscPoint w1, DiscPoint w2) {
  cx a = w1.c(), b = w2.c();
  return clamp_into_disc((a + b) / (1.0 + a * std::conj(b)));
}

DiscPoint hyp_sub(DiscPoint w1, DiscPoint w2) {
  cx a = w1.c(), b = w2.c();
  return clamp_into_disc((a - b) / (1.0 - a * std::conj(b)));
}

}  // namespace rvp
