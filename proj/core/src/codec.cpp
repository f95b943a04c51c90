#include "rvp/codec.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <unordered_map>

#include "rvp/bitio.hpp"
#include "rvp/errors.hpp"
#include "rvp/log.hpp"
#include "rvp/mt.hpp"
#include "rvp/varpro.hpp"

namespace rvp {
namespace {

constexpr char kMagic[4] = {'R', 'V', 'P', '1'};
constexpr std::uint64_t kTemplateSeedTag = std::uint64_t{1} << 32;

double l2_norm(const std::vector<double>& v) {
  double sumsq = 0.0;
  for (double x : v) sumsq += x * x;
  return std::sqrt(sumsq);
}

// The one trend evaluation shared by correction and reconstruction; both
// sides must subtract/add bit-identical values for the endpoint guarantees.
double trend_at(double f0, double f_last, std::size_t i, std::size_t m) {
  // The endpoints are returned exactly: f0 + (f_last - f0) can land an ulp
  // off f_last, and decoded beats must hit their stored endpoints dead on.
  if (i + 1 == m) return f_last;
  return f0 + (f_last - f0) * (static_cast<double>(i) /
                               static_cast<double>(m - 1));
}

// Subtract the line through the first/last entries and pin the endpoints to
// exactly zero (the subtraction alone leaves ~1 ulp there).
void remove_endpoint_trend(std::vector<double>& v) {
  const std::size_t m = v.size();
  if (m < 2) return;
  const double a = v.front();
  const double b = v.back();
  for (std::size_t i = 0; i < m; ++i) v[i] -= trend_at(a, b, i, m);
  v.front() = 0.0;
  v.back() = 0.0;
}

}  // namespace

std::vector<BeatSegment> segment(const Record& record,
                                 const BeatAnnotations& annotations) {
  const std::size_t len = record.samples.size();
  std::vector<std::size_t> q;
  q.reserve(annotations.qrs_indices.size());
  for (std::size_t idx : annotations.qrs_indices) {
    if (idx >= len) {
      log_warn("annotation %zu beyond record end %zu; ignored", idx,
               len);
      continue;
    }
    q.push_back(idx);
  }
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  if (q.empty()) throw NoBeats("no usable annotations");

  std::vector<BeatSegment> beats;
  beats.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const std::size_t start = q[i] > kFiducialOffset ? q[i] - kFiducialOffset : 0;
    const std::size_t stop =
        i + 1 < q.size()
            ? (q[i + 1] > kFiducialOffset ? q[i + 1] - kFiducialOffset : 0)
            : len;
    if (stop <= start || stop - start < kMinBeatLength) {
      log_warn("dropping beat %zu: span [%zu, %zu) is shorter than %zu samples",
               i, start, stop, kMinBeatLength);
      continue;
    }
    if (stop - start > 0xFFFF)
      throw ValidationError("beat length exceeds the 16-bit length field");
    BeatSegment seg;
    seg.start = start;
    seg.samples.assign(record.samples.begin() + static_cast<std::ptrdiff_t>(start),
                       record.samples.begin() + static_cast<std::ptrdiff_t>(stop));
    linear_correct(seg.samples, &seg.f0, &seg.f_last);
    seg.norm = l2_norm(seg.samples);
    seg.flat = seg.norm < kFlatNormThreshold;
    beats.push_back(std::move(seg));
  }
  if (beats.empty()) throw NoBeats("every beat span was shorter than the minimum");
  return beats;
}

void linear_correct(std::vector<double>& samples, double* f0, double* f_last) {
  if (samples.size() < 2)
    throw ValidationError("linear correction needs at least 2 samples");
  *f0 = samples.front();
  *f_last = samples.back();
  remove_endpoint_trend(samples);
}

bool normalize(std::vector<double>& corrected, double* norm) {
  const double n = l2_norm(corrected);
  *norm = n;
  if (n < kFlatNormThreshold) return false;
  for (double& v : corrected) v /= n;
  return true;
}

Eigen::VectorXcd analytic_extend(const std::vector<double>& signal) {
  const std::size_t m = signal.size();
  if (m == 0) throw ValidationError("analytic extension of an empty signal");

  // Twiddle table e^{-2 pi i k / m}; index products are reduced mod m.
  std::vector<cx> tw(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double phi = -2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(m);
    tw[k] = {std::cos(phi), std::sin(phi)};
  }

  std::vector<cx> spectrum(m);
  for (std::size_t k = 0; k < m; ++k) {
    cx acc = 0.0;
    for (std::size_t n = 0; n < m; ++n) acc += signal[n] * tw[(k * n) % m];
    spectrum[k] = acc;
  }

  // One-sided spectrum: DC (and Nyquist for even lengths) kept, positive
  // frequencies doubled, negative frequencies dropped. Bins above `half`
  // are the negative frequencies, so the inverse sum simply omits them.
  const std::size_t half = m / 2;
  for (std::size_t k = 1; k <= half; ++k) {
    if (m % 2 == 0 && k == half) break;
    spectrum[k] *= 2.0;
  }

  Eigen::VectorXcd out(static_cast<Eigen::Index>(m));
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t n = 0; n < m; ++n) {
    cx acc = 0.0;
    for (std::size_t k = 0; k <= half; ++k)
      acc += spectrum[k] * std::conj(tw[(k * n) % m]);
    out[static_cast<Eigen::Index>(n)] = acc * inv_m;
  }
  return out;
}

std::uint8_t quantize_scalar(double value, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const long code = std::lround(255.0 * (value - lo) / (hi - lo));
  return static_cast<std::uint8_t>(std::clamp(code, 0L, 255L));
}

double dequantize_scalar(std::uint8_t code, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return lo + static_cast<double>(code) * (hi - lo) / 255.0;
}

std::size_t beat_payload_bits(const CompressedBeat& beat) {
  std::size_t bits = kDimBits + kLengthBits + 3 * kScalarBits;
  if (beat.dim_index != 0) {
    const PoleConfiguration& row = architecture_lookup(beat.dim_index);
    bits += static_cast<std::size_t>(row.n) * (2 * kPoleBits) +
            static_cast<std::size_t>(row.total_N) * (2 * kCoeffBits);
  }
  return bits;
}

std::size_t compressed_bits(const CompressedRecord& record) {
  std::size_t bits = 32;       // magic
  bits += 30 * 3 * 4;          // architecture table
  bits += 16;                  // beat count
  bits += 2 * 32;              // mean, std
  bits += 3 * 32;              // amp_min, amp_max, norm_max
  bits += 32;                  // start offset
  bits += 1;                   // mode flag
  if (record.template_beat) bits += beat_payload_bits(*record.template_beat);
  for (const CompressedBeat& b : record.beats) bits += beat_payload_bits(b);
  return bits;
}

namespace {

void put_beat(BitWriter& w, const CompressedBeat& b) {
  if (b.dim_index < 0 || b.dim_index > kDimMax)
    throw ValidationError("dimension index out of range");
  w.put(static_cast<std::uint64_t>(b.dim_index), kDimBits);
  w.put(b.length, kLengthBits);
  w.put(b.f0_code, kScalarBits);
  w.put(b.flast_code, kScalarBits);
  w.put(b.norm_code, kScalarBits);
  if (b.dim_index == 0) {
    if (!b.pole_codes.empty() || !b.coeff_codes.empty())
      throw ValidationError("trend-only beat carries parameter codes");
    return;
  }
  const PoleConfiguration& row = architecture_lookup(b.dim_index);
  if (b.pole_codes.size() != static_cast<std::size_t>(row.n) ||
      b.coeff_codes.size() != static_cast<std::size_t>(row.total_N))
    throw ValidationError("code counts disagree with the architecture row");
  for (const DiscCodes& c : b.pole_codes) {
    if (c.angle >= 16 || c.magnitude >= 16)
      throw ValidationError("pole code exceeds 4 bits");
    w.put(c.angle, kPoleBits);
    w.put(c.magnitude, kPoleBits);
  }
  for (const DiscCodes& c : b.coeff_codes) {
    if (c.angle >= 128 || c.magnitude >= 128)
      throw ValidationError("coefficient code exceeds 7 bits");
    w.put(c.angle, kCoeffBits);
    w.put(c.magnitude, kCoeffBits);
  }
}

CompressedBeat get_beat(BitReader& rd) {
  CompressedBeat b;
  b.dim_index = static_cast<int>(rd.get(kDimBits));
  if (b.dim_index > kDimMax)
    throw ValidationError("dimension index out of range");
  b.length = static_cast<std::uint16_t>(rd.get(kLengthBits));
  if (b.length < 2) throw ValidationError("beat length below 2");
  b.f0_code = static_cast<std::uint8_t>(rd.get(kScalarBits));
  b.flast_code = static_cast<std::uint8_t>(rd.get(kScalarBits));
  b.norm_code = static_cast<std::uint8_t>(rd.get(kScalarBits));
  if (b.dim_index == 0) return b;
  const PoleConfiguration& row = architecture_lookup(b.dim_index);
  b.pole_codes.resize(static_cast<std::size_t>(row.n));
  for (DiscCodes& c : b.pole_codes) {
    c.angle = static_cast<std::uint32_t>(rd.get(kPoleBits));
    c.magnitude = static_cast<std::uint32_t>(rd.get(kPoleBits));
  }
  b.coeff_codes.resize(static_cast<std::size_t>(row.total_N));
  for (DiscCodes& c : b.coeff_codes) {
    c.angle = static_cast<std::uint32_t>(rd.get(kCoeffBits));
    c.magnitude = static_cast<std::uint32_t>(rd.get(kCoeffBits));
  }
  return b;
}

}  // namespace

std::vector<std::uint8_t> serialize(const CompressedRecord& record) {
  if (record.beats.size() != record.beat_count)
    throw ValidationError("beat_count disagrees with the payload list");
  if ((record.mode == CodecMode::Aligned) != record.template_beat.has_value())
    throw ValidationError("template presence disagrees with the mode flag");

  BitWriter w;
  for (char c : kMagic) w.put(static_cast<std::uint8_t>(c), 8);
  for (int d = kDimMin; d <= kDimMax; ++d) {
    const PoleConfiguration& row = architecture_lookup(d);
    for (int slot = 0; slot < 3; ++slot)
      w.put(static_cast<std::uint64_t>(row.multiplicities[static_cast<std::size_t>(slot)]), 4);
  }
  w.put(record.beat_count, 16);
  w.put_f32(record.mean);
  w.put_f32(record.stddev);
  w.put_f32(record.amp_min);
  w.put_f32(record.amp_max);
  w.put_f32(record.norm_max);
  w.put(record.start_offset, 32);
  w.put(record.mode == CodecMode::Aligned ? 1 : 0, 1);
  if (record.template_beat) put_beat(w, *record.template_beat);
  for (const CompressedBeat& b : record.beats) put_beat(w, b);

  if (w.bit_count() != compressed_bits(record))
    throw ValidationError("serializer bit count disagrees with the accounting");
  return w.take();
}

CompressedRecord parse(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw BadMagic("not a compressed record (bad magic)");
  BitReader rd(bytes);
  rd.get(32);  // magic, checked above

  for (int d = kDimMin; d <= kDimMax; ++d) {
    const PoleConfiguration& row = architecture_lookup(d);
    for (int slot = 0; slot < 3; ++slot) {
      const auto stored = rd.get(4);
      if (stored != static_cast<std::uint64_t>(
                        row.multiplicities[static_cast<std::size_t>(slot)]))
        throw InconsistentArchitectureTable(
            "stored architecture row " + std::to_string(d) +
            " disagrees with this build");
    }
  }

  CompressedRecord r;
  r.beat_count = static_cast<std::uint16_t>(rd.get(16));
  r.mean = rd.get_f32();
  r.stddev = rd.get_f32();
  r.amp_min = rd.get_f32();
  r.amp_max = rd.get_f32();
  r.norm_max = rd.get_f32();
  if (!std::isfinite(r.mean) || !std::isfinite(r.stddev) ||
      !std::isfinite(r.amp_min) || !std::isfinite(r.amp_max) ||
      !std::isfinite(r.norm_max))
    throw ValidationError("non-finite header statistics");
  if (r.amp_min > r.amp_max || r.norm_max < 0.0f)
    throw ValidationError("invalid quantization ranges");
  r.start_offset = static_cast<std::uint32_t>(rd.get(32));
  r.mode = rd.get(1) != 0 ? CodecMode::Aligned : CodecMode::Basic;
  if (r.mode == CodecMode::Aligned) r.template_beat = get_beat(rd);
  r.beats.reserve(r.beat_count);
  for (std::uint16_t i = 0; i < r.beat_count; ++i) r.beats.push_back(get_beat(rd));
  if (rd.bits_left() >= 8)
    throw ValidationError("trailing data after the last beat");
  return r;
}

std::vector<double> template_crop(const std::vector<double>& template_full,
                                  std::size_t length) {
  std::vector<double> t(length, 0.0);
  const std::size_t n = std::min(length, template_full.size());
  std::copy(template_full.begin(),
            template_full.begin() + static_cast<std::ptrdiff_t>(n), t.begin());
  remove_endpoint_trend(t);
  return t;
}

// The trend-free, norm-restored shape a beat's codes decode to; the all-zero
// vector for a trend-only payload. Shared by the decoder and by the encoder's
// keep-or-drop check so both sides see the identical reconstruction.
static std::vector<double> decoded_shape(const CompressedBeat& beat,
                                         const QuantRanges& ranges) {
  const std::size_t m = beat.length;
  std::vector<double> out(m, 0.0);
  if (beat.dim_index == 0) return out;

  const PoleConfiguration& row = architecture_lookup(beat.dim_index);
  if (beat.pole_codes.size() != static_cast<std::size_t>(row.n) ||
      beat.coeff_codes.size() != static_cast<std::size_t>(row.total_N))
    throw ValidationError("code counts disagree with the architecture row");

  std::vector<DiscPoint> poles(beat.pole_codes.size());
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const cx a = dequantize_disc(beat.pole_codes[i], kPoleBits, kPoleBits);
    poles[i] = {a.real(), a.imag()};
  }
  const PoleVector pv = PoleVector::expanded(poles, row.mults());
  const MTBasisMatrix basis = build_mt_matrix(pv, m);

  Eigen::VectorXcd coeffs(static_cast<Eigen::Index>(beat.coeff_codes.size()));
  for (std::size_t j = 0; j < beat.coeff_codes.size(); ++j)
    coeffs[static_cast<Eigen::Index>(j)] =
        dequantize_disc(beat.coeff_codes[j], kCoeffBits, kCoeffBits);

  const Eigen::VectorXcd model = basis.values * coeffs;
  for (std::size_t i = 0; i < m; ++i)
    out[i] = model[static_cast<Eigen::Index>(i)].real();

  // The stored norm applies to the trend-free shape; removing the model's
  // own endpoint trend also restores exact endpoint placement.
  remove_endpoint_trend(out);
  const double shape_norm = l2_norm(out);
  const double norm = dequantize_scalar(beat.norm_code, 0.0, ranges.norm_max);
  if (shape_norm > 0.0) {
    const double s = norm / shape_norm;
    for (double& v : out) v *= s;
  }
  return out;
}

std::vector<double> reconstruct_beat(const CompressedBeat& beat,
                                     const QuantRanges& ranges,
                                     const std::vector<double>* template_full) {
  const std::size_t m = beat.length;
  if (m < 2) throw ValidationError("beat length below 2");
  const double f0 = dequantize_scalar(beat.f0_code, ranges.amp_min, ranges.amp_max);
  const double f_last =
      dequantize_scalar(beat.flast_code, ranges.amp_min, ranges.amp_max);

  std::vector<double> out = decoded_shape(beat, ranges);

  if (template_full) {
    const std::vector<double> t = template_crop(*template_full, m);
    for (std::size_t i = 0; i < m; ++i) out[i] += t[i];
  }
  for (std::size_t i = 0; i < m; ++i) out[i] += trend_at(f0, f_last, i, m);
  return out;
}

BeatEncodeOutcome encode_beat(const BeatSegment& seg,
                              const BeatEncodeParams& params,
                              const QuantRanges& ranges,
                              const std::vector<SwarmSeed>& seeds) {
  if (!(params.alpha > 0.0 && params.alpha <= 1.0))
    throw ValidationError("alpha must lie in (0, 1]");
  const std::size_t m = seg.samples.size();
  if (m < 2) throw ValidationError("beat too short to encode");
  if (m > 0xFFFF)
    throw ValidationError("beat length exceeds the 16-bit length field");

  BeatEncodeOutcome out;
  CompressedBeat& cb = out.beat;
  cb.length = static_cast<std::uint16_t>(m);
  cb.f0_code = quantize_scalar(seg.f0, ranges.amp_min, ranges.amp_max);
  cb.flast_code = quantize_scalar(seg.f_last, ranges.amp_min, ranges.amp_max);

  std::vector<double> unit = seg.samples;
  double norm = 0.0;
  if (!normalize(unit, &norm)) {
    cb.dim_index = 0;  // trend-only payload
    cb.norm_code = 0;
    return out;
  }
  cb.norm_code = quantize_scalar(norm, 0.0, ranges.norm_max);

  Eigen::VectorXcd analytic = analytic_extend(unit);
  analytic /= analytic.norm();

  // The cost snaps poles to the storage grid, so distinct positions that
  // quantize alike share one evaluation.
  std::unordered_map<std::uint64_t, double> memo;
  const double alpha = params.alpha;
  const Fitness fitness = [&](const std::vector<DiscPoint>& poles, int dim) {
    const PoleConfiguration& row = architecture_lookup(dim);
    std::uint64_t key = static_cast<std::uint64_t>(dim);
    for (int i = 0; i < row.n; ++i) {
      const DiscCodes c =
          quantize_disc(poles[static_cast<std::size_t>(i)].c(), kPoleBits, kPoleBits);
      key = (key << 8) | (static_cast<std::uint64_t>(c.angle) << 4) | c.magnitude;
    }
    if (const auto it = memo.find(key); it != memo.end()) return it->second;
    double total;
    try {
      total = generalized_cost(poles, dim, analytic, alpha, true).total;
    } catch (const RankDeficient&) {
      total = std::numeric_limits<double>::infinity();
    }
    memo.emplace(key, total);
    return total;
  };

  MdhpsoParams mp;
  mp.swarm_size = params.swarm_size;
  mp.iterations = params.iterations;
  mp.d_min = params.d_min;
  mp.d_max = params.d_max;
  mp.rng_seed = params.rng_seed;
  const MdhpsoResult res = mdhpso_optimize(fitness, seeds, mp);
  out.evaluations = res.evaluations;
  out.optimum = {res.dim, res.poles};

  cb.dim_index = res.dim;
  const PoleConfiguration& row = architecture_lookup(res.dim);
  cb.pole_codes.resize(static_cast<std::size_t>(row.n));
  std::vector<DiscPoint> poles_q(static_cast<std::size_t>(row.n));
  for (std::size_t i = 0; i < poles_q.size(); ++i) {
    cb.pole_codes[i] = quantize_disc(res.poles[i].c(), kPoleBits, kPoleBits);
    const cx a = dequantize_disc(cb.pole_codes[i], kPoleBits, kPoleBits);
    poles_q[i] = {a.real(), a.imag()};
  }

  // Re-fit the coefficients against the quantized basis, then quantize them
  // in the orthonormal-column scale where the unit bound holds.
  const PoleVector pv = PoleVector::expanded(poles_q, row.mults());
  const MTBasisMatrix basis = build_mt_matrix(pv, m);
  const ProjectionResult proj = project(basis, analytic);
  const double scale = std::sqrt(static_cast<double>(m));
  cb.coeff_codes.resize(static_cast<std::size_t>(row.total_N));
  for (std::size_t j = 0; j < cb.coeff_codes.size(); ++j) {
    cx chat = proj.coefficients[static_cast<Eigen::Index>(j)] * scale;
    const double mag = std::abs(chat);
    if (mag > 1.0 + 1e-9) {
      log_warn("coefficient %zu magnitude %.9f exceeds the unit bound; clamping",
               j, mag);
      chat /= mag;
    }
    cb.coeff_codes[j] = quantize_disc(chat, kCoeffBits, kCoeffBits);
  }

  // Keep the model only if its decoded shape lands closer to the beat than
  // storing nothing at all. On noise-dominated beats the complex fit can
  // spend its accuracy on the imaginary half, and the decoder then rescales
  // a weakly correlated real shape up to the full stored norm — worse than
  // the plain trend, and far more bits.
  const std::vector<double> shape = decoded_shape(cb, ranges);
  double err_fit = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = seg.samples[i] - shape[i];
    err_fit += d * d;
  }
  if (err_fit >= norm * norm) {
    cb.dim_index = 0;
    cb.norm_code = 0;
    cb.pole_codes.clear();
    cb.coeff_codes.clear();
  }
  return out;
}

namespace {

// Most recent `limit` warm starts, oldest first.
std::vector<SwarmSeed> recent_seeds(const std::deque<SwarmSeed>& buffer,
                                    std::size_t limit) {
  const std::size_t n = std::min(buffer.size(), limit);
  return {buffer.end() - static_cast<std::ptrdiff_t>(n), buffer.end()};
}

EncodeResult encode_impl(const Record& record, const BeatAnnotations& annotations,
                         const EncodeParams& params,
                         const CompressedBeat* forced_template) {
  if (!(params.alpha > 0.0 && params.alpha <= 1.0))
    throw ValidationError("alpha must lie in (0, 1]");
  if (params.swarm_size < 2)
    throw ValidationError("swarm size must be at least 2");
  if (params.iterations < 1)
    throw ValidationError("iteration count must be at least 1");
  for (double v : record.samples)
    if (!std::isfinite(v))
      throw ValidationError("record contains non-finite samples");
  if (forced_template && params.mode != CodecMode::Aligned)
    throw ValidationError("template override requires aligned mode");
  if (forced_template && forced_template->dim_index != 0)
    throw ValidationError("template override must be a trend-only payload");

  std::vector<BeatSegment> segs = segment(record, annotations);
  if (segs.size() > 0xFFFF)
    throw ValidationError("beat count exceeds the 16-bit field");
  if (segs.front().start > 0xFFFFFFFFull)
    throw ValidationError("record offset exceeds the 32-bit field");

  CompressedRecord layout;
  layout.beat_count = static_cast<std::uint16_t>(segs.size());
  layout.mode = params.mode;
  layout.start_offset = static_cast<std::uint32_t>(segs.front().start);

  {
    double mean = 0.0;
    for (double v : record.samples) mean += v;
    mean /= static_cast<double>(record.samples.size());
    double var = 0.0;
    for (double v : record.samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(record.samples.size());
    layout.mean = static_cast<float>(mean);
    layout.stddev = static_cast<float>(std::sqrt(var));
  }

  double amp_min = std::numeric_limits<double>::infinity();
  double amp_max = -std::numeric_limits<double>::infinity();
  for (const BeatSegment& s : segs) {
    amp_min = std::min({amp_min, s.f0, s.f_last});
    amp_max = std::max({amp_max, s.f0, s.f_last});
  }
  layout.amp_min = static_cast<float>(amp_min);
  layout.amp_max = static_cast<float>(amp_max);

  // All scalar grids are evaluated from the float-rounded header fields so
  // the encoder and decoder quantize against identical ranges.
  std::vector<double> template_full;
  if (params.mode == CodecMode::Basic) {
    double max_norm = 0.0;
    for (const BeatSegment& s : segs) max_norm = std::max(max_norm, s.norm);
    layout.norm_max = static_cast<float>(1.02 * max_norm);
  } else {
    const std::size_t m_max =
        std::max_element(segs.begin(), segs.end(),
                         [](const BeatSegment& a, const BeatSegment& b) {
                           return a.samples.size() < b.samples.size();
                         })
            ->samples.size();

    CompressedBeat tpayload;
    if (forced_template) {
      tpayload = *forced_template;
      // Trend-only payloads decode independently of the norm grid, so the
      // residuals can be formed before the grid is chosen.
      const QuantRanges amp_only{static_cast<double>(layout.amp_min),
                                 static_cast<double>(layout.amp_max), 1.0};
      const std::vector<double> tfull =
          reconstruct_beat(tpayload, amp_only, nullptr);
      double max_r = 0.0;
      for (BeatSegment& s : segs) {
        const std::vector<double> t = template_crop(tfull, s.samples.size());
        for (std::size_t j = 0; j < s.samples.size(); ++j) s.samples[j] -= t[j];
        s.norm = l2_norm(s.samples);
        s.flat = s.norm < kFlatNormThreshold;
        max_r = std::max(max_r, s.norm);
      }
      layout.norm_max = static_cast<float>(1.02 * max_r);
      layout.template_beat = tpayload;
      template_full = tfull;
    } else {
      std::vector<double> average(m_max, 0.0);
      const std::size_t count =
          std::min<std::size_t>(kTemplateBeats, segs.size());
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < segs[i].samples.size(); ++j)
          average[j] += segs[i].samples[j];
      for (double& v : average) v /= static_cast<double>(count);

      BeatSegment tseg;
      tseg.samples = average;
      tseg.f0 = 0.0;
      tseg.f_last = 0.0;
      tseg.norm = l2_norm(average);
      tseg.flat = tseg.norm < kFlatNormThreshold;

      double max_beat_norm = 0.0;
      for (const BeatSegment& s : segs)
        max_beat_norm = std::max(max_beat_norm, s.norm);
      const double provisional_norm_max =
          1.02 * std::max(tseg.norm, max_beat_norm + tseg.norm);
      const QuantRanges provisional{static_cast<double>(layout.amp_min),
                                    static_cast<double>(layout.amp_max),
                                    provisional_norm_max};

      BeatEncodeParams tp;
      tp.alpha = params.alpha;
      tp.swarm_size = params.swarm_size;
      tp.iterations = params.iterations;
      tp.rng_seed = mix_seed(params.rng_seed, kTemplateSeedTag);
      tp.d_min = kTemplateDim;
      tp.d_max = kTemplateDim;
      tpayload = encode_beat(tseg, tp, provisional, {}).beat;

      // The residual norms fix the final grid; only the template's norm code
      // depends on it, so re-code that one field and re-decode.
      const std::vector<double> tfull0 =
          reconstruct_beat(tpayload, provisional, nullptr);
      double max_r = tseg.norm;
      for (const BeatSegment& s : segs) {
        const std::vector<double> t = template_crop(tfull0, s.samples.size());
        double sumsq = 0.0;
        for (std::size_t j = 0; j < s.samples.size(); ++j) {
          const double d = s.samples[j] - t[j];
          sumsq += d * d;
        }
        max_r = std::max(max_r, std::sqrt(sumsq));
      }
      layout.norm_max = static_cast<float>(1.02 * max_r);
      const QuantRanges final_ranges{static_cast<double>(layout.amp_min),
                                     static_cast<double>(layout.amp_max),
                                     static_cast<double>(layout.norm_max)};
      tpayload.norm_code = quantize_scalar(tseg.norm, 0.0, final_ranges.norm_max);
      template_full = reconstruct_beat(tpayload, final_ranges, nullptr);
      layout.template_beat = tpayload;

      for (BeatSegment& s : segs) {
        const std::vector<double> t = template_crop(template_full, s.samples.size());
        for (std::size_t j = 0; j < s.samples.size(); ++j) s.samples[j] -= t[j];
        s.norm = l2_norm(s.samples);
        s.flat = s.norm < kFlatNormThreshold;
      }
    }
  }

  const QuantRanges ranges = layout.ranges();
  const bool aligned = params.mode == CodecMode::Aligned;

  layout.beats.resize(segs.size());
  EncodeResult result;
  result.beats.resize(segs.size());

  const auto encode_one = [&](std::size_t i,
                              const std::vector<SwarmSeed>& seeds) -> SwarmSeed {
    BeatEncodeParams bp;
    bp.alpha = params.alpha;
    bp.swarm_size = params.swarm_size;
    bp.iterations = params.iterations;
    bp.rng_seed = mix_seed(params.rng_seed, i);
    BeatEncodeOutcome out = encode_beat(segs[i], bp, ranges, seeds);
    layout.beats[i] = out.beat;

    const std::vector<double> rec = reconstruct_beat(
        out.beat, ranges, aligned ? &template_full : nullptr);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < rec.size(); ++j) {
      const double orig = record.samples[segs[i].start + j];
      const double d = orig - rec[j];
      num += d * d;
      den += orig * orig;
    }
    BeatDiagnostics& diag = result.beats[i];
    diag.dim_index = out.beat.dim_index;
    diag.start = segs[i].start;
    diag.length = rec.size();
    diag.evaluations = out.evaluations;
    diag.prd = den > 0.0 ? 100.0 * std::sqrt(num / den)
                         : (num > 0.0 ? std::numeric_limits<double>::infinity()
                                      : 0.0);
    return std::move(out.optimum);
  };

  if (params.parallel) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, segs.size()));
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::atomic<bool> abort{false};
    const auto worker = [&] {
      while (!abort.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= segs.size()) return;
        try {
          encode_one(i, {});
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          abort.store(true, std::memory_order_relaxed);
          return;
        }
      }
    };
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
  } else {
    std::deque<SwarmSeed> buffer;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      SwarmSeed opt = encode_one(
          i, recent_seeds(buffer, std::min<std::size_t>(
                                      kSeedBufferBeats,
                                      static_cast<std::size_t>(params.swarm_size))));
      if (opt.dim != 0) {
        buffer.push_back(std::move(opt));
        if (buffer.size() > kSeedBufferBeats) buffer.pop_front();
      }
    }
  }

  result.bytes = serialize(layout);
  result.layout = std::move(layout);
  return result;
}

}  // namespace

EncodeResult encode_record(const Record& record,
                           const BeatAnnotations& annotations,
                           const EncodeParams& params) {
  return encode_impl(record, annotations, params, nullptr);
}

EncodeResult encode_record_with_template(const Record& record,
                                         const BeatAnnotations& annotations,
                                         const EncodeParams& params,
                                         const CompressedBeat& forced_template) {
  return encode_impl(record, annotations, params, &forced_template);
}

DecodedRecord decode_record(const std::vector<std::uint8_t>& bytes) {
  const CompressedRecord r = parse(bytes);
  const QuantRanges ranges = r.ranges();

  std::vector<double> template_full;
  if (r.template_beat)
    template_full = reconstruct_beat(*r.template_beat, ranges, nullptr);

  DecodedRecord out;
  out.start_offset = r.start_offset;
  out.mode = r.mode;
  out.beat_count = r.beat_count;
  out.mean = r.mean;
  out.stddev = r.stddev;
  out.beat_lengths.reserve(r.beats.size());
  out.beat_dims.reserve(r.beats.size());
  for (const CompressedBeat& b : r.beats) {
    const std::vector<double> s = reconstruct_beat(
        b, ranges, r.template_beat ? &template_full : nullptr);
    out.beat_lengths.push_back(b.length);
    out.beat_dims.push_back(b.dim_index);
    out.samples.insert(out.samples.end(), s.begin(), s.end());
  }
  return out;
}

}  // namespace rvp
