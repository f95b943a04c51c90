#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "rvp/architecture.hpp"
#include "rvp/ecg_io.hpp"
#include "rvp/mdhpso.hpp"
#include "rvp/quant.hpp"

namespace rvp {

inline constexpr std::size_t kFiducialOffset = 130;  // samples before the R peak
inline constexpr std::size_t kMinBeatLength = 32;
inline constexpr int kSeedBufferBeats = 5;   // warm-start window
inline constexpr int kTemplateBeats = 30;    // beats averaged for the template
inline constexpr int kTemplateDim = kDimMax; // template model order
inline constexpr double kFlatNormThreshold = 1e-10;

// Stream field widths.
inline constexpr int kDimBits = 6;
inline constexpr int kLengthBits = 16;
inline constexpr int kScalarBits = 8;

// One beat after segmentation and linear correction. `samples` holds the
// corrected signal (both endpoints exactly zero); the removed trend is kept
// as (f0, f_last).
struct BeatSegment {
  std::vector<double> samples;
  std::size_t start = 0;  // absolute index of the first sample in the record
  double f0 = 0.0;
  double f_last = 0.0;
  double norm = 0.0;  // l2 norm of the corrected samples
  bool flat = false;  // norm below kFlatNormThreshold
};

// Cut rule: beat i spans [q_i - 130, q_{i+1} - 130); the first start clamps
// to 0, the last beat runs to the record end. Beats shorter than 32 samples
// are dropped with a warning. Throws NoBeats when nothing remains and
// ValidationError when a beat exceeds the 16-bit length field.
std::vector<BeatSegment> segment(const Record& record,
                                 const BeatAnnotations& annotations);

// Subtract the straight line through the endpoints in place; returns the
// original endpoints. Requires at least 2 samples.
void linear_correct(std::vector<double>& samples, double* f0, double* f_last);

// Scale to unit l2 norm in place; returns false (and leaves the input
// unscaled) when the norm falls below kFlatNormThreshold.
bool normalize(std::vector<double>& corrected, double* norm);

// Periodic discrete analytic extension: DFT, zero the negative-frequency
// bins, double the positive ones (DC and Nyquist unchanged), inverse DFT.
// The real part reproduces the input.
Eigen::VectorXcd analytic_extend(const std::vector<double>& signal);

// Linear quantizer over [lo, hi] with 2^kScalarBits levels; degenerate
// ranges (hi <= lo) map everything to code 0 / value lo.
std::uint8_t quantize_scalar(double value, double lo, double hi);
double dequantize_scalar(std::uint8_t code, double lo, double hi);

// Serialized model of one beat: model-order index (0 = trend-only beat with
// no pole/coefficient payload), original length, endpoint and norm codes,
// then the pole and coefficient codes dictated by the architecture row.
struct CompressedBeat {
  int dim_index = 0;
  std::uint16_t length = 0;
  std::uint8_t f0_code = 0;
  std::uint8_t flast_code = 0;
  std::uint8_t norm_code = 0;
  std::vector<DiscCodes> pole_codes;   // n entries, 4+4 bits each
  std::vector<DiscCodes> coeff_codes;  // N entries, 7+7 bits each
};

// Header quantization grids: endpoints are coded linearly over
// [amp_min, amp_max], norms over [0, norm_max].
struct QuantRanges {
  double amp_min = 0.0;
  double amp_max = 0.0;
  double norm_max = 0.0;
};

enum class CodecMode : int { Basic = 0, Aligned = 1 };

// In-memory mirror of the compressed stream.
struct CompressedRecord {
  std::uint16_t beat_count = 0;
  float mean = 0.0f;
  float stddev = 0.0f;
  float amp_min = 0.0f;
  float amp_max = 0.0f;
  float norm_max = 0.0f;
  std::uint32_t start_offset = 0;  // record index of the first decoded sample
  CodecMode mode = CodecMode::Basic;
  std::optional<CompressedBeat> template_beat;  // present in aligned mode
  std::vector<CompressedBeat> beats;

  QuantRanges ranges() const { return {amp_min, amp_max, norm_max}; }
};

// Exact payload accounting, independent of the serializer: per-beat cost is
// 6 + 16 + 3*8 bits plus 8 per pole and 14 per coefficient; the header adds
// magic, the architecture table, counts, statistics, ranges, offset and the
// mode flag (plus the template payload when present). Returns bits before
// final byte padding.
std::size_t beat_payload_bits(const CompressedBeat& beat);
std::size_t compressed_bits(const CompressedRecord& record);

// Bit-exact serialization. serialize throws ValidationError when a beat's
// code counts disagree with its architecture row; parse throws BadMagic,
// InconsistentArchitectureTable, TruncatedStream, or ValidationError.
std::vector<std::uint8_t> serialize(const CompressedRecord& record);
CompressedRecord parse(const std::vector<std::uint8_t>& bytes);

// Decode one beat to samples. `template_full` (aligned mode) is the decoded
// template at full padded length: it is cropped to the beat length and its
// crop-endpoint trend removed before adding, which cancels the template's
// own trend-quantization error exactly.
std::vector<double> reconstruct_beat(const CompressedBeat& beat,
                                     const QuantRanges& ranges,
                                     const std::vector<double>* template_full);
std::vector<double> template_crop(const std::vector<double>& template_full,
                                  std::size_t length);

struct BeatEncodeParams {
  double alpha = 0.5;
  int swarm_size = 30;
  int iterations = 20;
  std::uint64_t rng_seed = 0;
  int d_min = kDimMin;
  int d_max = kDimMax;
};

struct BeatEncodeOutcome {
  CompressedBeat beat;
  SwarmSeed optimum;            // winning dimension + raw poles (warm starts)
  std::uint64_t evaluations = 0;
};

// Normalizes and analytically extends the corrected beat, runs the swarm
// search with the quantize-aware cost (memoized on the pole grid), then
// stores quantized poles plus coefficients re-fit against the quantized
// basis. Flat beats short-circuit to a trend-only payload, and a model whose
// decoded shape lands no closer to the beat than the plain trend is dropped
// to the same payload.
BeatEncodeOutcome encode_beat(const BeatSegment& seg,
                              const BeatEncodeParams& params,
                              const QuantRanges& ranges,
                              const std::vector<SwarmSeed>& seeds);

struct EncodeParams {
  CodecMode mode = CodecMode::Basic;
  double alpha = 0.5;
  int swarm_size = 30;
  int iterations = 20;
  std::uint64_t rng_seed = 0;
  // Encode beats concurrently; disables the warm-start buffer (results
  // differ from the sequential path but stay deterministic).
  bool parallel = false;
};

struct BeatDiagnostics {
  int dim_index = 0;
  std::size_t start = 0;  // absolute index of the beat in the source record
  std::size_t length = 0;
  double prd = 0.0;  // decoded beat vs the original slice, percent
  std::uint64_t evaluations = 0;
};

struct EncodeResult {
  std::vector<std::uint8_t> bytes;
  CompressedRecord layout;
  std::vector<BeatDiagnostics> beats;
};

// Full pipeline: segmentation, correction, range derivation, per-beat swarm
// encoding (with the rolling warm-start buffer unless parallel), aligned-mode
// template construction/subtraction, serialization.
EncodeResult encode_record(const Record& record,
                           const BeatAnnotations& annotations,
                           const EncodeParams& params);

// Test seam: aligned-mode encode with a caller-supplied template payload in
// place of the constructed average-beat model.
EncodeResult encode_record_with_template(const Record& record,
                                         const BeatAnnotations& annotations,
                                         const EncodeParams& params,
                                         const CompressedBeat& forced_template);

struct DecodedRecord {
  std::vector<double> samples;  // concatenated beats
  std::size_t start_offset = 0;
  CodecMode mode = CodecMode::Basic;
  std::uint16_t beat_count = 0;
  float mean = 0.0f;
  float stddev = 0.0f;
  std::vector<std::size_t> beat_lengths;
  std::vector<int> beat_dims;
};

DecodedRecord decode_record(const std::vector<std::uint8_t>& bytes);

}  // namespace rvp
