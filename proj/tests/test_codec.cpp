#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rvp/bitio.hpp"
#include "rvp/codec.hpp"
#include "rvp/ecg_io.hpp"
#include "rvp/errors.hpp"
#include "rvp/metrics.hpp"
#include "rvp/quant.hpp"
#include "rvp/rng.hpp"

using rvp::CompressedBeat;
using rvp::CompressedRecord;
using rvp::cx;

namespace {

// Fixed header geometry: magic [0,4), architecture table [4,49),
// beat count [49,51), mean [51,55), stddev [55,59), amp_min [59,63),
// amp_max [63,67), norm_max [67,71), start offset [71,75), then the mode bit.
constexpr std::size_t kAmpMinByte = 59;
constexpr std::size_t kAmpMaxByte = 63;
constexpr std::size_t kMeanByte = 51;

void poke_f32(std::vector<std::uint8_t>& bytes, std::size_t at, std::uint32_t pattern) {
  bytes[at] = static_cast<std::uint8_t>(pattern >> 24);
  bytes[at + 1] = static_cast<std::uint8_t>(pattern >> 16);
  bytes[at + 2] = static_cast<std::uint8_t>(pattern >> 8);
  bytes[at + 3] = static_cast<std::uint8_t>(pattern);
}

CompressedRecord minimal_record() {
  CompressedRecord r;
  r.beat_count = 0;
  r.amp_min = -1.0f;
  r.amp_max = 1.0f;
  r.norm_max = 2.0f;
  return r;
}

CompressedBeat random_beat(rvp::Rng& rng, int dim, std::uint16_t length) {
  CompressedBeat b;
  b.dim_index = dim;
  b.length = length;
  b.f0_code = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  b.flast_code = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  b.norm_code = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  if (dim == 0) return b;
  const auto& row = rvp::architecture_lookup(dim);
  for (int i = 0; i < row.n; ++i)
    b.pole_codes.push_back({static_cast<std::uint32_t>(rng.uniform_int(0, 15)),
                            static_cast<std::uint32_t>(rng.uniform_int(0, 14))});
  for (int i = 0; i < row.total_N; ++i)
    b.coeff_codes.push_back({static_cast<std::uint32_t>(rng.uniform_int(0, 127)),
                             static_cast<std::uint32_t>(rng.uniform_int(0, 127))});
  return b;
}

bool beats_equal(const CompressedBeat& a, const CompressedBeat& b) {
  if (a.dim_index != b.dim_index || a.length != b.length || a.f0_code != b.f0_code ||
      a.flast_code != b.flast_code || a.norm_code != b.norm_code)
    return false;
  if (a.pole_codes.size() != b.pole_codes.size() ||
      a.coeff_codes.size() != b.coeff_codes.size())
    return false;
  for (std::size_t i = 0; i < a.pole_codes.size(); ++i)
    if (a.pole_codes[i].angle != b.pole_codes[i].angle ||
        a.pole_codes[i].magnitude != b.pole_codes[i].magnitude)
      return false;
  for (std::size_t i = 0; i < a.coeff_codes.size(); ++i)
    if (a.coeff_codes[i].angle != b.coeff_codes[i].angle ||
        a.coeff_codes[i].magnitude != b.coeff_codes[i].magnitude)
      return false;
  return true;
}

double concat_prd(const rvp::Record& record, const rvp::EncodeResult& enc,
                  const rvp::DecodedRecord& dec) {
  std::vector<double> original;
  for (const auto& d : enc.beats) {
    for (std::size_t j = 0; j < d.length; ++j)
      original.push_back(record.samples[d.start + j]);
  }
  REQUIRE(original.size() == dec.samples.size());
  return rvp::prd(original, dec.samples);
}

}  // namespace

TEST_SUITE("codec") {

TEST_CASE("bit packing is most significant bit first") {
  rvp::BitWriter w;
  w.put(1, 1);
  CHECK(w.bytes().back() == 0x80);
  w.put(0x5, 3);          // 101
  w.put(0x1FF, 9);        // nine ones
  CHECK(w.bit_count() == 13);
  w.put_f32(1.5f);
  w.align();
  CHECK(w.bit_count() == 48);
  w.put(0xAB, 8);
  const auto bytes = w.take();
  REQUIRE(bytes.size() == 7);

  rvp::BitReader rd(bytes);
  CHECK(rd.get(1) == 1);
  CHECK(rd.get(3) == 0x5);
  CHECK(rd.get(9) == 0x1FF);
  rd.align();  // skips the padding inside the float's byte? no: floats are
               // bit-packed, so realign only after reading them back
  CHECK(rd.bit_position() == 16);
  rd.align();
  CHECK(rd.bit_position() == 16);  // idempotent when already aligned
}

TEST_CASE("bit fields round trip across byte boundaries") {
  rvp::Rng rng(71);
  std::vector<std::pair<std::uint64_t, int>> fields;
  rvp::BitWriter w;
  for (int i = 0; i < 200; ++i) {
    const int width = rng.uniform_int(1, 24);
    const std::uint64_t value =
        static_cast<std::uint64_t>(rng.uniform_int(0, 1 << 20)) &
        ((std::uint64_t{1} << width) - 1);
    fields.emplace_back(value, width);
    w.put(value, width);
  }
  w.put_f32(-0.125f);
  const auto bytes = w.take();

  rvp::BitReader rd(bytes);
  for (const auto& [value, width] : fields) CHECK(rd.get(width) == value);
  CHECK(rd.get_f32() == -0.125f);
  CHECK(rd.bits_left() < 8);
}

TEST_CASE("reading past the end reports truncation") {
  rvp::BitWriter w;
  w.put(0xAA, 8);
  const auto bytes = w.take();
  rvp::BitReader rd(bytes);
  CHECK(rd.get(8) == 0xAA);
  CHECK_THROWS_AS(rd.get(1), rvp::TruncatedStream);
}

TEST_CASE("segmentation cuts at the offset before each fiducial") {
  rvp::Record record;
  record.samples.resize(700);
  for (std::size_t i = 0; i < record.samples.size(); ++i)
    record.samples[i] = std::sin(static_cast<double>(i) * 0.05) + 2.0;
  rvp::BeatAnnotations ann;
  ann.qrs_indices = {130, 430};

  const auto segs = rvp::segment(record, ann);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].start == 0);
  CHECK(segs[0].samples.size() == 300);
  CHECK(segs[1].start == 300);
  CHECK(segs[1].samples.size() == 400);

  // Segments come out linear-corrected: endpoints exactly zero, original
  // endpoints kept aside, norm describing the corrected shape.
  for (const auto& s : segs) {
    CHECK(s.samples.front() == 0.0);
    CHECK(s.samples.back() == 0.0);
    CHECK(s.f0 == record.samples[s.start]);
    CHECK(s.f_last == record.samples[s.start + s.samples.size() - 1]);
    double sumsq = 0.0;
    for (double v : s.samples) sumsq += v * v;
    CHECK(s.norm == doctest::Approx(std::sqrt(sumsq)).epsilon(1e-12));
    CHECK_FALSE(s.flat);
  }
}

TEST_CASE("segmentation clamps the leading cut to the record start") {
  rvp::Record record;
  record.samples.assign(400, 1.0);
  rvp::BeatAnnotations ann;
  ann.qrs_indices = {50};
  const auto segs = rvp::segment(record, ann);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start == 0);
  CHECK(segs[0].samples.size() == 400);
}

TEST_CASE("segmentation drops spans shorter than the minimum") {
  rvp::Record record;
  record.samples.assign(700, 0.5);
  rvp::BeatAnnotations ann;
  ann.qrs_indices = {130, 150};  // cuts at 0 and 20: the first span is 20 long
  const auto segs = rvp::segment(record, ann);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start == 20);
  CHECK(segs[0].samples.size() == 680);
}

TEST_CASE("segmentation ignores annotations beyond the record") {
  rvp::Record record;
  record.samples.assign(700, 0.5);
  rvp::BeatAnnotations ann;
  ann.qrs_indices = {130, 430, 5000};
  const auto segs = rvp::segment(record, ann);
  CHECK(segs.size() == 2);
}

TEST_CASE("segmentation fails cleanly when nothing remains") {
  rvp::Record record;
  record.samples.assign(20, 0.5);
  rvp::BeatAnnotations ann;
  ann.qrs_indices = {130};
  CHECK_THROWS_AS(rvp::segment(record, ann), rvp::NoBeats);

  rvp::BeatAnnotations empty;
  record.samples.assign(400, 0.5);
  CHECK_THROWS_AS(rvp::segment(record, empty), rvp::NoBeats);
}

TEST_CASE("segmentation rejects spans beyond the length field") {
  rvp::Record record;
  record.samples.assign(70000, 0.0);
  rvp::BeatAnnotations ann;
  ann.qrs_indices = {130};
  CHECK_THROWS_AS(rvp::segment(record, ann), rvp::ValidationError);
}

TEST_CASE("linear correction pins both endpoints to zero") {
  std::vector<double> samples{1.0, 2.0, 3.0, 5.0};
  double f0 = 0.0, f_last = 0.0;
  rvp::linear_correct(samples, &f0, &f_last);
  CHECK(f0 == 1.0);
  CHECK(f_last == 5.0);
  CHECK(samples[0] == 0.0);
  CHECK(samples[3] == 0.0);
  CHECK(samples[1] == doctest::Approx(2.0 - (1.0 + 4.0 / 3.0)).epsilon(1e-14));
  CHECK(samples[2] == doctest::Approx(3.0 - (1.0 + 8.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("normalization reports flat inputs") {
  std::vector<double> flat(64, 0.0);
  double norm = -1.0;
  CHECK_FALSE(rvp::normalize(flat, &norm));

  std::vector<double> shape{0.0, 3.0, 4.0, 0.0};
  CHECK(rvp::normalize(shape, &norm));
  CHECK(norm == 5.0);
  double sumsq = 0.0;
  for (double v : shape) sumsq += v * v;
  CHECK(sumsq == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("analytic extension keeps the real part") {
  rvp::Rng rng(72);
  for (const std::size_t m : {15u, 16u, 300u}) {
    std::vector<double> signal(m);
    for (auto& v : signal) v = rng.uniform(-1.0, 1.0);
    const Eigen::VectorXcd analytic = rvp::analytic_extend(signal);
    REQUIRE(analytic.size() == static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
      CHECK(analytic[static_cast<Eigen::Index>(i)].real() ==
            doctest::Approx(signal[i]).epsilon(1e-10));
  }
}

TEST_CASE("analytic extension turns cosine into the complex exponential") {
  const std::size_t m = 64;
  std::vector<double> signal(m);
  for (std::size_t i = 0; i < m; ++i)
    signal[i] = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(m));
  const Eigen::VectorXcd analytic = rvp::analytic_extend(signal);
  for (std::size_t i = 0; i < m; ++i) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(m);
    CHECK(analytic[static_cast<Eigen::Index>(i)].real() ==
          doctest::Approx(std::cos(theta)).epsilon(1e-10));
    CHECK(analytic[static_cast<Eigen::Index>(i)].imag() ==
          doctest::Approx(std::sin(theta)).epsilon(1e-10));
  }
}

TEST_CASE("analytic extension leaves constants and the alternating tone real") {
  std::vector<double> constant(32, 0.75);
  const Eigen::VectorXcd a = rvp::analytic_extend(constant);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    CHECK(a[i].real() == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(std::abs(a[i].imag()) < 1e-12);
  }

  // The half-rate tone sits on the even-length fold and must not be doubled.
  std::vector<double> nyquist(32);
  for (std::size_t i = 0; i < nyquist.size(); ++i)
    nyquist[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const Eigen::VectorXcd b = rvp::analytic_extend(nyquist);
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    CHECK(b[i].real() == doctest::Approx(nyquist[static_cast<std::size_t>(i)])
                             .epsilon(1e-10));
    CHECK(std::abs(b[i].imag()) < 1e-10);
  }
}

TEST_CASE("scalar quantization rounds, clamps, and degenerates") {
  CHECK(rvp::quantize_scalar(0.0, 0.0, 1.0) == 0);
  CHECK(rvp::quantize_scalar(1.0, 0.0, 1.0) == 255);
  CHECK(rvp::quantize_scalar(-5.0, 0.0, 1.0) == 0);
  CHECK(rvp::quantize_scalar(7.0, 0.0, 1.0) == 255);
  CHECK(rvp::dequantize_scalar(0, -2.0, 2.0) == -2.0);
  CHECK(rvp::dequantize_scalar(255, -2.0, 2.0) == 2.0);

  // Degenerate range: everything maps to the single representable value.
  CHECK(rvp::quantize_scalar(0.7, 1.0, 1.0) == 0);
  CHECK(rvp::dequantize_scalar(9, 1.0, 1.0) == 1.0);

  rvp::Rng rng(73);
  const double lo = -1.5, hi = 2.5;
  const double step = (hi - lo) / 255.0;
  for (int i = 0; i < 500; ++i) {
    const double v = rng.uniform(lo, hi);
    const double back =
        rvp::dequantize_scalar(rvp::quantize_scalar(v, lo, hi), lo, hi);
    CHECK(std::abs(back - v) <= step / 2.0 + 1e-12);
  }
}

TEST_CASE("polar quantization matches the documented grid") {
  // arg(-1) = pi: half the 16-step circle.
  const auto c1 = rvp::quantize_disc({-1.0, 0.0}, 4, 4);
  CHECK(c1.angle == 8);
  // |0.99| rounds up to the clamped top magnitude code 15 -> 15/16.
  const auto c2 = rvp::quantize_disc({0.99, 0.0}, 4, 4);
  CHECK(c2.angle == 0);
  CHECK(c2.magnitude == 15);
  CHECK(rvp::dequantize_disc(c2, 4, 4).real() == doctest::Approx(15.0 / 16.0));

  // Snapping is a projection: grid points are fixed.
  rvp::Rng rng(74);
  for (int i = 0; i < 200; ++i) {
    const cx v = rng.in_disc(0.98).c();
    const cx snapped = rvp::snap_to_grid(v, 4, 4);
    const cx twice = rvp::snap_to_grid(snapped, 4, 4);
    CHECK(std::abs(snapped - twice) < 1e-15);
    CHECK(std::abs(snapped) < 1.0);
  }
}

TEST_CASE("payload accounting matches the advertised field widths") {
  rvp::Rng rng(75);
  // Row 10 is (6,6): two poles, twelve coefficients.
  const CompressedBeat b10 = random_beat(rng, 10, 300);
  CHECK(rvp::beat_payload_bits(b10) == 46 + 2 * 8 + 12 * 14);
  const CompressedBeat b0 = random_beat(rng, 0, 300);
  CHECK(rvp::beat_payload_bits(b0) == 46);

  CompressedRecord r = minimal_record();
  r.beats.push_back(b10);
  r.beats.push_back(b0);
  r.beat_count = 2;
  const auto bytes = rvp::serialize(r);
  CHECK(bytes.size() == (rvp::compressed_bits(r) + 7) / 8);
}

TEST_CASE("serialized records survive parsing in both modes") {
  rvp::Rng rng(76);
  CompressedRecord r = minimal_record();
  r.mean = 0.25f;
  r.stddev = 1.75f;
  r.start_offset = 12345;
  r.beats.push_back(random_beat(rng, 1, 300));
  r.beats.push_back(random_beat(rng, 0, 48));
  r.beats.push_back(random_beat(rng, 30, 65535));
  r.beat_count = 3;

  SUBCASE("basic") {}
  SUBCASE("aligned") {
    r.mode = rvp::CodecMode::Aligned;
    r.template_beat = random_beat(rng, 30, 400);
  }

  const auto bytes = rvp::serialize(r);
  const CompressedRecord back = rvp::parse(bytes);
  CHECK(back.beat_count == r.beat_count);
  CHECK(back.mean == r.mean);
  CHECK(back.stddev == r.stddev);
  CHECK(back.amp_min == r.amp_min);
  CHECK(back.amp_max == r.amp_max);
  CHECK(back.norm_max == r.norm_max);
  CHECK(back.start_offset == r.start_offset);
  CHECK((back.mode == r.mode));
  REQUIRE(back.template_beat.has_value() == r.template_beat.has_value());
  if (r.template_beat) CHECK(beats_equal(*back.template_beat, *r.template_beat));
  REQUIRE(back.beats.size() == r.beats.size());
  for (std::size_t i = 0; i < r.beats.size(); ++i)
    CHECK(beats_equal(back.beats[i], r.beats[i]));
}

TEST_CASE("the stream starts with the magic tag") {
  const auto bytes = rvp::serialize(minimal_record());
  REQUIRE(bytes.size() >= 4);
  CHECK(bytes[0] == 'R');
  CHECK(bytes[1] == 'V');
  CHECK(bytes[2] == 'P');
  CHECK(bytes[3] == '1');
}

TEST_CASE("parsing rejects corrupted streams field by field") {
  rvp::Rng rng(77);
  CompressedRecord r = minimal_record();
  r.beats.push_back(random_beat(rng, 5, 200));
  r.beat_count = 1;
  const auto good = rvp::serialize(r);
  CHECK_NOTHROW(rvp::parse(good));

  auto bad = good;
  bad[0] ^= 0xFF;
  CHECK_THROWS_AS(rvp::parse(bad), rvp::BadMagic);

  bad = good;
  bad[4] ^= 0xFF;  // first architecture-table byte
  CHECK_THROWS_AS(rvp::parse(bad), rvp::InconsistentArchitectureTable);

  bad = good;
  bad.resize(bad.size() - 1);
  CHECK_THROWS_AS(rvp::parse(bad), rvp::TruncatedStream);

  bad = good;
  bad.push_back(0x00);
  CHECK_THROWS_AS(rvp::parse(bad), rvp::ValidationError);

  bad = good;
  poke_f32(bad, kAmpMinByte, 0x3F800000u);  // amp_min = 1.0
  poke_f32(bad, kAmpMaxByte, 0x3F000000u);  // amp_max = 0.5
  CHECK_THROWS_AS(rvp::parse(bad), rvp::ValidationError);

  bad = good;
  poke_f32(bad, kMeanByte, 0x7FC00000u);  // quiet NaN
  CHECK_THROWS_AS(rvp::parse(bad), rvp::ValidationError);
}

TEST_CASE("decoded beats land exactly on their quantized endpoints") {
  rvp::Rng rng(78);
  const rvp::QuantRanges ranges{-2.0, 2.0, 3.0};
  for (int trial = 0; trial < 20; ++trial) {
    const CompressedBeat b = random_beat(rng, rng.uniform_int(1, 30), 250);
    const auto decoded = rvp::reconstruct_beat(b, ranges, nullptr);
    REQUIRE(decoded.size() == 250);
    CHECK(decoded.front() ==
          rvp::dequantize_scalar(b.f0_code, ranges.amp_min, ranges.amp_max));
    CHECK(decoded.back() ==
          rvp::dequantize_scalar(b.flast_code, ranges.amp_min, ranges.amp_max));
  }
}

TEST_CASE("trend-only beats decode to the straight line") {
  rvp::QuantRanges ranges{-1.0, 1.0, 1.0};
  CompressedBeat b;
  b.dim_index = 0;
  b.length = 100;
  b.f0_code = 0;
  b.flast_code = 255;
  const auto decoded = rvp::reconstruct_beat(b, ranges, nullptr);
  for (std::size_t i = 0; i < 100; ++i) {
    const double expected = -1.0 + 2.0 * static_cast<double>(i) / 99.0;
    CHECK(decoded[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("flat beats short-circuit to a trend-only payload") {
  rvp::BeatSegment seg;
  seg.samples.assign(64, 0.0);
  seg.f0 = 0.4;
  seg.f_last = -0.2;
  seg.norm = 0.0;
  seg.flat = true;
  rvp::BeatEncodeParams params;
  const rvp::QuantRanges ranges{-1.0, 1.0, 2.0};
  const auto out = rvp::encode_beat(seg, params, ranges, {});
  CHECK(out.beat.dim_index == 0);
  CHECK(out.beat.norm_code == 0);
  CHECK(out.evaluations == 0);
  CHECK(out.beat.pole_codes.empty());
  CHECK(out.beat.coeff_codes.empty());
  CHECK(rvp::beat_payload_bits(out.beat) == 46);
}

TEST_CASE("encoding compresses a synthetic record and decodes close to it") {
  rvp::Rng rng(79);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(8, 300, {}, 0.05, rng, &truth);

  rvp::EncodeParams params;
  params.swarm_size = 6;
  params.iterations = 3;
  params.rng_seed = 42;
  const auto enc = rvp::encode_record(record, truth, params);

  CHECK(enc.bytes.size() < record.samples.size() * 2);  // far below raw doubles
  REQUIRE(enc.beats.size() == enc.layout.beats.size());
  for (const auto& d : enc.beats) {
    CHECK(d.evaluations == 6 * 30 + 6 * 3);
    CHECK(d.dim_index >= 1);
    CHECK(d.dim_index <= 30);
    CHECK(std::isfinite(d.prd));
  }

  const auto dec = rvp::decode_record(enc.bytes);
  CHECK(dec.beat_count == enc.layout.beat_count);
  CHECK(dec.start_offset == enc.layout.start_offset);
  CHECK((dec.mode == rvp::CodecMode::Basic));
  REQUIRE(dec.beat_lengths.size() == enc.beats.size());
  for (std::size_t i = 0; i < dec.beat_lengths.size(); ++i) {
    CHECK(dec.beat_lengths[i] == enc.beats[i].length);
    CHECK(dec.beat_dims[i] == enc.beats[i].dim_index);
  }

  const double total_prd = concat_prd(record, enc, dec);
  CHECK(total_prd < 30.0);
  MESSAGE("basic mode PRD ", total_prd, "% at ", enc.bytes.size(), " bytes");
}

TEST_CASE("identical parameters give identical streams") {
  rvp::Rng rng(80);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(5, 280, {}, 0.04, rng, &truth);

  rvp::EncodeParams params;
  params.swarm_size = 5;
  params.iterations = 2;
  params.rng_seed = 7;
  const auto a = rvp::encode_record(record, truth, params);
  const auto b = rvp::encode_record(record, truth, params);
  CHECK(a.bytes == b.bytes);

  params.rng_seed = 8;
  const auto c = rvp::encode_record(record, truth, params);
  CHECK(c.bytes.size() > 0);  // a different seed still encodes fine
}

TEST_CASE("aligned mode carries a template and stays decodable") {
  rvp::Rng rng(81);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(8, 300, {}, 0.05, rng, &truth);

  rvp::EncodeParams params;
  params.mode = rvp::CodecMode::Aligned;
  params.swarm_size = 6;
  params.iterations = 3;
  params.rng_seed = 42;
  const auto enc = rvp::encode_record(record, truth, params);
  REQUIRE(enc.layout.template_beat.has_value());
  CHECK(enc.layout.template_beat->dim_index == 30);

  const auto dec = rvp::decode_record(enc.bytes);
  CHECK((dec.mode == rvp::CodecMode::Aligned));
  const double total_prd = concat_prd(record, enc, dec);
  CHECK(total_prd < 30.0);
  MESSAGE("aligned mode PRD ", total_prd, "% at ", enc.bytes.size(), " bytes");
}

TEST_CASE("a constant-line template reduces aligned mode to basic mode") {
  rvp::Rng rng(82);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(6, 280, {}, 0.05, rng, &truth);

  rvp::EncodeParams params;
  params.swarm_size = 5;
  params.iterations = 2;
  params.rng_seed = 11;
  const auto basic = rvp::encode_record(record, truth, params);

  std::size_t max_len = 0;
  for (const auto& d : basic.beats) max_len = std::max(max_len, d.length);
  CompressedBeat zero_template;
  zero_template.dim_index = 0;
  zero_template.length = static_cast<std::uint16_t>(max_len);
  zero_template.f0_code = 0;
  zero_template.flast_code = 0;  // equal endpoint codes: the crop cancels exactly
  zero_template.norm_code = 0;

  params.mode = rvp::CodecMode::Aligned;
  const auto aligned =
      rvp::encode_record_with_template(record, truth, params, zero_template);

  CHECK(aligned.layout.amp_min == basic.layout.amp_min);
  CHECK(aligned.layout.amp_max == basic.layout.amp_max);
  CHECK(aligned.layout.norm_max == basic.layout.norm_max);
  REQUIRE(aligned.layout.beats.size() == basic.layout.beats.size());
  for (std::size_t i = 0; i < basic.layout.beats.size(); ++i)
    CHECK(beats_equal(aligned.layout.beats[i], basic.layout.beats[i]));
}

TEST_CASE("the template override is validated") {
  rvp::Rng rng(83);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(4, 280, {}, 0.0, rng, &truth);
  rvp::EncodeParams params;
  params.swarm_size = 4;
  params.iterations = 1;

  CompressedBeat tmpl;
  tmpl.dim_index = 0;
  tmpl.length = 280;

  // Basic mode cannot take a template.
  CHECK_THROWS_AS(rvp::encode_record_with_template(record, truth, params, tmpl),
                  rvp::ValidationError);

  params.mode = rvp::CodecMode::Aligned;
  tmpl.dim_index = 3;
  CHECK_THROWS_AS(rvp::encode_record_with_template(record, truth, params, tmpl),
                  rvp::ValidationError);
}

TEST_CASE("parallel encoding stays deterministic") {
  rvp::Rng rng(84);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(5, 280, {}, 0.04, rng, &truth);

  rvp::EncodeParams params;
  params.swarm_size = 4;
  params.iterations = 2;
  params.rng_seed = 3;
  params.parallel = true;
  const auto a = rvp::encode_record(record, truth, params);
  const auto b = rvp::encode_record(record, truth, params);
  CHECK(a.bytes == b.bytes);
  CHECK_NOTHROW(rvp::decode_record(a.bytes));
}

TEST_CASE("encode parameters are validated") {
  rvp::Rng rng(85);
  rvp::BeatAnnotations truth;
  rvp::Record record = rvp::synth_record(4, 280, {}, 0.0, rng, &truth);

  rvp::EncodeParams params;
  params.alpha = 0.0;
  CHECK_THROWS_AS(rvp::encode_record(record, truth, params), rvp::ValidationError);
  params.alpha = 1.5;
  CHECK_THROWS_AS(rvp::encode_record(record, truth, params), rvp::ValidationError);
  params.alpha = 0.5;

  params.swarm_size = 1;
  CHECK_THROWS_AS(rvp::encode_record(record, truth, params), rvp::ValidationError);
  params.swarm_size = 4;

  params.iterations = 0;
  CHECK_THROWS_AS(rvp::encode_record(record, truth, params), rvp::ValidationError);
  params.iterations = 1;

  record.samples[10] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rvp::encode_record(record, truth, params), rvp::ValidationError);
}

TEST_CASE("decoded statistics mirror the source record") {
  rvp::Rng rng(86);
  rvp::BeatAnnotations truth;
  const rvp::Record record = rvp::synth_record(5, 280, {}, 0.04, rng, &truth);

  double mean = 0.0;
  for (double v : record.samples) mean += v;
  mean /= static_cast<double>(record.samples.size());
  double var = 0.0;
  for (double v : record.samples) var += (v - mean) * (v - mean);
  var /= static_cast<double>(record.samples.size());

  rvp::EncodeParams params;
  params.swarm_size = 4;
  params.iterations = 1;
  const auto enc = rvp::encode_record(record, truth, params);
  const auto dec = rvp::decode_record(enc.bytes);
  CHECK(dec.mean == static_cast<float>(mean));
  CHECK(dec.stddev == static_cast<float>(std::sqrt(var)));
}

}  // TEST_SUITE
