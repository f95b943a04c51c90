#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rvp/rng.hpp"

namespace rvp {

// A single-channel signal in physical units (millivolts for real recordings;
// synthetic data is unitless).
struct Record {
  std::vector<double> samples;
  double sampling_rate = 360.0;
  int resolution_bits = 11;
  std::string name;
};

struct BeatAnnotations {
  std::vector<std::size_t> qrs_indices;  // sorted, unique
};

// CSV record format: one sample per line, either "value" or "index,value".
// An optional metadata line "# rate=<float> bits=<int>" sets sampling_rate
// and resolution_bits; other '#' lines are comments. Blank lines are skipped.
// Throws ParseError (with 1-based line number) on malformed data, EmptyFile
// when no samples remain.
Record read_csv(const std::string& path);
void write_csv(const std::string& path, const Record& record);

// Annotation CSV: one sample index per line ('#' comments and blanks allowed).
// Indices are sorted and deduplicated on load.
BeatAnnotations read_annotations_csv(const std::string& path);
void write_annotations_csv(const std::string& path, const BeatAnnotations& ann);

// Two 12-bit samples packed into 3 bytes: s1 = b0 | (b1 & 0x0F) << 8,
// s2 = b2 | (b1 & 0xF0) << 4, each in two's complement. Raw values must fit
// in 12 bits.
std::vector<std::uint8_t> pack_212(const std::vector<int>& ch0,
                                   const std::vector<int>& ch1);
void unpack_212(const std::vector<std::uint8_t>& bytes, std::vector<int>& ch0,
                std::vector<int>& ch1);

// Reads a two-channel format-212 recording given its text header; returns one
// Record per channel, converted to physical units via each channel's gain and
// baseline. Throws UnsupportedFormat for other layouts, TruncatedData when the
// data file is not a whole number of 3-byte groups, IoError when either file
// cannot be read.
std::vector<Record> read_wfdb_212(const std::string& header_path,
                                  const std::string& dat_path);

// Write-side counterpart used to build test fixtures: converts both channels
// back to raw integers with the given gain/baseline and emits header + data.
void write_wfdb_212(const std::string& header_path, const std::string& dat_path,
                    const Record& ch0, const Record& ch1, double gain = 200.0,
                    int baseline = 1024);

// QRS detection: moving-average band-pass (difference of two centered means
// approximating a 5-15 Hz band), squaring, a centered 150 ms moving-window
// integral, and an adaptive signal/noise threshold with a 200 ms refractory
// period. Candidates within 360 ms of the previous beat are rejected as
// T waves when their steepest band-pass slope is under half the previous
// beat's. Each detection is refined to the largest band-pass magnitude
// within 100 ms. Returns an empty list when nothing crosses the threshold.
BeatAnnotations detect_qrs(const Record& record);

// Sum-of-Gaussians beat template for synthetic records: P and T waves plus a
// narrow QRS complex, with optional additive white noise.
struct BeatMorphology {
  double p_amp = 0.15;
  double p_center = 0.20;  // as a fraction of the beat length
  double p_width = 0.025;
  double qrs_amp = 1.0;
  double qrs_center = 0.36;
  double qrs_width = 0.008;
  double t_amp = 0.3;
  double t_center = 0.62;
  double t_width = 0.04;
  double noise_sigma = 0.0;
};

std::vector<double> synth_beat(std::size_t length, const BeatMorphology& morph,
                               Rng& rng);

// Concatenates `beats` copies of the template with per-beat length jitter
// (+/- jitter fraction) and returns the record plus ground-truth QRS indices.
Record synth_record(std::size_t beats, std::size_t beat_length,
                    const BeatMorphology& morph, double jitter, Rng& rng,
                    BeatAnnotations* truth = nullptr);

}  // namespace rvp
