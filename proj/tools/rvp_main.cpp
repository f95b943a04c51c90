// Command-line front end: compress / decompress / evaluate / inspect.
//
// Exit codes: 0 success, 1 I/O failure, 2 invalid input or options,
// 3 encoding failure. Reports go to stdout; diagnostics go to stderr.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rvp/codec.hpp"
#include "rvp/ecg_io.hpp"
#include "rvp/errors.hpp"
#include "rvp/log.hpp"
#include "rvp/metrics.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitEncoding = 3;

int error_exit_code(const std::exception& e) {
  if (dynamic_cast<const rvp::AllEvaluationsFailed*>(&e) ||
      dynamic_cast<const rvp::RankDeficient*>(&e) ||
      dynamic_cast<const rvp::NearSingularity*>(&e))
    return kExitEncoding;
  if (dynamic_cast<const rvp::IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const rvp::Error*>(&e)) return kExitValidation;
  return kExitIo;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

rvp::Record read_signal(const std::string& path, int channel) {
  if (ends_with(path, ".hea")) {
    const std::string dat = path.substr(0, path.size() - 4) + ".dat";
    std::vector<rvp::Record> channels = rvp::read_wfdb_212(path, dat);
    if (channel < 0 || channel >= static_cast<int>(channels.size()))
      throw rvp::ValidationError("channel " + std::to_string(channel) +
                                 " not present");
    return std::move(channels[static_cast<std::size_t>(channel)]);
  }
  return rvp::read_csv(path);
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rvp::IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rvp::IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw rvp::IoError("write failed for " + path);
}

rvp::BeatAnnotations load_annotations(const rvp::Record& record,
                                      const std::string& path, bool detect) {
  if (!path.empty() && detect)
    throw rvp::ValidationError("--annotations and --detect are exclusive");
  if (!path.empty()) return rvp::read_annotations_csv(path);
  if (detect) return rvp::detect_qrs(record);
  throw rvp::ValidationError("provide --annotations FILE or --detect");
}

void emit_report(const rvp::QualityReport& report, bool csv,
                 const std::string& report_path) {
  std::string text;
  if (csv) {
    text = rvp::report_csv_header() + "\n" + rvp::report_csv_row(report) + "\n";
  } else {
    text = rvp::report_json(report) + "\n";
  }
  std::fputs(text.c_str(), stdout);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw rvp::IoError("cannot open " + report_path + " for writing");
    out << text;
    if (!out) throw rvp::IoError("write failed for " + report_path);
  }
}

// Original-signal slices matching each encoded beat, concatenated.
std::vector<double> original_concat(const rvp::Record& record,
                                    const std::vector<rvp::BeatDiagnostics>& beats) {
  std::vector<double> out;
  for (const auto& b : beats)
    out.insert(out.end(),
               record.samples.begin() + static_cast<std::ptrdiff_t>(b.start),
               record.samples.begin() + static_cast<std::ptrdiff_t>(b.start + b.length));
  return out;
}

rvp::QualityReport build_report(const std::vector<double>& original,
                                const std::vector<double>& reconstructed,
                                double original_bits, double compressed_bits) {
  rvp::QualityReport report;
  report.prd = rvp::prd(original, reconstructed);
  report.prdn = rvp::prdn(original, reconstructed);
  report.wwprd = rvp::wwprd(original, reconstructed);
  if (compressed_bits > 0.0) {
    report.cr = original_bits / compressed_bits;
    report.qs = report.prd > 0.0 ? report.cr / report.prd
                                 : std::numeric_limits<double>::infinity();
    report.qsn = report.prdn > 0.0 ? report.cr / report.prdn
                                   : std::numeric_limits<double>::infinity();
  } else {
    report.cr = std::numeric_limits<double>::quiet_NaN();
    report.qs = std::numeric_limits<double>::quiet_NaN();
    report.qsn = std::numeric_limits<double>::quiet_NaN();
  }
  report.prdn_class = rvp::classify(report.prdn, rvp::ClassKind::Prdn);
  report.wwprd_class = rvp::classify(report.wwprd, rvp::ClassKind::Wwprd);
  report.rho_xy = std::numeric_limits<double>::quiet_NaN();
  report.sigma_rr = std::numeric_limits<double>::quiet_NaN();
  return report;
}

void add_regularity(rvp::QualityReport& report, const rvp::Record& record,
                    const rvp::BeatAnnotations& annotations) {
  const std::vector<rvp::BeatSegment> segs = rvp::segment(record, annotations);
  if (segs.size() < 2) return;
  std::vector<std::vector<double>> beats;
  beats.reserve(segs.size());
  for (const auto& s : segs)
    beats.emplace_back(
        record.samples.begin() + static_cast<std::ptrdiff_t>(s.start),
        record.samples.begin() +
            static_cast<std::ptrdiff_t>(s.start + s.samples.size()));
  const rvp::RegularityStats stats = rvp::regularity_analysis(beats, annotations);
  report.rho_xy = stats.rho_xy;
  report.sigma_rr = stats.sigma_rr / record.sampling_rate;  // seconds
}

struct CompressArgs {
  std::string input, output, annotations, report_path;
  std::string mode = "basic";
  double alpha = 0.5;
  int swarm = 30;
  int iters = 20;
  std::uint64_t seed = 0;
  int channel = 0;
  bool detect = false;
  bool csv = false;
  bool parallel = false;
};

int cmd_compress(const CompressArgs& args) {
  const rvp::Record record = read_signal(args.input, args.channel);
  const rvp::BeatAnnotations ann =
      load_annotations(record, args.annotations, args.detect);

  rvp::EncodeParams params;
  params.mode = args.mode == "aligned" ? rvp::CodecMode::Aligned
                                       : rvp::CodecMode::Basic;
  params.alpha = args.alpha;
  params.swarm_size = args.swarm;
  params.iterations = args.iters;
  params.rng_seed = args.seed;
  params.parallel = args.parallel;

  const rvp::EncodeResult result = rvp::encode_record(record, ann, params);
  write_bytes(args.output, result.bytes);
  rvp::log_info("%s: %zu beats, %zu bytes", args.output.c_str(),
                result.beats.size(), result.bytes.size());

  const rvp::DecodedRecord decoded = rvp::decode_record(result.bytes);
  const std::vector<double> original = original_concat(record, result.beats);

  rvp::QualityReport report = build_report(
      original, decoded.samples,
      static_cast<double>(record.samples.size()) * record.resolution_bits,
      static_cast<double>(result.bytes.size()) * 8.0);
  add_regularity(report, record, ann);
  emit_report(report, args.csv, args.report_path);
  return kExitOk;
}

struct DecompressArgs {
  std::string input, output;
  double rate = 360.0;
  int bits = 12;
};

int cmd_decompress(const DecompressArgs& args) {
  const rvp::DecodedRecord decoded = rvp::decode_record(read_bytes(args.input));
  rvp::Record record;
  // Samples before the first beat window are not coded; hold the first
  // decoded value across them so the output lines up with the original
  // sample indices (and with any annotation file for it).
  if (!decoded.samples.empty())
    record.samples.assign(decoded.start_offset, decoded.samples.front());
  record.samples.insert(record.samples.end(), decoded.samples.begin(),
                        decoded.samples.end());
  record.sampling_rate = args.rate;
  record.resolution_bits = args.bits;
  rvp::write_csv(args.output, record);
  rvp::log_info("%s: %u beats, %zu samples (%zu lead-in)", args.output.c_str(),
                decoded.beat_count, record.samples.size(),
                static_cast<std::size_t>(decoded.start_offset));
  return kExitOk;
}

struct EvaluateArgs {
  std::string original, reconstructed, compressed, annotations, report_path;
  int channel = 0;
  bool detect = false;
  bool truncate = false;
  bool csv = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const rvp::Record original = read_signal(args.original, args.channel);
  const rvp::Record reconstructed = read_signal(args.reconstructed, args.channel);
  std::vector<double> f = original.samples;
  std::vector<double> g = reconstructed.samples;
  if (f.size() != g.size()) {
    if (!args.truncate)
      throw rvp::ValidationError(
          "signal lengths differ (" + std::to_string(f.size()) + " vs " +
          std::to_string(g.size()) + "); pass --truncate to compare the overlap");
    const std::size_t n = std::min(f.size(), g.size());
    f.resize(n);
    g.resize(n);
  }

  double compressed_bits = 0.0;
  if (!args.compressed.empty())
    compressed_bits = static_cast<double>(read_bytes(args.compressed).size()) * 8.0;

  rvp::QualityReport report = build_report(
      f, g,
      static_cast<double>(original.samples.size()) * original.resolution_bits,
      compressed_bits);
  if (!args.annotations.empty() || args.detect) {
    const rvp::BeatAnnotations ann =
        load_annotations(original, args.annotations, args.detect);
    add_regularity(report, original, ann);
  }
  emit_report(report, args.csv, args.report_path);
  return kExitOk;
}

int cmd_inspect(const std::string& input) {
  const std::vector<std::uint8_t> bytes = read_bytes(input);
  const rvp::CompressedRecord layout = rvp::parse(bytes);

  const std::size_t expected_bits = rvp::compressed_bits(layout);
  const std::size_t expected_bytes = (expected_bits + 7) / 8;
  if (expected_bytes != bytes.size())
    throw rvp::ValidationError("size accounting mismatch: expected " +
                               std::to_string(expected_bytes) + " bytes, file has " +
                               std::to_string(bytes.size()));

  std::map<int, int> histogram;
  for (const auto& b : layout.beats) ++histogram[b.dim_index];

  nlohmann::json out;
  out["beat_count"] = layout.beat_count;
  out["mode"] = layout.mode == rvp::CodecMode::Aligned ? "aligned" : "basic";
  out["template_dim"] =
      layout.template_beat ? nlohmann::json(layout.template_beat->dim_index)
                           : nlohmann::json(nullptr);
  out["bits"] = expected_bits;
  out["bytes"] = bytes.size();
  out["mean"] = layout.mean;
  out["std"] = layout.stddev;
  out["amp_min"] = layout.amp_min;
  out["amp_max"] = layout.amp_max;
  out["norm_max"] = layout.norm_max;
  out["start_offset"] = layout.start_offset;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [dim, count] : histogram) hist[std::to_string(dim)] = count;
  out["dim_histogram"] = hist;
  std::fputs((out.dump() + "\n").c_str(), stdout);

  std::fprintf(stderr, "beats:        %u\n", layout.beat_count);
  std::fprintf(stderr, "mode:         %s\n",
               layout.mode == rvp::CodecMode::Aligned ? "aligned" : "basic");
  std::fprintf(stderr, "size:         %zu bytes (%zu bits of payload)\n",
               bytes.size(), expected_bits);
  std::fprintf(stderr, "mean/std:     %.6g / %.6g\n",
               static_cast<double>(layout.mean), static_cast<double>(layout.stddev));
  std::fprintf(stderr, "dim histogram:\n");
  for (const auto& [dim, count] : histogram)
    std::fprintf(stderr, "  %2d: %d\n", dim, count);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Rational variable-projection ECG codec.\n"
      "Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 encoding failure."};
  app.require_subcommand(1);

  CompressArgs cargs;
  CLI::App* compress = app.add_subcommand("compress", "Encode a record");
  compress->add_option("input", cargs.input, "Input signal (.csv or .hea)")->required();
  compress->add_option("output", cargs.output, "Compressed output file")->required();
  compress->add_option("--mode", cargs.mode, "basic | aligned")
      ->check(CLI::IsMember({"basic", "aligned"}));
  compress->add_option("--alpha", cargs.alpha, "Distortion weight in (0,1]");
  compress->add_option("--swarm", cargs.swarm, "Swarm size (default 30)");
  compress->add_option("--iters", cargs.iters, "Swarm iterations (default 20)");
  compress->add_option("--seed", cargs.seed, "RNG seed (default 0)");
  compress->add_option("--channel", cargs.channel, "Channel for .hea input");
  CLI::Option* cann =
      compress->add_option("--annotations", cargs.annotations, "QRS index CSV");
  compress->add_flag("--detect", cargs.detect, "Detect QRS peaks instead")
      ->excludes(cann);
  compress->add_option("--report", cargs.report_path, "Also write the report here");
  compress->add_flag("--csv", cargs.csv, "Emit the report as CSV");
  compress->add_flag("--parallel", cargs.parallel,
                     "Encode beats concurrently (disables warm starts; results "
                     "differ from sequential mode but stay deterministic)");

  DecompressArgs dargs;
  CLI::App* decompress = app.add_subcommand("decompress", "Decode to CSV");
  decompress->add_option("input", dargs.input, "Compressed input file")->required();
  decompress->add_option("output", dargs.output, "Output CSV")->required();
  decompress->add_option("--rate", dargs.rate, "Sampling rate for the CSV header");
  decompress->add_option("--bits", dargs.bits, "Resolution bits for the CSV header");

  EvaluateArgs eargs;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Compare two signals");
  evaluate->add_option("original", eargs.original, "Reference signal")->required();
  evaluate->add_option("reconstructed", eargs.reconstructed, "Signal under test")
      ->required();
  evaluate->add_option("--compressed", eargs.compressed,
                       "Compressed file (enables cr/qs/qsn)");
  CLI::Option* eann =
      evaluate->add_option("--annotations", eargs.annotations, "QRS index CSV");
  evaluate->add_flag("--detect", eargs.detect, "Detect QRS peaks on the original")
      ->excludes(eann);
  evaluate->add_option("--channel", eargs.channel, "Channel for .hea input");
  evaluate->add_flag("--truncate", eargs.truncate, "Compare the common prefix");
  evaluate->add_option("--report", eargs.report_path, "Also write the report here");
  evaluate->add_flag("--csv", eargs.csv, "Emit the report as CSV");

  std::string inspect_input;
  CLI::App* inspect = app.add_subcommand("inspect", "Summarize a compressed file");
  inspect->add_option("input", inspect_input, "Compressed input file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (compress->parsed()) return cmd_compress(cargs);
    if (decompress->parsed()) return cmd_decompress(dargs);
    if (evaluate->parsed()) return cmd_evaluate(eargs);
    if (inspect->parsed()) return cmd_inspect(inspect_input);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return error_exit_code(e);
  }
  return kExitValidation;
}
