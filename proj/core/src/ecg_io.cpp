#include "rvp/ecg_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rvp/errors.hpp"
#include "rvp/log.hpp"

namespace rvp {
namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

// Parses "123.4" or "12,123.4"; returns false when the line is not a clean
// number (or index,number) with nothing but whitespace left over.
bool parse_sample_line(const std::string& line, double* value) {
  const char* s = line.c_str();
  char* end = nullptr;
  double first = std::strtod(s, &end);
  if (end == s) return false;
  while (*end == ' ' || *end == '\t') ++end;
  if (*end == ',') {
    ++end;
    const char* second_start = end;
    double second = std::strtod(second_start, &end);
    if (end == second_start) return false;
    first = second;
  }
  while (*end != '\0') {
    if (!std::isspace(static_cast<unsigned char>(*end))) return false;
    ++end;
  }
  *value = first;
  return true;
}

}  // namespace

Record read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Record rec;
  rec.name = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;
    if (line[0] == '#') {
      double rate = 0;
      int bits = 0;
      if (std::sscanf(line.c_str(), "# rate=%lf bits=%d", &rate, &bits) == 2) {
        if (rate <= 0 || bits <= 0)
          throw ParseError("invalid rate/bits metadata", line_no);
        rec.sampling_rate = rate;
        rec.resolution_bits = bits;
      }
      continue;
    }
    double value = 0;
    if (!parse_sample_line(line, &value))
      throw ParseError("malformed sample line '" + line + "'", line_no);
    rec.samples.push_back(value);
  }
  if (rec.samples.empty()) throw EmptyFile(path);
  return rec;
}

void write_csv(const std::string& path, const Record& record) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  char buf[64];
  std::snprintf(buf, sizeof buf, "# rate=%.10g bits=%d\n",
                record.sampling_rate, record.resolution_bits);
  out << buf;
  for (double v : record.samples) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out << buf;
  }
  if (!out) throw IoError("write failed for " + path);
}

BeatAnnotations read_annotations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  BeatAnnotations ann;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line[0] == '#') continue;
    const char* s = line.c_str();
    char* end = nullptr;
    long long idx = std::strtoll(s, &end, 10);
    if (end == s || idx < 0)
      throw ParseError("malformed annotation line '" + line + "'", line_no);
    while (*end != '\0') {
      if (!std::isspace(static_cast<unsigned char>(*end)))
        throw ParseError("malformed annotation line '" + line + "'", line_no);
      ++end;
    }
    ann.qrs_indices.push_back(static_cast<std::size_t>(idx));
  }
  std::sort(ann.qrs_indices.begin(), ann.qrs_indices.end());
  ann.qrs_indices.erase(
      std::unique(ann.qrs_indices.begin(), ann.qrs_indices.end()),
      ann.qrs_indices.end());
  return ann;
}

void write_annotations_csv(const std::string& path,
                           const BeatAnnotations& ann) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (std::size_t idx : ann.qrs_indices) out << idx << "\n";
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::uint8_t> pack_212(const std::vector<int>& ch0,
                                   const std::vector<int>& ch1) {
  if (ch0.size() != ch1.size())
    throw ValidationError("pack_212: channel lengths differ");
  std::vector<std::uint8_t> bytes;
  bytes.reserve(ch0.size() * 3);
  for (std::size_t i = 0; i < ch0.size(); ++i) {
    const int a = ch0[i];
    const int b = ch1[i];
    if (a < -2048 || a > 2047 || b < -2048 || b > 2047)
      throw ValidationError("pack_212: sample outside 12-bit range");
    const unsigned ua = static_cast<unsigned>(a) & 0xFFFu;
    const unsigned ub = static_cast<unsigned>(b) & 0xFFFu;
    bytes.push_back(static_cast<std::uint8_t>(ua & 0xFFu));
    bytes.push_back(
        static_cast<std::uint8_t>(((ua >> 8) & 0x0Fu) | (((ub >> 8) & 0x0Fu) << 4)));
    bytes.push_back(static_cast<std::uint8_t>(ub & 0xFFu));
  }
  return bytes;
}

void unpack_212(const std::vector<std::uint8_t>& bytes, std::vector<int>& ch0,
                std::vector<int>& ch1) {
  if (bytes.size() % 3 != 0)
    throw TruncatedData("data length is not a multiple of 3 bytes");
  const std::size_t groups = bytes.size() / 3;
  ch0.resize(groups);
  ch1.resize(groups);
  for (std::size_t i = 0; i < groups; ++i) {
    const unsigned b0 = bytes[3 * i];
    const unsigned b1 = bytes[3 * i + 1];
    const unsigned b2 = bytes[3 * i + 2];
    int s1 = static_cast<int>(b0 | ((b1 & 0x0Fu) << 8));
    int s2 = static_cast<int>(b2 | ((b1 & 0xF0u) << 4));
    if (s1 >= 2048) s1 -= 4096;
    if (s2 >= 2048) s2 -= 4096;
    ch0[i] = s1;
    ch1[i] = s2;
  }
}

namespace {

struct SignalSpec {
  std::string file;
  int format = 0;
  double gain = 200.0;
  int baseline = 0;
  int adc_res = 12;
  int adc_zero = 0;
  std::string description;
};

// Gain fields look like "200", "200(1024)", or "200(1024)/mV": value,
// optional baseline in parentheses, optional unit suffix.
void parse_gain_field(const std::string& field, SignalSpec* spec,
                      bool* baseline_set) {
  const char* s = field.c_str();
  char* end = nullptr;
  spec->gain = std::strtod(s, &end);
  if (end == s || spec->gain == 0) throw ParseError("bad gain '" + field + "'", 0);
  if (*end == '(') {
    const char* b = end + 1;
    long base = std::strtol(b, &end, 10);
    if (end == b || *end != ')')
      throw ParseError("bad baseline in gain '" + field + "'", 0);
    spec->baseline = static_cast<int>(base);
    *baseline_set = true;
  }
}

}  // namespace

std::vector<Record> read_wfdb_212(const std::string& header_path,
                                  const std::string& dat_path) {
  std::ifstream hea(header_path);
  if (!hea) throw IoError("cannot open " + header_path);

  std::string line;
  std::string record_name;
  int nsig = 0;
  double fs = 250.0;
  long long declared_samples = -1;
  // First non-comment line: "name nsig fs [nsamples ...]".
  while (std::getline(hea, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line[0] == '#') continue;
    std::istringstream ss(line);
    if (!(ss >> record_name >> nsig)) throw ParseError("bad header line", 1);
    std::string name_part = record_name;
    const auto slash = name_part.find('/');
    if (slash != std::string::npos) name_part = name_part.substr(0, slash);
    record_name = name_part;
    if (!(ss >> fs)) fs = 250.0;
    if (!(ss >> declared_samples)) declared_samples = -1;
    break;
  }
  if (nsig != 2)
    throw UnsupportedFormat("expected 2 signals, header declares " +
                            std::to_string(nsig));

  std::vector<SignalSpec> specs;
  while (std::getline(hea, line) && static_cast<int>(specs.size()) < nsig) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line) || line[0] == '#') continue;
    std::istringstream ss(line);
    SignalSpec spec;
    std::string gain_field;
    if (!(ss >> spec.file >> spec.format >> gain_field))
      throw ParseError("bad signal line '" + line + "'", 0);
    bool baseline_set = false;
    parse_gain_field(gain_field, &spec, &baseline_set);
    int checksum = 0, blocksize = 0, init_value = 0;
    if (ss >> spec.adc_res >> spec.adc_zero >> init_value >> checksum >>
        blocksize) {
      std::string word;
      while (ss >> word) {
        if (!spec.description.empty()) spec.description += ' ';
        spec.description += word;
      }
    }
    if (!baseline_set) spec.baseline = spec.adc_zero;
    if (spec.format != 212)
      throw UnsupportedFormat("signal format " + std::to_string(spec.format));
    specs.push_back(spec);
  }
  if (static_cast<int>(specs.size()) != nsig)
    throw ParseError("header ends before all signal lines", 0);

  std::ifstream dat(dat_path, std::ios::binary);
  if (!dat) throw IoError("cannot open " + dat_path);
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(dat),
                                  std::istreambuf_iterator<char>()};
  if (bytes.empty()) throw EmptyFile(dat_path);

  std::vector<int> raw0, raw1;
  unpack_212(bytes, raw0, raw1);
  if (declared_samples > 0 &&
      static_cast<long long>(raw0.size()) < declared_samples) {
    log_warn("%s: header declares %lld samples, file holds %zu",
             dat_path.c_str(), declared_samples, raw0.size());
  }
  if (declared_samples > 0 &&
      static_cast<long long>(raw0.size()) > declared_samples) {
    raw0.resize(static_cast<std::size_t>(declared_samples));
    raw1.resize(static_cast<std::size_t>(declared_samples));
  }

  std::vector<Record> records(2);
  const std::vector<int>* raw[2] = {&raw0, &raw1};
  for (int c = 0; c < 2; ++c) {
    Record& rec = records[c];
    rec.sampling_rate = fs;
    rec.resolution_bits = specs[c].adc_res;
    rec.name = record_name;
    if (!specs[c].description.empty()) rec.name += ":" + specs[c].description;
    rec.samples.resize(raw[c]->size());
    for (std::size_t i = 0; i < raw[c]->size(); ++i)
      rec.samples[i] = ((*raw[c])[i] - specs[c].baseline) / specs[c].gain;
  }
  return records;
}

void write_wfdb_212(const std::string& header_path, const std::string& dat_path,
                    const Record& ch0, const Record& ch1, double gain,
                    int baseline) {
  if (ch0.samples.size() != ch1.samples.size())
    throw ValidationError("write_wfdb_212: channel lengths differ");
  if (gain == 0) throw ValidationError("write_wfdb_212: zero gain");

  std::string record_name = "rec";
  {
    // Derive the record name from the header file name, minus directory
    // and extension, so the header refers to the .dat by a matching stem.
    std::string base = header_path;
    const auto slash = base.find_last_of("/\\");
    if (slash != std::string::npos) base = base.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
    if (!base.empty()) record_name = base;
  }
  std::string dat_name = dat_path;
  {
    const auto slash = dat_name.find_last_of("/\\");
    if (slash != std::string::npos) dat_name = dat_name.substr(slash + 1);
  }

  auto to_raw = [&](const Record& rec, std::vector<int>& out) {
    out.resize(rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
      const long v = std::lround(rec.samples[i] * gain) + baseline;
      out[i] = static_cast<int>(std::clamp(v, -2048L, 2047L));
    }
  };
  std::vector<int> raw0, raw1;
  to_raw(ch0, raw0);
  to_raw(ch1, raw1);
  const std::vector<std::uint8_t> bytes = pack_212(raw0, raw1);

  std::ofstream dat(dat_path, std::ios::binary);
  if (!dat) throw IoError("cannot open " + dat_path + " for writing");
  dat.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!dat) throw IoError("write failed for " + dat_path);

  std::ofstream hea(header_path);
  if (!hea) throw IoError("cannot open " + header_path + " for writing");
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s 2 %.10g %zu\n", record_name.c_str(),
                ch0.sampling_rate, raw0.size());
  hea << buf;
  for (const Record* rec : {&ch0, &ch1}) {
    std::snprintf(buf, sizeof buf, "%s 212 %.10g(%d) %d %d 0 0 0 ch\n",
                  dat_name.c_str(), gain, baseline, rec->resolution_bits,
                  baseline);
    hea << buf;
  }
  if (!hea) throw IoError("write failed for " + header_path);
}

namespace {

// Centered moving average with an odd window; edges use the in-range portion
// of the window so the output keeps the input's length and alignment.
std::vector<double> centered_mean(const std::vector<double>& x, int half) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> prefix(n + 1, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> out(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

int odd_window(double samples) {
  int w = static_cast<int>(std::lround(samples));
  if (w < 1) w = 1;
  if (w % 2 == 0) ++w;
  return w;
}

}  // namespace

BeatAnnotations detect_qrs(const Record& record) {
  const double fs = record.sampling_rate;
  if (fs < 100.0 || fs > 1000.0)
    throw ValidationError("detect_qrs: sampling rate " + std::to_string(fs) +
                          " outside [100, 1000] Hz");
  BeatAnnotations ann;
  const std::size_t n = record.samples.size();
  if (n < static_cast<std::size_t>(fs * 0.5)) return ann;

  // Difference of two centered means: passes roughly the 5-15 Hz band where
  // QRS energy concentrates, with zero phase shift.
  const int narrow = odd_window(fs / 15.0) / 2;
  const int wide = odd_window(fs / 5.0) / 2;
  const std::vector<double> ma_n = centered_mean(record.samples, narrow);
  const std::vector<double> ma_w = centered_mean(record.samples, wide);
  std::vector<double> band(n);
  for (std::size_t i = 0; i < n; ++i) band[i] = ma_n[i] - ma_w[i];

  std::vector<double> squared(n);
  for (std::size_t i = 0; i < n; ++i) squared[i] = band[i] * band[i];
  const int mwi_half = odd_window(fs * 0.150) / 2;
  const std::vector<double> mwi = centered_mean(squared, mwi_half);

  // Threshold bootstrap from the first two seconds (or the whole record).
  const std::size_t init_len =
      std::min(n, static_cast<std::size_t>(std::lround(fs * 2.0)));
  double spk = 0.0, npk = 0.0;
  for (std::size_t i = 0; i < init_len; ++i) {
    spk = std::max(spk, mwi[i]);
    npk += mwi[i];
  }
  npk /= static_cast<double>(init_len);
  spk *= 0.75;
  double threshold = npk + 0.25 * (spk - npk);

  const std::ptrdiff_t refractory =
      static_cast<std::ptrdiff_t>(std::lround(fs * 0.200));
  const std::ptrdiff_t search_half =
      static_cast<std::ptrdiff_t>(std::lround(fs * 0.100));
  const std::ptrdiff_t twave_window =
      static_cast<std::ptrdiff_t>(std::lround(fs * 0.360));
  std::ptrdiff_t last_peak = -refractory;
  double last_slope = 0.0;

  // Steepest band-pass transition near a candidate; T waves are much flatter
  // than the QRS that precedes them.
  const auto max_slope = [&](std::ptrdiff_t center) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(1, center - search_half);
    const std::ptrdiff_t hi =
        std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 2, center + search_half);
    double s = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j)
      s = std::max(s, 0.5 * std::abs(band[j + 1] - band[j - 1]));
    return s;
  };

  std::vector<std::size_t> picks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(mwi[i] > mwi[i - 1] && mwi[i] >= mwi[i + 1])) continue;
    const double peak = mwi[i];
    if (peak > threshold &&
        static_cast<std::ptrdiff_t>(i) - last_peak > refractory) {
      // A candidate hard on the heels of the previous beat with under half
      // its slope is a T wave, not a new complex.
      const double slope = max_slope(static_cast<std::ptrdiff_t>(i));
      if (static_cast<std::ptrdiff_t>(i) - last_peak <= twave_window &&
          last_slope > 0.0 && slope < 0.5 * last_slope) {
        npk = 0.125 * peak + 0.875 * npk;
        threshold = npk + 0.25 * (spk - npk);
        continue;
      }
      spk = 0.125 * peak + 0.875 * spk;
      last_peak = static_cast<std::ptrdiff_t>(i);
      last_slope = slope;
      // Refine to the strongest band-pass response around the integrator peak.
      const std::ptrdiff_t lo =
          std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - search_half);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
          static_cast<std::ptrdiff_t>(n) - 1,
          static_cast<std::ptrdiff_t>(i) + search_half);
      std::ptrdiff_t best = lo;
      for (std::ptrdiff_t j = lo; j <= hi; ++j)
        if (std::abs(band[j]) > std::abs(band[best])) best = j;
      picks.push_back(static_cast<std::size_t>(best));
    } else {
      npk = 0.125 * peak + 0.875 * npk;
    }
    threshold = npk + 0.25 * (spk - npk);
  }

  std::sort(picks.begin(), picks.end());
  // Two integrator peaks can refine into the same neighbourhood; keep the
  // stronger of any pair closer than the refractory period.
  std::vector<std::size_t> unique;
  for (std::size_t idx : picks) {
    if (!unique.empty() &&
        static_cast<std::ptrdiff_t>(idx) -
                static_cast<std::ptrdiff_t>(unique.back()) <
            refractory) {
      if (std::abs(band[idx]) > std::abs(band[unique.back()]))
        unique.back() = idx;
    } else {
      unique.push_back(idx);
    }
  }
  ann.qrs_indices = std::move(unique);
  return ann;
}

std::vector<double> synth_beat(std::size_t length, const BeatMorphology& morph,
                               Rng& rng) {
  if (length == 0) throw ValidationError("synth_beat: zero length");
  std::vector<double> beat(length, 0.0);
  const double L = static_cast<double>(length);
  struct Wave {
    double amp, center, width;
  };
  const Wave waves[3] = {{morph.p_amp, morph.p_center, morph.p_width},
                         {morph.qrs_amp, morph.qrs_center, morph.qrs_width},
                         {morph.t_amp, morph.t_center, morph.t_width}};
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) / L;
    double v = 0.0;
    for (const Wave& w : waves) {
      const double d = (t - w.center) / w.width;
      v += w.amp * std::exp(-0.5 * d * d);
    }
    if (morph.noise_sigma > 0) v += morph.noise_sigma * rng.gauss();
    beat[i] = v;
  }
  return beat;
}

Record synth_record(std::size_t beats, std::size_t beat_length,
                    const BeatMorphology& morph, double jitter, Rng& rng,
                    BeatAnnotations* truth) {
  if (beats == 0) throw ValidationError("synth_record: zero beats");
  Record rec;
  rec.name = "synthetic";
  if (truth) truth->qrs_indices.clear();
  for (std::size_t b = 0; b < beats; ++b) {
    double scale = 1.0;
    if (jitter > 0) scale += jitter * (2.0 * rng.u01() - 1.0);
    const std::size_t len = std::max<std::size_t>(
        32, static_cast<std::size_t>(std::lround(scale * beat_length)));
    const std::vector<double> beat = synth_beat(len, morph, rng);
    const std::size_t start = rec.samples.size();
    if (truth) {
      truth->qrs_indices.push_back(
          start + static_cast<std::size_t>(morph.qrs_center * len));
    }
    rec.samples.insert(rec.samples.end(), beat.begin(), beat.end());
  }
  return rec;
}

}  // namespace rvp
