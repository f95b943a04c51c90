#include "rvp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rvp/errors.hpp"

namespace rvp {
namespace {

double diff_norm(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() != g.size())
    throw ValidationError("signal lengths differ (" + std::to_string(f.size()) +
                          " vs " + std::to_string(g.size()) + ")");
  double sumsq = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f[i] - g[i];
    sumsq += d * d;
  }
  return std::sqrt(sumsq);
}

double norm(const std::vector<double>& f) {
  double sumsq = 0.0;
  for (double v : f) sumsq += v * v;
  return std::sqrt(sumsq);
}

double mean(const std::vector<double>& f) {
  double s = 0.0;
  for (double v : f) s += v;
  return f.empty() ? 0.0 : s / static_cast<double>(f.size());
}

}  // namespace

double prd(const std::vector<double>& f, const std::vector<double>& g) {
  const double num = diff_norm(f, g);
  const double den = norm(f);
  if (den == 0.0) throw ZeroDenominator("prd: reference signal has zero norm");
  return 100.0 * num / den;
}

double prdn(const std::vector<double>& f, const std::vector<double>& g) {
  const double num = diff_norm(f, g);
  const double mu = mean(f);
  double sumsq = 0.0;
  for (double v : f) sumsq += (v - mu) * (v - mu);
  const double den = std::sqrt(sumsq);
  if (den == 0.0)
    throw ZeroDenominator("prdn: reference signal is constant");
  return 100.0 * num / den;
}

const std::array<double, 6>& SubbandDecomposition::weights() {
  static const std::array<double, 6> w = {6.0 / 27.0, 9.0 / 27.0, 7.0 / 27.0,
                                          3.0 / 27.0, 1.0 / 27.0, 1.0 / 27.0};
  return w;
}

namespace {

// 4-tap orthogonal analysis pair.
const std::array<double, 4>& lowpass() {
  static const std::array<double, 4> h = [] {
    const double s3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    return std::array<double, 4>{(1.0 + s3) / d, (3.0 + s3) / d,
                                 (3.0 - s3) / d, (1.0 - s3) / d};
  }();
  return h;
}

const std::array<double, 4>& highpass() {
  static const std::array<double, 4> g = [] {
    const auto& h = lowpass();
    std::array<double, 4> out{};
    for (std::size_t k = 0; k < 4; ++k)
      out[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[3 - k];
    return out;
  }();
  return g;
}

// One periodic analysis step: approx[k] = sum_t h[t] x[(2k+t) mod n], same
// with g for the detail half.
void analysis_step(const std::vector<double>& x, std::vector<double>& approx,
                   std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  const auto& h = lowpass();
  const auto& g = highpass();
  approx.resize(half);
  detail.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t t = 0; t < 4; ++t) {
      const double v = x[(2 * k + t) % n];
      a += h[t] * v;
      d += g[t] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Pad to the next multiple of 32 by half-sample symmetric extension
// (..., x[n-2], x[n-1] | x[n-1], x[n-2], ...).
std::vector<double> pad_to_32(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const std::size_t padded = (n + 31) / 32 * 32;
  std::vector<double> out = x;
  out.resize(padded);
  for (std::size_t i = n; i < padded; ++i) out[i] = x[2 * n - 1 - i];
  return out;
}

}  // namespace

SubbandDecomposition wavelet_decompose_5(const std::vector<double>& signal) {
  if (signal.size() < 32)
    throw TooShort("subband split needs at least 32 samples, got " +
                   std::to_string(signal.size()));
  std::vector<double> current = pad_to_32(signal);
  SubbandDecomposition out;
  for (int level = 0; level < 5; ++level) {
    std::vector<double> approx, detail;
    analysis_step(current, approx, detail);
    out.bands[static_cast<std::size_t>(level)] = std::move(detail);
    current = std::move(approx);
  }
  out.bands[5] = std::move(current);
  return out;
}

double wwprd(const std::vector<double>& f, const std::vector<double>& g) {
  if (f.size() != g.size())
    throw ValidationError("signal lengths differ (" + std::to_string(f.size()) +
                          " vs " + std::to_string(g.size()) + ")");
  std::vector<double> fz = f, gz = g;
  const double fm = mean(fz), gm = mean(gz);
  for (double& v : fz) v -= fm;
  for (double& v : gz) v -= gm;

  const SubbandDecomposition df = wavelet_decompose_5(fz);
  const SubbandDecomposition dg = wavelet_decompose_5(gz);
  const auto& w = SubbandDecomposition::weights();

  double total = 0.0;
  for (std::size_t j = 0; j < 6; ++j) {
    const double den = norm(df.bands[j]);
    if (den == 0.0) throw ZeroBandEnergy(static_cast<int>(j));
    total += w[j] * diff_norm(df.bands[j], dg.bands[j]) / den;
  }
  return 100.0 * total;
}

double compression_ratio(const Record& original, std::size_t compressed_bits) {
  if (compressed_bits == 0)
    throw ValidationError("compressed size must be positive");
  return static_cast<double>(original.samples.size()) *
         static_cast<double>(original.resolution_bits) /
         static_cast<double>(compressed_bits);
}

QualityClass classify(double value, ClassKind kind) {
  if (kind == ClassKind::Prdn) {
    if (value <= 4.33) return QualityClass::Excellent;
    if (value <= 7.8) return QualityClass::VeryGood;
    if (value <= 11.59) return QualityClass::Good;
    if (value <= 22.5) return QualityClass::NotBad;
    return QualityClass::Bad;
  }
  if (value <= 7.4) return QualityClass::Excellent;
  if (value <= 15.45) return QualityClass::VeryGood;
  if (value <= 25.18) return QualityClass::Good;
  if (value <= 37.4) return QualityClass::NotBad;
  return QualityClass::Bad;
}

const char* class_name(QualityClass c) {
  switch (c) {
    case QualityClass::Excellent: return "Excellent";
    case QualityClass::VeryGood: return "VeryGood";
    case QualityClass::Good: return "Good";
    case QualityClass::NotBad: return "NotBad";
    case QualityClass::Bad: return "Bad";
  }
  return "Unknown";
}

RegularityStats regularity_analysis(const std::vector<std::vector<double>>& beats,
                                    const BeatAnnotations& annotations) {
  if (beats.size() < 2)
    throw InsufficientBeats("regularity analysis needs at least 2 beats");

  std::size_t max_len = 0;
  for (const auto& b : beats) max_len = std::max(max_len, b.size());
  std::vector<double> average(max_len, 0.0);
  for (const auto& b : beats)
    for (std::size_t i = 0; i < b.size(); ++i) average[i] += b[i];
  for (double& v : average) v /= static_cast<double>(beats.size());

  const double avg_mean = mean(average);
  double avg_var = 0.0;
  for (double v : average) avg_var += (v - avg_mean) * (v - avg_mean);

  double rho_sum = 0.0;
  for (const auto& b : beats) {
    std::vector<double> padded = b;
    padded.resize(max_len, 0.0);
    const double bm = mean(padded);
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < max_len; ++i) {
      cov += (padded[i] - bm) * (average[i] - avg_mean);
      var += (padded[i] - bm) * (padded[i] - bm);
    }
    const double den = std::sqrt(var * avg_var);
    rho_sum += den > 0.0 ? cov / den : 0.0;
  }

  RegularityStats stats;
  stats.rho_xy = rho_sum / static_cast<double>(beats.size());

  const auto& q = annotations.qrs_indices;
  if (q.size() >= 2) {
    std::vector<double> gaps(q.size() - 1);
    for (std::size_t i = 0; i + 1 < q.size(); ++i)
      gaps[i] = static_cast<double>(q[i + 1]) - static_cast<double>(q[i]);
    const double gm = mean(gaps);
    double var = 0.0;
    for (double v : gaps) var += (v - gm) * (v - gm);
    stats.sigma_rr = std::sqrt(var / static_cast<double>(gaps.size()));
  }
  return stats;
}

namespace {

void append_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string report_json(const QualityReport& r) {
  std::string out = "{\"prd\":";
  append_number(out, r.prd);
  out += ",\"prdn\":";
  append_number(out, r.prdn);
  out += ",\"wwprd\":";
  append_number(out, r.wwprd);
  out += ",\"cr\":";
  append_number(out, r.cr);
  out += ",\"qs\":";
  append_number(out, r.qs);
  out += ",\"qsn\":";
  append_number(out, r.qsn);
  out += ",\"prdn_class\":\"";
  out += class_name(r.prdn_class);
  out += "\",\"wwprd_class\":\"";
  out += class_name(r.wwprd_class);
  out += "\",\"rho_xy\":";
  append_number(out, r.rho_xy);
  out += ",\"sigma_rr\":";
  append_number(out, r.sigma_rr);
  out += "}";
  return out;
}

std::string report_csv_header() {
  return "prd,prdn,wwprd,cr,qs,qsn,prdn_class,wwprd_class,rho_xy,sigma_rr";
}

std::string report_csv_row(const QualityReport& r) {
  std::string out;
  const auto cell = [&out](double v) {
    if (std::isfinite(v)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
    }
    out += ",";
  };
  cell(r.prd);
  cell(r.prdn);
  cell(r.wwprd);
  cell(r.cr);
  cell(r.qs);
  cell(r.qsn);
  out += class_name(r.prdn_class);
  out += ",";
  out += class_name(r.wwprd_class);
  out += ",";
  if (std::isfinite(r.rho_xy)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", r.rho_xy);
    out += buf;
  }
  out += ",";
  if (std::isfinite(r.sigma_rr)) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", r.sigma_rr);
    out += buf;
  }
  return out;
}

}  // namespace rvp
