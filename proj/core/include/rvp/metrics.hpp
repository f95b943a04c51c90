#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rvp/ecg_io.hpp"

namespace rvp {

// prd  = 100 * ||f - g||_2 / ||f||_2
// prdn = 100 * ||f - g||_2 / ||f - mean(f)||_2
// Both throw ZeroDenominator, and ValidationError on a length mismatch.
double prd(const std::vector<double>& f, const std::vector<double>& g);
double prdn(const std::vector<double>& f, const std::vector<double>& g);

// Five-level orthogonal filter-bank split with the fixed 4-tap analysis pair
// (h = ((1+sqrt 3), (3+sqrt 3), (3-sqrt 3), (1-sqrt 3)) / (4 sqrt 2),
// g[k] = (-1)^k h[3-k]) and periodic convolution. Inputs are padded to the
// next multiple of 32 by symmetric extension, so the six bands carry exactly
// the padded length in coefficients.
struct SubbandDecomposition {
  std::array<std::vector<double>, 6> bands;  // details 1..5, then approximation
  static const std::array<double, 6>& weights();  // (6,9,7,3,1,1)/27
};

// Throws TooShort below 32 samples.
SubbandDecomposition wavelet_decompose_5(const std::vector<double>& signal);

// 100 * sum_j w_j * ||c_j - c~_j||_2 / ||c_j||_2 over the six bands, both
// signals zero-meaned and padded identically first. Throws ZeroBandEnergy
// with the offending band when an original band is empty of energy.
double wwprd(const std::vector<double>& f, const std::vector<double>& g);

// (sample count x resolution bits) / compressed bits.
double compression_ratio(const Record& original, std::size_t compressed_bits);

enum class QualityClass { Excellent, VeryGood, Good, NotBad, Bad };
enum class ClassKind { Prdn, Wwprd };

// Fixed diagnostic-quality bands; boundary values take the better class.
QualityClass classify(double value, ClassKind kind);
const char* class_name(QualityClass c);

// Mean Pearson correlation of each beat against the zero-padded average
// beat, and the population standard deviation of successive gaps between
// annotation indices (sample units). Throws InsufficientBeats below 2 beats.
struct RegularityStats {
  double rho_xy = 0.0;
  double sigma_rr = 0.0;
};
RegularityStats regularity_analysis(const std::vector<std::vector<double>>& beats,
                                    const BeatAnnotations& annotations);

// Convenience for mode comparisons: qsn_a - qsn_b.
inline double delta_qsn(double qsn_a, double qsn_b) { return qsn_a - qsn_b; }

// One evaluation run, ready for emission. rho_xy and sigma_rr stay NaN when
// no annotations were available; cr/qs/qsn stay NaN when the compressed size
// is unknown.
struct QualityReport {
  double prd = 0.0;
  double prdn = 0.0;
  double wwprd = 0.0;
  double cr = 0.0;
  double qs = 0.0;
  double qsn = 0.0;
  QualityClass prdn_class = QualityClass::Excellent;
  QualityClass wwprd_class = QualityClass::Excellent;
  double rho_xy = 0.0;
  double sigma_rr = 0.0;
};

// Line-delimited machine-readable emissions. JSON object keys and CSV columns
// are, in order: prd, prdn, wwprd, cr, qs, qsn, prdn_class, wwprd_class,
// rho_xy, sigma_rr. Non-finite numbers emit as null (JSON) / empty (CSV).
std::string report_json(const QualityReport& report);
std::string report_csv_header();
std::string report_csv_row(const QualityReport& report);

}  // namespace rvp
