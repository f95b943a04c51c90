#include "rvp/mt.hpp"

#include <cmath>
#include <numbers>

#include "rvp/errors.hpp"

namespace rvp {

PoleVector PoleVector::expanded(const std::vector<DiscPoint>& poles,
                                const std::vector<int>& multiplicities) {
  if (poles.size() != multiplicities.size()) {
    throw ValidationError("pole count does not match multiplicity count");
  }
  PoleVector b;
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (multiplicities[i] <= 0) {
      throw ValidationError("multiplicities must be positive");
    }
    b.entries.insert(b.entries.end(), static_cast<std::size_t>(multiplicities[i]),
                     poles[i].c());
  }
  b.validate();
  return b;
}

void PoleVector::validate() const {
  for (const cx& a : entries) {
    if (std::norm(a) >= 1.0) {
      throw ValidationError("inverse pole is not strictly inside the unit disc");
    }
  }
}

cx mt_basis_value(std::size_t j, cx z, const PoleVector& b) {
  if (j >= b.size()) {
    throw IndexOutOfRange("mt_basis_value: basis index " + std::to_string(j) +
                          " out of range for N = " + std::to_string(b.size()));
  }
  if (std::abs(std::abs(z) - 1.0) > 1e-12) {
    throw ValidationError("mt_basis_value: z must lie on the unit circle");
  }
  cx prod{1.0, 0.0};
  for (std::size_t k = 0; k < j; ++k) {
    prod *= blaschke(z, DiscPoint{b.entries[k].real(), b.entries[k].imag()});
  }
  const cx& a = b.entries[j];
  return std::sqrt(1.0 - std::norm(a)) / (1.0 - std::conj(a) * z) * prod;
}

MTBasisMatrix build_mt_matrix(const PoleVector& b, std::size_t m_samples) {
  b.validate();
  const std::size_t n_cols = b.size();
  if (m_samples < n_cols) {
    throw UnderdeterminedSystem("build_mt_matrix: " + std::to_string(m_samples) +
                                " samples for " + std::to_string(n_cols) +
                                " basis functions");
  }

  MTBasisMatrix mat;
  mat.pole_vector = b;
  mat.values.resize(static_cast<Eigen::Index>(m_samples),
                    static_cast<Eigen::Index>(n_cols));

  std::vector<double> lead(n_cols);
  for (std::size_t j = 0; j < n_cols; ++j) {
    lead[j] = std::sqrt(1.0 - std::norm(b.entries[j]));
  }

  for (std::size_t k = 0; k < m_samples; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(m_samples);
    const cx z{std::cos(t), std::sin(t)};
    cx prod{1.0, 0.0};
    for (std::size_t j = 0; j < n_cols; ++j) {
      const cx& a = b.entries[j];
      const cx inv_den = 1.0 / (1.0 - std::conj(a) * z);
      mat.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          lead[j] * inv_den * prod;
      prod *= (z - a) * inv_den;
    }
  }
  return mat;
}

}  // namespace rvp
