#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "rvp/disc.hpp"

namespace rvp {

// Ordered list of inverse poles inside the unit disc, each repeated according
// to its multiplicity; equal values are contiguous. Length N is the dimension
// of the generated rational subspace.
struct PoleVector {
  std::vector<cx> entries;

  std::size_t size() const { return entries.size(); }

  // Expand distinct poles by their multiplicities (multiplicities[i] copies of
  // poles[i], in order).
  static PoleVector expanded(const std::vector<DiscPoint>& poles,
                             const std::vector<int>& multiplicities);

  // Throws ValidationError unless every entry is strictly inside the disc.
  void validate() const;
};

// Value of the j-th Malmquist-Takenaka basis function at z on the unit circle:
//   phi_j(z) = sqrt(1 - |b_j|^2) / (1 - conj(b_j) z) * prod_{k<j} B(z, b_k)
// With all-zero poles this collapses to z^j. Throws IndexOutOfRange when
// j >= N, ValidationError when |z| is not 1 within 1e-12.
cx mt_basis_value(std::size_t j, cx z, const PoleVector& b);

// The N basis functions sampled on the uniform circle grid z_k = e^{i 2pi k/M}:
// values(k, j) = phi_j(z_k). Rows = samples, columns = basis functions.
struct MTBasisMatrix {
  Eigen::MatrixXcd values;
  PoleVector pole_vector;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

// Throws UnderdeterminedSystem when m_samples < N.
MTBasisMatrix build_mt_matrix(const PoleVector& b, std::size_t m_samples);

}  // namespace rvp
