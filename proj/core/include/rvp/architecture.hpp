#pragma once

#include <array>
#include <vector>

namespace rvp {

// One row of the model architecture catalog: the multiplicity vector of a
// rational subspace, with n = number of distinct poles and total_N = sum of
// multiplicities. Indexed by a virtual dimension d ordered by n + total_N.
struct PoleConfiguration {
  int dim_index = 0;                        // 1..30
  std::array<int, 3> multiplicities{};      // unused entries are 0
  int n = 0;
  int total_N = 0;

  std::vector<int> mults() const {
    return std::vector<int>(multiplicities.begin(), multiplicities.begin() + n);
  }
};

inline constexpr int kDimMin = 1;
inline constexpr int kDimMax = 30;

// The full 30-row catalog, ordered by dim_index.
const std::array<PoleConfiguration, 30>& architecture_space();

// Row for virtual dimension d in [1, 30]; throws IndexOutOfRange otherwise.
const PoleConfiguration& architecture_lookup(int d);

}  // namespace rvp
