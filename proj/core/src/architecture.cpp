#include "rvp/architecture.hpp"

#include "rvp/errors.hpp"

namespace rvp {

namespace {

constexpr PoleConfiguration row(int d, int m0, int m1 = 0, int m2 = 0) {
  PoleConfiguration c{};
  c.dim_index = d;
  c.multiplicities = {m0, m1, m2};
  c.n = (m2 > 0) ? 3 : (m1 > 0) ? 2 : 1;
  c.total_N = m0 + m1 + m2;
  return c;
}

constexpr std::array<PoleConfiguration, 30> kSpace = {
    row(1, 2, 4),     row(2, 8),        row(3, 4, 4),     row(4, 2, 6),
    row(5, 2, 2, 4),  row(6, 4, 6),     row(7, 2, 8),     row(8, 2, 4, 4),
    row(9, 2, 2, 6),  row(10, 6, 6),    row(11, 4, 8),    row(12, 4, 4, 4),
    row(13, 2, 2, 8), row(14, 2, 4, 6), row(15, 6, 8),    row(16, 4, 4, 6),
    row(17, 2, 6, 6), row(18, 2, 4, 8), row(19, 8, 8),    row(20, 2, 6, 8),
    row(21, 4, 6, 6), row(22, 4, 4, 8), row(23, 2, 8, 8), row(24, 4, 6, 8),
    row(25, 6, 6, 6), row(26, 4, 8, 8), row(27, 6, 6, 8), row(28, 6, 8, 8),
    row(29, 8, 8, 8), row(30, 8, 14, 8),
};

}  // namespace

const std::array<PoleConfiguration, 30>& architecture_space() { return kSpace; }

const PoleConfiguration& architecture_lookup(int d) {
  if (d < kDimMin || d > kDimMax) {
    throw IndexOutOfRange("architecture_lookup: dimension " + std::to_string(d) +
                          " outside [1, 30]");
  }
  return kSpace[static_cast<std::size_t>(d - 1)];
}

}  // namespace rvp
