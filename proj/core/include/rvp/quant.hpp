#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "rvp/disc.hpp"

namespace rvp {

// Bit widths of the stored parameters: 4-bit angle/magnitude codes for inverse
// poles, 7-bit codes for coefficients.
inline constexpr int kPoleBits = 4;
inline constexpr int kCoeffBits = 7;

// Polar grid codes for a complex value: angle step 2*pi/2^angle_bits,
// magnitude step 1/2^mag_bits.
struct DiscCodes {
  std::uint32_t angle = 0;
  std::uint32_t magnitude = 0;
};

// Round to the nearest grid point. The angle code is taken modulo 2^angle_bits;
// the magnitude code is clamped to 2^mag_bits - 1, so dequantized values stay
// strictly inside the unit disc.
inline DiscCodes quantize_disc(cx value, int angle_bits, int mag_bits) {
  const auto angle_n = std::uint32_t{1} << angle_bits;
  const double angle_step = 2.0 * std::numbers::pi / static_cast<double>(angle_n);
  long a = std::lround(std::arg(value) / angle_step);
  a %= static_cast<long>(angle_n);
  if (a < 0) a += static_cast<long>(angle_n);

  const auto mag_n = std::uint32_t{1} << mag_bits;
  long m = std::lround(std::abs(value) * static_cast<double>(mag_n));
  if (m > static_cast<long>(mag_n) - 1) m = static_cast<long>(mag_n) - 1;

  return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(m)};
}

// Exact grid point for the codes; a fixed point of quantize_disc.
inline cx dequantize_disc(DiscCodes codes, int angle_bits, int mag_bits) {
  const auto angle_n = std::uint32_t{1} << angle_bits;
  const double angle_step = 2.0 * std::numbers::pi / static_cast<double>(angle_n);
  const double theta = static_cast<double>(codes.angle) * angle_step;
  const double mag = static_cast<double>(codes.magnitude) /
                     static_cast<double>(std::uint32_t{1} << mag_bits);
  return {mag * std::cos(theta), mag * std::sin(theta)};
}

// Convenience: snap a value onto the grid (dequantize . quantize).
inline cx snap_to_grid(cx value, int angle_bits, int mag_bits) {
  return dequantize_disc(quantize_disc(value, angle_bits, mag_bits), angle_bits, mag_bits);
}

}  // namespace rvp
