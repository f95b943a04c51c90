#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

#include "rvp/errors.hpp"

namespace rvp {

// MSB-first bit packing: the first bit written lands in the high bit of the
// first byte. Fields wider than one byte are written most significant bit
// first, so multi-field layouts are byte-order independent.
class BitWriter {
 public:
  void put(std::uint64_t value, int bits) {
    if (bits < 0 || bits > 64)
      throw ValidationError("BitWriter: width out of range");
    for (int i = bits - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }

  void put_bit(std::uint64_t bit) {
    if (fill_ == 0) bytes_.push_back(0);
    bytes_.back() |= static_cast<std::uint8_t>((bit & 1u) << (7 - fill_));
    fill_ = (fill_ + 1) & 7;
  }

  // IEEE-754 single precision, stored as its 32-bit pattern.
  void put_f32(float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    put(bits, 32);
  }

  void align() { fill_ = 0; }

  std::size_t bit_count() const {
    return fill_ == 0 ? bytes_.size() * 8 : (bytes_.size() - 1) * 8 + fill_;
  }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() {
    fill_ = 0;
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  int fill_ = 0;  // bits used in the last byte, 0 meaning byte-aligned
};

class BitReader {
 public:
  explicit BitReader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}
  explicit BitReader(const std::vector<std::uint8_t>& bytes)
      : BitReader(bytes.data(), bytes.size()) {}

  std::uint64_t get(int bits) {
    if (bits < 0 || bits > 64)
      throw ValidationError("BitReader: width out of range");
    std::uint64_t value = 0;
    for (int i = 0; i < bits; ++i) value = (value << 1) | get_bit();
    return value;
  }

  std::uint64_t get_bit() {
    if (pos_ >= size_ * 8) throw TruncatedStream("bitstream ends early");
    const std::uint64_t bit = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return bit;
  }

  float get_f32() {
    const std::uint32_t bits = static_cast<std::uint32_t>(get(32));
    float value;
    std::memcpy(&value, &bits, sizeof value);
    return value;
  }

  void align() { pos_ = (pos_ + 7) & ~std::size_t{7}; }

  std::size_t bit_position() const { return pos_; }
  std::size_t bits_left() const { return size_ * 8 - pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace rvp
