#pragma once

#include <bit>
#include <cstdint>
#include <string>

namespace lofamo::wire {

// 128-bit register word, kept as two explicit halves so hex images and bit
// indices stay unambiguous across platforms. Bit 0 is the LSB of `lo`,
// bit 127 the MSB of `hi`.
struct Word128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const Word128&, const Word128&) = default;

  constexpr bool bit(unsigned i) const {
    return i < 64 ? ((lo >> i) & 1u) != 0 : ((hi >> (i - 64)) & 1u) != 0;
  }

  constexpr void set_bit(unsigned i, bool v) {
    if (i < 64) {
      lo = v ? (lo | (std::uint64_t{1} << i)) : (lo & ~(std::uint64_t{1} << i));
    } else {
      const unsigned j = i - 64;
      hi = v ? (hi | (std::uint64_t{1} << j)) : (hi & ~(std::uint64_t{1} << j));
    }
  }

  // Extracts `width` bits starting at `lsb` (width <= 64, may straddle the
  // half boundary).
  constexpr std::uint64_t field(unsigned lsb, unsigned width) const {
    std::uint64_t out = 0;
    for (unsigned i = 0; i < width; ++i) {
      if (bit(lsb + i)) out |= std::uint64_t{1} << i;
    }
    return out;
  }

  constexpr void set_field(unsigned lsb, unsigned width, std::uint64_t value) {
    for (unsigned i = 0; i < width; ++i) {
      set_bit(lsb + i, ((value >> i) & 1u) != 0);
    }
  }
};

// XOR of bits 0..126, i.e. everything below the parity bit.
constexpr bool parity_of_payload(const Word128& w) {
  const int ones =
      std::popcount(w.lo) + std::popcount(w.hi & 0x7FFF'FFFF'FFFF'FFFFull);
  return (ones & 1) != 0;
}

std::string to_hex8(std::uint32_t word);
std::string to_hex16(std::uint64_t word);
std::string to_hex32(const Word128& word);

std::uint32_t parse_hex8(const std::string& text);
Word128 parse_hex32(const std::string& text);

}  // namespace lofamo::wire
