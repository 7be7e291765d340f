#include "lofamo/word128.hpp"

#include <cstdio>
#include <stdexcept>

namespace lofamo::wire {

namespace {

std::uint64_t parse_hex(const std::string& text, std::size_t pos, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const char c = text[pos + i];
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint64_t>(c - 'A' + 10);
    else throw std::invalid_argument("bad hex digit in register image");
  }
  return v;
}

}  // namespace

std::string to_hex8(std::uint32_t word) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08X", word);
  return buf;
}

std::string to_hex16(std::uint64_t word) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llX", static_cast<unsigned long long>(word));
  return buf;
}

std::string to_hex32(const Word128& word) { return to_hex16(word.hi) + to_hex16(word.lo); }

std::uint32_t parse_hex8(const std::string& text) {
  if (text.size() != 8) throw std::invalid_argument("register image must be 8 hex digits");
  return static_cast<std::uint32_t>(parse_hex(text, 0, 8));
}

Word128 parse_hex32(const std::string& text) {
  if (text.size() != 32) throw std::invalid_argument("word image must be 32 hex digits");
  return Word128{parse_hex(text, 0, 16), parse_hex(text, 16, 16)};
}

}  // namespace lofamo::wire
