#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lofamo/word128.hpp"

namespace lofamo::wire {

// CRC-32, reflected IEEE polynomial, init 0xFFFFFFFF, final xor 0xFFFFFFFF.
std::uint32_t crc32(std::span<const std::uint8_t> data);
std::uint32_t crc32_update(std::uint32_t state, std::span<const std::uint8_t> data);

// ---------------------------------------------------------------------------
// Packet frame:   magic(16) | start(16) | header(16) | payload(0..4096) | footer(16)
//
// Payload length must be a multiple of the 16-byte link word. The footer is
// 12 bytes of metadata plus the CRC-32 of header|payload|footer-meta in the
// last 4 bytes (little-endian). Fixed overhead is 64 bytes per packet.
// ---------------------------------------------------------------------------
inline constexpr std::size_t kLinkWordBytes = 16;
inline constexpr std::size_t kMaxPayloadBytes = 4096;
inline constexpr std::size_t kFooterMetaBytes = 12;
inline constexpr std::size_t kProtocolOverheadBytes = 64;

// Framing constants; the magic word doubles as the word-stuffing escape that
// keeps credits distinguishable from payload on the wire.
extern const std::array<std::uint8_t, kLinkWordBytes> kFrameMagic;
extern const std::array<std::uint8_t, kLinkWordBytes> kFrameStart;

struct FrameContent {
  std::array<std::uint8_t, kLinkWordBytes> header{};
  std::vector<std::uint8_t> payload;
  std::array<std::uint8_t, kFooterMetaBytes> footer_meta{};

  friend bool operator==(const FrameContent&, const FrameContent&) = default;
};

// Serializes and stamps the CRC. Throws BadLength on payload size violations.
std::vector<std::uint8_t> build_frame(const FrameContent& content);

// Validates framing words, length and CRC; throws BadFraming / BadLength /
// CrcMismatch. parse_frame(build_frame(c)) == c for every valid content.
FrameContent parse_frame(std::span<const std::uint8_t> frame);

// Sets bit 127 of each word to the XOR of its bits 0..126.
void parity_set(std::span<Word128> words);

// Returns the index of the first word whose parity bit disagrees, if any.
std::optional<std::size_t> parity_check(std::span<const Word128> words);

}  // namespace lofamo::wire
