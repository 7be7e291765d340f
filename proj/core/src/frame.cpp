#include "lofamo/frame.hpp"

#include <algorithm>
#include <cstring>

#include "lofamo/errors.hpp"

namespace lofamo::wire {

namespace {

// Reflected IEEE 802.3 polynomial.
constexpr std::uint32_t kPolyReflected = 0xEDB88320u;

struct CrcTable {
  std::uint32_t entries[256];

  constexpr CrcTable() : entries() {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1u) ? (kPolyReflected ^ (c >> 1)) : (c >> 1);
      }
      entries[i] = c;
    }
  }
};

constexpr CrcTable kCrcTable{};

void put_le32(std::uint8_t* dst, std::uint32_t v) {
  dst[0] = static_cast<std::uint8_t>(v);
  dst[1] = static_cast<std::uint8_t>(v >> 8);
  dst[2] = static_cast<std::uint8_t>(v >> 16);
  dst[3] = static_cast<std::uint8_t>(v >> 24);
}

std::uint32_t get_le32(const std::uint8_t* src) {
  return static_cast<std::uint32_t>(src[0]) |
         (static_cast<std::uint32_t>(src[1]) << 8) |
         (static_cast<std::uint32_t>(src[2]) << 16) |
         (static_cast<std::uint32_t>(src[3]) << 24);
}

}  // namespace

const std::array<std::uint8_t, kLinkWordBytes> kFrameMagic = {
    0xDA, 0xD0, 0xDA, 0xD0, 0xDA, 0xD0, 0xDA, 0xD0,
    0xDA, 0xD0, 0xDA, 0xD0, 0xDA, 0xD0, 0xDA, 0xD0};

const std::array<std::uint8_t, kLinkWordBytes> kFrameStart = {
    0x5A, 0xA5, 0x5A, 0xA5, 0x5A, 0xA5, 0x5A, 0xA5,
    0x5A, 0xA5, 0x5A, 0xA5, 0x5A, 0xA5, 0x5A, 0xA5};

std::uint32_t crc32_update(std::uint32_t state, std::span<const std::uint8_t> data) {
  for (std::uint8_t b : data) {
    state = kCrcTable.entries[(state ^ b) & 0xFFu] ^ (state >> 8);
  }
  return state;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  return crc32_update(0xFFFFFFFFu, data) ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> build_frame(const FrameContent& content) {
  if (content.payload.size() > kMaxPayloadBytes) {
    throw BadLength("payload exceeds 4096 bytes");
  }
  if (content.payload.size() % kLinkWordBytes != 0) {
    throw BadLength("payload is not a multiple of the 16-byte link word");
  }

  std::vector<std::uint8_t> frame;
  frame.reserve(kProtocolOverheadBytes + content.payload.size());
  frame.insert(frame.end(), kFrameMagic.begin(), kFrameMagic.end());
  frame.insert(frame.end(), kFrameStart.begin(), kFrameStart.end());
  frame.insert(frame.end(), content.header.begin(), content.header.end());
  frame.insert(frame.end(), content.payload.begin(), content.payload.end());
  frame.insert(frame.end(), content.footer_meta.begin(), content.footer_meta.end());

  // CRC spans header | payload | footer meta.
  const std::uint32_t crc = crc32(
      std::span<const std::uint8_t>(frame.data() + 2 * kLinkWordBytes,
                                    frame.size() - 2 * kLinkWordBytes));
  frame.resize(frame.size() + 4);
  put_le32(frame.data() + frame.size() - 4, crc);
  return frame;
}

FrameContent parse_frame(std::span<const std::uint8_t> frame) {
  if (frame.size() < kProtocolOverheadBytes) {
    throw BadLength("frame shorter than the 64-byte protocol envelope");
  }
  const std::size_t payload_len = frame.size() - kProtocolOverheadBytes;
  if (payload_len > kMaxPayloadBytes) {
    throw BadLength("payload exceeds 4096 bytes");
  }
  if (payload_len % kLinkWordBytes != 0) {
    throw BadLength("payload is not a multiple of the 16-byte link word");
  }

  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), frame.begin())) {
    throw BadFraming("magic word mismatch");
  }
  if (!std::equal(kFrameStart.begin(), kFrameStart.end(),
                  frame.begin() + kLinkWordBytes)) {
    throw BadFraming("start word mismatch");
  }

  const std::uint32_t stored = get_le32(frame.data() + frame.size() - 4);
  const std::uint32_t computed = crc32(frame.subspan(
      2 * kLinkWordBytes, frame.size() - 2 * kLinkWordBytes - 4));
  if (stored != computed) throw CrcMismatch(computed, stored);

  FrameContent content;
  std::memcpy(content.header.data(), frame.data() + 2 * kLinkWordBytes,
              kLinkWordBytes);
  content.payload.assign(frame.begin() + 3 * kLinkWordBytes,
                         frame.begin() + 3 * kLinkWordBytes + payload_len);
  std::memcpy(content.footer_meta.data(),
              frame.data() + 3 * kLinkWordBytes + payload_len, kFooterMetaBytes);
  return content;
}

void parity_set(std::span<Word128> words) {
  for (Word128& w : words) {
    w.set_bit(127, parity_of_payload(w));
  }
}

std::optional<std::size_t> parity_check(std::span<const Word128> words) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].bit(127) != parity_of_payload(words[i])) return i;
  }
  return std::nullopt;
}

}  // namespace lofamo::wire
