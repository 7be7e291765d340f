#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lofamo/completion.hpp"
#include "lofamo/errors.hpp"
#include "lofamo/frame.hpp"
#include "lofamo/registers.hpp"
#include "lofamo/status.hpp"
#include "lofamo/word128.hpp"

using namespace lofamo;
using namespace lofamo::wire;

namespace {

constexpr int kRoundTrips = 10'000;

StatusCode2 random_status(std::mt19937_64& rng) {
  return static_cast<StatusCode2>(rng() % 3);
}

DnpWatchdogRegister random_dwr(std::mt19937_64& rng) {
  DnpWatchdogRegister r;
  r.valid = rng() & 1;
  for (auto& b : r.neighbour_fails) b = rng() & 1;
  r.dnp_core = random_status(rng);
  r.current = random_status(rng);
  r.voltage = random_status(rng);
  r.temperature = random_status(rng);
  for (auto& s : r.link_status) s = random_status(rng);
  r.lifama_busy = rng() & 1;
  return r;
}

HostWatchdogRegister random_hwr(std::mt19937_64& rng) {
  HostWatchdogRegister r;
  r.valid = rng() & 1;
  r.service_net = random_status(rng);
  r.memory = random_status(rng);
  r.peripheral = random_status(rng);
  r.send_ldm = rng() & 1;
  return r;
}

LifamaDiagnosticMessage random_ldm(std::mt19937_64& rng) {
  LifamaDiagnosticMessage m;
  m.service_net = random_status(rng);
  m.memory = random_status(rng);
  m.peripheral = random_status(rng);
  m.dnp_core = random_status(rng);
  m.current = random_status(rng);
  m.voltage = random_status(rng);
  m.temperature = random_status(rng);
  for (auto& s : m.link_status) s = random_status(rng);
  m.valid = rng() & 1;
  return m;
}

// Independent oracle: bit-at-a-time reflected CRC-32, no table.
std::uint32_t crc32_bitwise(std::span<const std::uint8_t> data) {
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t byte : data) {
    crc ^= byte;
    for (int i = 0; i < 8; ++i) {
      crc = (crc >> 1) ^ (0xEDB88320u & (0u - (crc & 1u)));
    }
  }
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace

// ---------------------------------------------------------------------------
// Status codes and directions
// ---------------------------------------------------------------------------

TEST_CASE("status codes encode to their two-bit patterns") {
  CHECK(encode_status2(StatusCode2::Normal) == 0b00);
  CHECK(encode_status2(StatusCode2::Sick) == 0b01);
  CHECK(encode_status2(StatusCode2::Broken) == 0b10);
  CHECK(decode_status2(0b00) == StatusCode2::Normal);
  CHECK(decode_status2(0b01) == StatusCode2::Sick);
  CHECK(decode_status2(0b10) == StatusCode2::Broken);
  CHECK_THROWS_AS(decode_status2(0b11), InvalidStatusPattern);
}

TEST_CASE("direction helpers") {
  for (Direction d : kAllDirections) {
    CHECK(opposite(opposite(d)) == d);
    CHECK(opposite(d) != d);
  }
  CHECK(to_string(Direction::XPlus) == "X+");
  CHECK(to_string(Direction::ZMinus) == "Z-");
  // Watchdog register bit assignments walk Z- .. X+.
  CHECK(dwr_neighbour_bit(Direction::ZMinus) == 1);
  CHECK(dwr_neighbour_bit(Direction::XPlus) == 6);
  CHECK(dwr_link_lsb(Direction::ZMinus) == 15);
  CHECK(dwr_link_lsb(Direction::XPlus) == 25);
  CHECK(ldm_link_lsb(Direction::ZMinus) == 14);
  CHECK(ldm_link_lsb(Direction::XPlus) == 24);
}

// ---------------------------------------------------------------------------
// Watchdog register images
// ---------------------------------------------------------------------------

TEST_CASE("known DWR images") {
  DnpWatchdogRegister r;
  r.valid = true;
  CHECK(encode_dwr(r) == 0x00000001u);

  r.neighbour_fails[dir_index(Direction::XPlus)] = true;
  CHECK(encode_dwr(r) == 0x00000041u);

  r.neighbour_fails[dir_index(Direction::XPlus)] = false;
  r.link_status[dir_index(Direction::XPlus)] = StatusCode2::Broken;
  CHECK(encode_dwr(r) == 0x04000001u);

  r.link_status[dir_index(Direction::XPlus)] = StatusCode2::Normal;
  r.dnp_core = StatusCode2::Broken;
  CHECK(encode_dwr(r) == 0x00000101u);

  r.dnp_core = StatusCode2::Normal;
  r.lifama_busy = true;
  CHECK(encode_dwr(r) == 0x80000001u);
}

TEST_CASE("known HWR images") {
  HostWatchdogRegister r;
  r.valid = true;
  CHECK(encode_hwr(r) == 0x00000001u);
  r.service_net = StatusCode2::Broken;
  CHECK(encode_hwr(r) == 0x00000005u);
  r.service_net = StatusCode2::Normal;
  r.memory = StatusCode2::Sick;
  CHECK(encode_hwr(r) == 0x00000009u);
  r.memory = StatusCode2::Normal;
  r.send_ldm = true;
  CHECK(encode_hwr(r) == 0x80000001u);
}

TEST_CASE("known LDM images") {
  LifamaDiagnosticMessage m;
  m.valid = true;
  CHECK(encode_ldm(m) == 0x80000000u);
  m.memory = StatusCode2::Sick;
  CHECK(encode_ldm(m) == 0x80000004u);
  m.memory = StatusCode2::Normal;
  m.link_status[dir_index(Direction::XPlus)] = StatusCode2::Broken;
  CHECK(encode_ldm(m) == 0x82000000u);
}

TEST_CASE("register round-trips") {
  std::mt19937_64 rng(0xA11CE);
  for (int i = 0; i < kRoundTrips; ++i) {
    const DnpWatchdogRegister d = random_dwr(rng);
    const std::uint32_t dw = encode_dwr(d);
    CHECK(decode_dwr(dw) == d);
    CHECK(encode_dwr(decode_dwr(dw)) == dw);

    const HostWatchdogRegister h = random_hwr(rng);
    const std::uint32_t hw = encode_hwr(h);
    CHECK(decode_hwr(hw) == h);
    CHECK(encode_hwr(decode_hwr(hw)) == hw);

    const LifamaDiagnosticMessage m = random_ldm(rng);
    const std::uint32_t mw = encode_ldm(m);
    CHECK(decode_ldm(mw) == m);
    CHECK(encode_ldm(decode_ldm(mw)) == mw);
  }
}

TEST_CASE("decoders reject the reserved 11 pattern in every field") {
  // DWR: core at 7, sensors at 9/11/13, links at 15..25.
  for (unsigned lsb : {7u, 9u, 11u, 13u, 15u, 17u, 19u, 21u, 23u, 25u}) {
    CHECK_THROWS_AS(decode_dwr(0b11u << lsb), InvalidStatusPattern);
  }
  for (unsigned lsb : {1u, 3u, 5u}) {
    CHECK_THROWS_AS(decode_hwr(0b11u << lsb), InvalidStatusPattern);
  }
  for (unsigned lsb : {0u, 2u, 4u, 6u, 8u, 10u, 12u, 14u, 16u, 18u, 20u, 22u, 24u}) {
    CHECK_THROWS_AS(decode_ldm(0b11u << lsb), InvalidStatusPattern);
  }
}

TEST_CASE("ldm fault summaries") {
  LifamaDiagnosticMessage m;
  m.valid = true;
  CHECK_FALSE(ldm_reports_broken(m));
  CHECK_FALSE(ldm_reports_sick(m));
  m.voltage = StatusCode2::Sick;
  CHECK(ldm_reports_sick(m));
  CHECK_FALSE(ldm_reports_broken(m));
  m.link_status[dir_index(Direction::YMinus)] = StatusCode2::Broken;
  CHECK(ldm_reports_broken(m));
}

// ---------------------------------------------------------------------------
// Credit words
// ---------------------------------------------------------------------------

TEST_CASE("credit embed and extract") {
  CreditLayout layout{};
  CHECK_NOTHROW(layout.validate());

  std::mt19937_64 rng(0xC4ED17);
  for (int i = 0; i < kRoundTrips; ++i) {
    Word128 credit{rng(), rng()};
    const std::uint32_t ldm = encode_ldm(random_ldm(rng));
    const std::uint64_t occ = rng() & 0xFFFFu;

    credit = set_credit_occupancy(credit, occ);
    CHECK(credit_occupancy(credit) == occ);

    const Word128 with_ldm = embed_ldm(credit, ldm);
    CHECK(extract_ldm(with_ldm) == ldm);
    // The embed must not disturb the occupancy field.
    CHECK(credit_occupancy(with_ldm) == occ);
  }
}

TEST_CASE("credit layout rejects overlap and overflow") {
  CreditLayout overlapping{};
  overlapping.ldm_lsb = 8;  // collides with the 16-bit occupancy at 0
  CHECK_THROWS_AS(overlapping.validate(), std::invalid_argument);

  CreditLayout off_end{};
  off_end.ldm_lsb = 100;  // 100 + 32 > 128
  CHECK_THROWS_AS(off_end.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Completion events
// ---------------------------------------------------------------------------

TEST_CASE("completion magic words") {
  CHECK(to_hex32(magic_word(EventSource::TxDma0)) ==
        "11111111DAD0DAD011111111DAD0DAD0");
  CHECK(to_hex32(magic_word(EventSource::TxDma1)) ==
        "22222222DAD0DAD022222222DAD0DAD0");
  CHECK(to_hex32(magic_word(EventSource::GpuTx)) ==
        "00000000DAD0DAD000000000DAD0DAD0");
  CHECK(to_hex32(magic_word(EventSource::Nios)) ==
        "33333333DAD0DAD033333333DAD0DAD0");
}

TEST_CASE("cmd1 field layout") {
  Cmd1 cmd;
  cmd.tag = kTagCompletion;
  cmd.code = 0x1234;
  cmd.port_id = 2;
  cmd.data = 0xDEADBEEF;
  cmd.entry_addr = 0x00000000CAFE0000ull;
  const Word128 w = encode_cmd1(cmd);
  CHECK(to_hex32(w) == "00000000CAFE0000DEADBEEF00112340");
  CHECK(decode_cmd1(w) == cmd);
}

TEST_CASE("completion event round-trips") {
  std::mt19937_64 rng(0xE4E27);
  const EventSource sources[] = {EventSource::TxDma0, EventSource::TxDma1,
                                 EventSource::GpuTx, EventSource::Nios};
  for (int i = 0; i < kRoundTrips; ++i) {
    CompletionEvent ev;
    ev.source = sources[rng() % 4];
    ev.cmd1.tag = static_cast<std::uint8_t>(rng() & 0b11);
    ev.cmd1.code = static_cast<std::uint16_t>(rng() & 0x7FFF);
    ev.cmd1.port_id = static_cast<std::uint8_t>(rng() & 0b11);
    ev.cmd1.data = static_cast<std::uint32_t>(rng());
    ev.cmd1.entry_addr = rng();
    const EventWords words = encode_event(ev);
    CHECK(words.second == magic_word(ev.source));
    const CompletionEvent back = decode_event(words);
    CHECK(back.source == ev.source);
    CHECK(back.cmd1 == ev.cmd1);
  }
}

TEST_CASE("rx events carry address and footer") {
  std::mt19937_64 rng(0x52B);
  for (int i = 0; i < kRoundTrips; ++i) {
    CompletionEvent ev;
    ev.source = EventSource::Rx;
    ev.rx_header = Word128{rng(), rng()};
    ev.rx_phys_addr = rng();
    ev.rx_footer_lo = rng();
    // Avoid the (by construction undecidable) magic-shaped collision.
    if (ev.rx_phys_addr == ev.rx_footer_lo &&
        (ev.rx_footer_lo & 0xFFFFFFFFull) == 0xDAD0DAD0ull) {
      ev.rx_footer_lo ^= 1;
    }
    const EventWords words = encode_event(ev);
    const CompletionEvent back = decode_event(words);
    CHECK(back.source == EventSource::Rx);
    CHECK(back.rx_header == ev.rx_header);
    CHECK(back.rx_phys_addr == ev.rx_phys_addr);
    CHECK(back.rx_footer_lo == ev.rx_footer_lo);
  }
}

TEST_CASE("magic-shaped word with unknown producer throws") {
  EventWords words;
  words.second = Word128{0x44444444DAD0DAD0ull, 0x44444444DAD0DAD0ull};
  CHECK_THROWS_AS(decode_event(words), UnknownMagic);
}

// ---------------------------------------------------------------------------
// CRC and framing
// ---------------------------------------------------------------------------

TEST_CASE("crc32 check value") {
  const std::uint8_t digits[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  CHECK(crc32(digits) == 0xCBF43926u);
  CHECK(crc32_bitwise(digits) == 0xCBF43926u);
}

TEST_CASE("crc32 agrees with the bitwise oracle") {
  std::mt19937_64 rng(0xC2C);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> buf(rng() % 512);
    for (auto& b : buf) b = static_cast<std::uint8_t>(rng());
    CHECK(crc32(buf) == crc32_bitwise(buf));

    // Incremental state must match the one-shot value.
    const std::size_t cut = buf.empty() ? 0 : rng() % buf.size();
    std::uint32_t state = 0xFFFFFFFFu;
    state = crc32_update(state, std::span(buf).subspan(0, cut));
    state = crc32_update(state, std::span(buf).subspan(cut));
    CHECK((state ^ 0xFFFFFFFFu) == crc32(buf));
  }
}

TEST_CASE("frame round-trips across payload sizes") {
  std::mt19937_64 rng(0xF2A3E);
  for (std::size_t payload = 0; payload <= kMaxPayloadBytes;
       payload += kLinkWordBytes) {
    FrameContent c;
    for (auto& b : c.header) b = static_cast<std::uint8_t>(rng());
    for (auto& b : c.footer_meta) b = static_cast<std::uint8_t>(rng());
    c.payload.resize(payload);
    for (auto& b : c.payload) b = static_cast<std::uint8_t>(rng());

    const auto frame = build_frame(c);
    CHECK(frame.size() == payload + kProtocolOverheadBytes);
    CHECK(parse_frame(frame) == c);
  }
}

TEST_CASE("frame rejects bad payload lengths") {
  FrameContent c;
  c.payload.resize(kMaxPayloadBytes + kLinkWordBytes);
  CHECK_THROWS_AS(build_frame(c), BadLength);
  c.payload.resize(8);  // not a whole link word
  CHECK_THROWS_AS(build_frame(c), BadLength);
}

TEST_CASE("every single-bit flip in a frame is detected") {
  std::mt19937_64 rng(0xB17);
  FrameContent c;
  for (auto& b : c.header) b = static_cast<std::uint8_t>(rng());
  for (auto& b : c.footer_meta) b = static_cast<std::uint8_t>(rng());
  c.payload.resize(2 * kLinkWordBytes);
  for (auto& b : c.payload) b = static_cast<std::uint8_t>(rng());
  const auto frame = build_frame(c);

  for (std::size_t bit = 0; bit < frame.size() * 8; ++bit) {
    auto tampered = frame;
    tampered[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK_THROWS_AS(parse_frame(tampered), FrameError);
  }
}

TEST_CASE("truncated frames fail cleanly") {
  const auto frame = build_frame(FrameContent{});
  CHECK_THROWS_AS(parse_frame(std::span(frame).subspan(0, frame.size() - 1)),
                  BadLength);
  CHECK_THROWS_AS(parse_frame(std::span(frame).subspan(0, 8)),
                  BadLength);
}

TEST_CASE("parity set and check") {
  std::mt19937_64 rng(0x9A417);
  for (int i = 0; i < 1000; ++i) {
    std::vector<Word128> words(1 + rng() % 8);
    for (auto& w : words) w = Word128{rng(), rng()};
    parity_set(words);
    CHECK_FALSE(parity_check(words).has_value());

    const std::size_t victim = rng() % words.size();
    const unsigned bit = static_cast<unsigned>(rng() % 128);
    words[victim].set_bit(bit, !words[victim].bit(bit));
    const auto hit = parity_check(words);
    REQUIRE(hit.has_value());
    CHECK(*hit == victim);
  }
}

// ---------------------------------------------------------------------------
// Hex images and register map
// ---------------------------------------------------------------------------

TEST_CASE("hex image round-trips") {
  std::mt19937_64 rng(0x8E);
  for (int i = 0; i < 1000; ++i) {
    const std::uint32_t w = static_cast<std::uint32_t>(rng());
    CHECK(parse_hex8(to_hex8(w)) == w);
    const Word128 q{rng(), rng()};
    CHECK(parse_hex32(to_hex32(q)) == q);
  }
  CHECK_THROWS_AS(parse_hex8("123"), std::invalid_argument);
  CHECK_THROWS_AS(parse_hex8("1234567G"), std::invalid_argument);
}

TEST_CASE("register map lookups are consistent") {
  const auto& map = register_map();
  CHECK(!map.empty());
  for (const auto& e : map) {
    const auto* by_name = find_register(std::string(e.name));
    REQUIRE(by_name != nullptr);
    CHECK(by_name->bar5_offset == e.bar5_offset);
    const auto* by_off = find_register(e.bar5_offset);
    REQUIRE(by_off != nullptr);
    CHECK(std::string(by_off->name) == e.name);
  }
  // Spot anchors: the watchdog registers sit next to each other.
  REQUIRE(find_register(std::string("dwr")) != nullptr);
  REQUIRE(find_register(std::string("hwr")) != nullptr);
  CHECK(find_register(std::string("dwr"))->bar5_offset == 0x474);
  CHECK(find_register(std::string("hwr"))->bar5_offset == 0x478);
  CHECK(find_register(0xFFFF) == nullptr);
  CHECK(find_register(std::string("nope")) == nullptr);
}
