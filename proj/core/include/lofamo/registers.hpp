#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lofamo/status.hpp"
#include "lofamo/word128.hpp"

namespace lofamo::wire {

// ---------------------------------------------------------------------------
// DNP watchdog register (DWR), 32 bits. Owned by the on-card fault manager;
// the host side only ever clears bit 0.
//
//   0        valid (set by owner on each refresh, cleared by reader)
//   6..1     neighbour host fails, 1=fails: Z-, Z+, Y-, Y+, X-, X+
//   8..7     DNP core status
//   10..9    current sensor
//   12..11   voltage sensor
//   14..13   temperature sensor
//   26..15   link status, 2 bits each: Z-, Z+, Y-, Y+, X-, X+
//   30..27   spare, encoded 0
//   31       diagnostic-message engine busy
// ---------------------------------------------------------------------------
struct DnpWatchdogRegister {
  bool valid = false;
  std::array<bool, kDirectionCount> neighbour_fails{};   // indexed by Direction
  StatusCode2 dnp_core = StatusCode2::Normal;
  StatusCode2 current = StatusCode2::Normal;
  StatusCode2 voltage = StatusCode2::Normal;
  StatusCode2 temperature = StatusCode2::Normal;
  std::array<StatusCode2, kDirectionCount> link_status{};  // indexed by Direction
  bool lifama_busy = false;

  friend bool operator==(const DnpWatchdogRegister&, const DnpWatchdogRegister&) = default;
};

// Neighbour-fails bit position for a direction (Z- lives at bit 1, X+ at 6).
constexpr unsigned dwr_neighbour_bit(Direction d) {
  switch (d) {
    case Direction::ZMinus: return 1;
    case Direction::ZPlus: return 2;
    case Direction::YMinus: return 3;
    case Direction::YPlus: return 4;
    case Direction::XMinus: return 5;
    case Direction::XPlus: return 6;
  }
  return 0;
}

// LSB of the 2-bit link status field for a direction.
constexpr unsigned dwr_link_lsb(Direction d) {
  switch (d) {
    case Direction::ZMinus: return 15;
    case Direction::ZPlus: return 17;
    case Direction::YMinus: return 19;
    case Direction::YPlus: return 21;
    case Direction::XMinus: return 23;
    case Direction::XPlus: return 25;
  }
  return 15;
}

std::uint32_t encode_dwr(const DnpWatchdogRegister& reg);
DnpWatchdogRegister decode_dwr(std::uint32_t word);

// ---------------------------------------------------------------------------
// Host watchdog register (HWR), 32 bits. Owned by the host-side fault
// manager; the DNP side only ever clears bit 0.
//
//   0       valid
//   2..1    service network status
//   4..3    memory status
//   6..5    peripheral status
//   30..7   spare, encoded 0
//   31      send-diagnostic request (redundancy hint to the DNP)
// ---------------------------------------------------------------------------
struct HostWatchdogRegister {
  bool valid = false;
  StatusCode2 service_net = StatusCode2::Normal;
  StatusCode2 memory = StatusCode2::Normal;
  StatusCode2 peripheral = StatusCode2::Normal;
  bool send_ldm = false;

  friend bool operator==(const HostWatchdogRegister&, const HostWatchdogRegister&) = default;
};

std::uint32_t encode_hwr(const HostWatchdogRegister& reg);
HostWatchdogRegister decode_hwr(std::uint32_t word);

// ---------------------------------------------------------------------------
// Diagnostic message (LDM), 32 bits, broadcast to first neighbours inside
// Credit words.
//
//   1..0    service network
//   3..2    memory
//   5..4    peripheral
//   7..6    DNP core
//   9..8    current
//   11..10  voltage
//   13..12  temperature
//   25..14  link status, 2 bits each: Z-, Z+, Y-, Y+, X-, X+
//   30..26  spare, encoded 0
//   31      valid
// ---------------------------------------------------------------------------
struct LifamaDiagnosticMessage {
  StatusCode2 service_net = StatusCode2::Normal;
  StatusCode2 memory = StatusCode2::Normal;
  StatusCode2 peripheral = StatusCode2::Normal;
  StatusCode2 dnp_core = StatusCode2::Normal;
  StatusCode2 current = StatusCode2::Normal;
  StatusCode2 voltage = StatusCode2::Normal;
  StatusCode2 temperature = StatusCode2::Normal;
  std::array<StatusCode2, kDirectionCount> link_status{};  // indexed by Direction
  bool valid = false;

  friend bool operator==(const LifamaDiagnosticMessage&,
                         const LifamaDiagnosticMessage&) = default;
};

constexpr unsigned ldm_link_lsb(Direction d) {
  switch (d) {
    case Direction::ZMinus: return 14;
    case Direction::ZPlus: return 16;
    case Direction::YMinus: return 18;
    case Direction::YPlus: return 20;
    case Direction::XMinus: return 22;
    case Direction::XPlus: return 24;
  }
  return 14;
}

std::uint32_t encode_ldm(const LifamaDiagnosticMessage& msg);
LifamaDiagnosticMessage decode_ldm(std::uint32_t word);

// Any field reporting Broken (host side, core, sensors, or a link).
bool ldm_reports_broken(const LifamaDiagnosticMessage& msg);
bool ldm_reports_sick(const LifamaDiagnosticMessage& msg);

// ---------------------------------------------------------------------------
// Remote fault descriptor: one stored LDM image per direction, +X first.
// An all-zero word means "no report from that neighbour yet".
// ---------------------------------------------------------------------------
struct RemoteFaultDescriptor {
  std::array<std::uint32_t, kDirectionCount> words{};

  std::optional<LifamaDiagnosticMessage> report(Direction d) const {
    const std::uint32_t w = words[dir_index(d)];
    if (w == 0) return std::nullopt;
    return decode_ldm(w);
  }
};

// ---------------------------------------------------------------------------
// Credit word carrying flow-control state plus the diagnostic side channel.
// The occupancy field and the 32-bit LDM window must not overlap; positions
// are configurable because the hardware reserves them per build.
// ---------------------------------------------------------------------------
struct CreditLayout {
  unsigned occupancy_lsb = 0;
  unsigned occupancy_width = 16;
  unsigned ldm_lsb = 64;

  void validate() const;  // throws std::invalid_argument on overlap/overflow
};

Word128 embed_ldm(Word128 credit, std::uint32_t ldm_word,
                  const CreditLayout& layout = {});
std::uint32_t extract_ldm(const Word128& credit, const CreditLayout& layout = {});

std::uint64_t credit_occupancy(const Word128& credit, const CreditLayout& layout = {});
Word128 set_credit_occupancy(Word128 credit, std::uint64_t occupancy_words,
                             const CreditLayout& layout = {});

// ---------------------------------------------------------------------------
// Register address map (BAR5 window) for trace annotation.
// ---------------------------------------------------------------------------
struct RegisterMapEntry {
  const char* name;
  std::uint32_t bar5_offset;
  unsigned reg_index;
};

const std::vector<RegisterMapEntry>& register_map();
const RegisterMapEntry* find_register(std::uint32_t bar5_offset);
const RegisterMapEntry* find_register(const std::string& name);

}  // namespace lofamo::wire
