#pragma once

#include <cstdint>
#include <string>

#include "lofamo/errors.hpp"

namespace lofamo::wire {

// Two-bit health code shared by every register field. Components read it as
// Normal/Sick/Broken, sensor fields as Normal/Warning/Alarm; the encoding is
// the same and the pattern 11 is reserved.
enum class StatusCode2 : std::uint8_t {
  Normal = 0b00,
  Sick = 0b01,
  Broken = 0b10,
};

inline constexpr StatusCode2 kWarning = StatusCode2::Sick;
inline constexpr StatusCode2 kAlarm = StatusCode2::Broken;

constexpr std::uint32_t encode_status2(StatusCode2 s) {
  return static_cast<std::uint32_t>(s);
}

inline StatusCode2 decode_status2(std::uint32_t bits) {
  bits &= 0b11u;
  if (bits == 0b11u) throw InvalidStatusPattern();
  return static_cast<StatusCode2>(bits);
}

inline std::string to_string(StatusCode2 s) {
  switch (s) {
    case StatusCode2::Normal: return "normal";
    case StatusCode2::Sick: return "sick";
    case StatusCode2::Broken: return "broken";
  }
  return "?";
}

// Sensor-flavoured spelling of the same code.
inline std::string sensor_to_string(StatusCode2 s) {
  switch (s) {
    case StatusCode2::Normal: return "normal";
    case StatusCode2::Sick: return "warning";
    case StatusCode2::Broken: return "alarm";
  }
  return "?";
}

// The six torus link directions. Enumerator order matches the remote fault
// descriptor register file (+X first), not the watchdog register bit order
// (Z- first); the *_bit/_lsb helpers below carry the per-register mappings.
enum class Direction : std::uint8_t {
  XPlus = 0,
  XMinus = 1,
  YPlus = 2,
  YMinus = 3,
  ZPlus = 4,
  ZMinus = 5,
};

inline constexpr int kDirectionCount = 6;

constexpr std::size_t dir_index(Direction d) { return static_cast<std::size_t>(d); }

constexpr Direction kAllDirections[kDirectionCount] = {
    Direction::XPlus,  Direction::XMinus, Direction::YPlus,
    Direction::YMinus, Direction::ZPlus,  Direction::ZMinus,
};

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::XPlus: return Direction::XMinus;
    case Direction::XMinus: return Direction::XPlus;
    case Direction::YPlus: return Direction::YMinus;
    case Direction::YMinus: return Direction::YPlus;
    case Direction::ZPlus: return Direction::ZMinus;
    case Direction::ZMinus: return Direction::ZPlus;
  }
  return d;
}

inline std::string to_string(Direction d) {
  switch (d) {
    case Direction::XPlus: return "X+";
    case Direction::XMinus: return "X-";
    case Direction::YPlus: return "Y+";
    case Direction::YMinus: return "Y-";
    case Direction::ZPlus: return "Z+";
    case Direction::ZMinus: return "Z-";
  }
  return "?";
}

}  // namespace lofamo::wire
