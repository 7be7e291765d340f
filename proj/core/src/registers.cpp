#include "lofamo/registers.hpp"

#include <stdexcept>

namespace lofamo::wire {

std::uint32_t encode_dwr(const DnpWatchdogRegister& reg) {
  std::uint32_t w = 0;
  if (reg.valid) w |= 1u;
  for (Direction d : kAllDirections) {
    if (reg.neighbour_fails[dir_index(d)]) w |= 1u << dwr_neighbour_bit(d);
  }
  w |= encode_status2(reg.dnp_core) << 7;
  w |= encode_status2(reg.current) << 9;
  w |= encode_status2(reg.voltage) << 11;
  w |= encode_status2(reg.temperature) << 13;
  for (Direction d : kAllDirections) {
    w |= encode_status2(reg.link_status[dir_index(d)]) << dwr_link_lsb(d);
  }
  if (reg.lifama_busy) w |= 1u << 31;
  return w;
}

DnpWatchdogRegister decode_dwr(std::uint32_t word) {
  DnpWatchdogRegister reg;
  reg.valid = (word & 1u) != 0;
  for (Direction d : kAllDirections) {
    reg.neighbour_fails[dir_index(d)] = (word >> dwr_neighbour_bit(d)) & 1u;
  }
  reg.dnp_core = decode_status2(word >> 7);
  reg.current = decode_status2(word >> 9);
  reg.voltage = decode_status2(word >> 11);
  reg.temperature = decode_status2(word >> 13);
  for (Direction d : kAllDirections) {
    reg.link_status[dir_index(d)] = decode_status2(word >> dwr_link_lsb(d));
  }
  reg.lifama_busy = (word >> 31) & 1u;
  return reg;
}

std::uint32_t encode_hwr(const HostWatchdogRegister& reg) {
  std::uint32_t w = 0;
  if (reg.valid) w |= 1u;
  w |= encode_status2(reg.service_net) << 1;
  w |= encode_status2(reg.memory) << 3;
  w |= encode_status2(reg.peripheral) << 5;
  if (reg.send_ldm) w |= 1u << 31;
  return w;
}

HostWatchdogRegister decode_hwr(std::uint32_t word) {
  HostWatchdogRegister reg;
  reg.valid = (word & 1u) != 0;
  reg.service_net = decode_status2(word >> 1);
  reg.memory = decode_status2(word >> 3);
  reg.peripheral = decode_status2(word >> 5);
  reg.send_ldm = (word >> 31) & 1u;
  return reg;
}

std::uint32_t encode_ldm(const LifamaDiagnosticMessage& msg) {
  std::uint32_t w = 0;
  w |= encode_status2(msg.service_net) << 0;
  w |= encode_status2(msg.memory) << 2;
  w |= encode_status2(msg.peripheral) << 4;
  w |= encode_status2(msg.dnp_core) << 6;
  w |= encode_status2(msg.current) << 8;
  w |= encode_status2(msg.voltage) << 10;
  w |= encode_status2(msg.temperature) << 12;
  for (Direction d : kAllDirections) {
    w |= encode_status2(msg.link_status[dir_index(d)]) << ldm_link_lsb(d);
  }
  if (msg.valid) w |= 1u << 31;
  return w;
}

LifamaDiagnosticMessage decode_ldm(std::uint32_t word) {
  LifamaDiagnosticMessage msg;
  msg.service_net = decode_status2(word >> 0);
  msg.memory = decode_status2(word >> 2);
  msg.peripheral = decode_status2(word >> 4);
  msg.dnp_core = decode_status2(word >> 6);
  msg.current = decode_status2(word >> 8);
  msg.voltage = decode_status2(word >> 10);
  msg.temperature = decode_status2(word >> 12);
  for (Direction d : kAllDirections) {
    msg.link_status[dir_index(d)] = decode_status2(word >> ldm_link_lsb(d));
  }
  msg.valid = (word >> 31) & 1u;
  return msg;
}

bool ldm_reports_broken(const LifamaDiagnosticMessage& m) {
  const StatusCode2 b = StatusCode2::Broken;
  if (m.service_net == b || m.memory == b || m.peripheral == b || m.dnp_core == b ||
      m.current == b || m.voltage == b || m.temperature == b) {
    return true;
  }
  for (StatusCode2 s : m.link_status) {
    if (s == b) return true;
  }
  return false;
}

bool ldm_reports_sick(const LifamaDiagnosticMessage& m) {
  const StatusCode2 s2 = StatusCode2::Sick;
  if (m.service_net == s2 || m.memory == s2 || m.peripheral == s2 ||
      m.dnp_core == s2 || m.current == s2 || m.voltage == s2 ||
      m.temperature == s2) {
    return true;
  }
  for (StatusCode2 s : m.link_status) {
    if (s == s2) return true;
  }
  return false;
}

void CreditLayout::validate() const {
  if (occupancy_width == 0 || occupancy_width > 64) {
    throw std::invalid_argument("credit occupancy width must be 1..64");
  }
  if (occupancy_lsb + occupancy_width > 128 || ldm_lsb + 32 > 128) {
    throw std::invalid_argument("credit field exceeds 128 bits");
  }
  const unsigned occ_end = occupancy_lsb + occupancy_width;
  const unsigned ldm_end = ldm_lsb + 32;
  const bool disjoint = occ_end <= ldm_lsb || ldm_end <= occupancy_lsb;
  if (!disjoint) throw std::invalid_argument("credit occupancy overlaps the LDM window");
}

Word128 embed_ldm(Word128 credit, std::uint32_t ldm_word, const CreditLayout& layout) {
  layout.validate();
  credit.set_field(layout.ldm_lsb, 32, ldm_word);
  return credit;
}

std::uint32_t extract_ldm(const Word128& credit, const CreditLayout& layout) {
  layout.validate();
  return static_cast<std::uint32_t>(credit.field(layout.ldm_lsb, 32));
}

std::uint64_t credit_occupancy(const Word128& credit, const CreditLayout& layout) {
  layout.validate();
  return credit.field(layout.occupancy_lsb, layout.occupancy_width);
}

Word128 set_credit_occupancy(Word128 credit, std::uint64_t occupancy_words,
                             const CreditLayout& layout) {
  layout.validate();
  credit.set_field(layout.occupancy_lsb, layout.occupancy_width, occupancy_words);
  return credit;
}

const std::vector<RegisterMapEntry>& register_map() {
  static const std::vector<RegisterMapEntry> map = {
      {"rfd_x_plus", 0x44C, 19},  {"rfd_x_minus", 0x450, 20},
      {"rfd_y_plus", 0x454, 21},  {"rfd_y_minus", 0x458, 22},
      {"rfd_z_plus", 0x45C, 23},  {"rfd_z_minus", 0x460, 24},
      {"watchdog_timer", 0x464, 25},
      {"fault_mask", 0x468, 26},
      {"sensor_thresholds", 0x46C, 27},
      {"dwr", 0x474, 29},
      {"hwr", 0x478, 30},
  };
  return map;
}

const RegisterMapEntry* find_register(std::uint32_t bar5_offset) {
  for (const auto& e : register_map()) {
    if (e.bar5_offset == bar5_offset) return &e;
  }
  return nullptr;
}

const RegisterMapEntry* find_register(const std::string& name) {
  for (const auto& e : register_map()) {
    if (name == e.name) return &e;
  }
  return nullptr;
}

}  // namespace lofamo::wire
