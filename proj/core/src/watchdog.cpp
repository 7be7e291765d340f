#include "lofamo/watchdog.hpp"

#include <algorithm>
#include <stdexcept>

#include "lofamo/errors.hpp"

namespace lofamo::watchdog {

using wire::Direction;
using wire::StatusCode2;

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

void WatchdogConfig::validate() const {
  if (t_write_us < kWatchdogMinUs || t_write_us > kWatchdogMaxUs) {
    throw std::invalid_argument("t_write out of range [1ms, 65s]");
  }
  if (t_read_us < kWatchdogMinUs || t_read_us > kWatchdogMaxUs) {
    throw std::invalid_argument("t_read out of range [1ms, 65s]");
  }
  if (!(t_write_us < t_read_us)) {
    throw std::invalid_argument("t_write < t_read");
  }
}

// ---------------------------------------------------------------------------
// Sensors
// ---------------------------------------------------------------------------

void MetricThresholds::validate() const {
  if (!(alarm_low <= warning_low && warning_low < warning_high &&
        warning_high <= alarm_high)) {
    throw std::invalid_argument(
        "alarm_low <= warning_low < warning_high <= alarm_high");
  }
}

void SensorThresholds::validate() const {
  temperature.validate();
  voltage.validate();
  current.validate();
}

StatusCode2 sensor_classify(const MetricThresholds& t, double reading) {
  if (reading >= t.warning_low && reading <= t.warning_high) {
    return StatusCode2::Normal;
  }
  if (reading >= t.alarm_low && reading <= t.alarm_high) {
    return wire::kWarning;
  }
  return wire::kAlarm;
}

// ---------------------------------------------------------------------------
// Link health
// ---------------------------------------------------------------------------

void LinkHealth::reset() { *this = LinkHealth{}; }

StatusCode2 link_health_update(LinkHealth& h, const LinkHealthConfig& cfg,
                               const LinkCounters& delta) {
  h.crc_errors += delta.crc_errors;
  h.packets += delta.packets;
  h.bytes += delta.bytes;
  h.credit_timeout = delta.credit_timeout;
  if (!h.sick_latched && h.packets >= cfg.min_packets && h.packets > 0) {
    const double ratio =
        static_cast<double>(h.crc_errors) / static_cast<double>(h.packets);
    if (ratio >= cfg.sick_ratio_threshold) h.sick_latched = true;
  }
  if (h.credit_timeout) {
    h.status = StatusCode2::Broken;
  } else if (h.sick_latched) {
    h.status = StatusCode2::Sick;
  } else {
    h.status = StatusCode2::Normal;
  }
  return h.status;
}

// ---------------------------------------------------------------------------
// Fault taxonomy
// ---------------------------------------------------------------------------

Detector fault_detector(FaultClass c) {
  switch (c) {
    case FaultClass::LinkSick: return Detector::LinkTestDfm;
    case FaultClass::LinkBroken: return Detector::Dfm;
    case FaultClass::TemperatureThreshold:
    case FaultClass::VoltageThreshold:
    case FaultClass::CurrentThreshold: return Detector::SensorsDfm;
    case FaultClass::DnpCoreSick: return Detector::Dfm;
    case FaultClass::DnpCoreMeltdown: return Detector::Hfm;
    case FaultClass::HostMemory:
    case FaultClass::HostPeripheral:
    case FaultClass::HostServiceNet: return Detector::Hfm;
    case FaultClass::HostBreakdown: return Detector::Dfm;
  }
  return Detector::Dfm;
}

Storage fault_storage(FaultClass c) {
  switch (c) {
    case FaultClass::HostMemory:
    case FaultClass::HostPeripheral:
    case FaultClass::HostServiceNet: return Storage::HwrSpare;
    case FaultClass::HostBreakdown: return Storage::DwrNeighbourBits;
    default: return Storage::DwrBits;
  }
}

InfoPath fault_path(FaultClass c) {
  switch (c) {
    case FaultClass::HostServiceNet:
    case FaultClass::HostBreakdown: return InfoPath::LiFaMa3D;
    default: return InfoPath::ServiceNet;
  }
}

std::string to_string(FaultClass c) {
  switch (c) {
    case FaultClass::LinkSick: return "link_sick";
    case FaultClass::LinkBroken: return "link_broken";
    case FaultClass::TemperatureThreshold: return "temperature_threshold";
    case FaultClass::VoltageThreshold: return "voltage_threshold";
    case FaultClass::CurrentThreshold: return "current_threshold";
    case FaultClass::DnpCoreSick: return "dnp_core_sick";
    case FaultClass::DnpCoreMeltdown: return "dnp_core_meltdown";
    case FaultClass::HostMemory: return "host_memory";
    case FaultClass::HostPeripheral: return "host_peripheral";
    case FaultClass::HostServiceNet: return "host_service_net";
    case FaultClass::HostBreakdown: return "host_breakdown";
  }
  return "?";
}

std::optional<FaultClass> fault_class_from_string(const std::string& s) {
  static const struct {
    const char* name;
    FaultClass cls;
  } kTable[] = {
      {"link_sick", FaultClass::LinkSick},
      {"link_broken", FaultClass::LinkBroken},
      {"temperature_threshold", FaultClass::TemperatureThreshold},
      {"voltage_threshold", FaultClass::VoltageThreshold},
      {"current_threshold", FaultClass::CurrentThreshold},
      {"dnp_core_sick", FaultClass::DnpCoreSick},
      {"dnp_core_meltdown", FaultClass::DnpCoreMeltdown},
      {"host_memory", FaultClass::HostMemory},
      {"host_peripheral", FaultClass::HostPeripheral},
      {"host_service_net", FaultClass::HostServiceNet},
      {"host_breakdown", FaultClass::HostBreakdown},
  };
  for (const auto& e : kTable) {
    if (s == e.name) return e.cls;
  }
  return std::nullopt;
}

std::string to_string(Detector d) {
  switch (d) {
    case Detector::Dfm: return "dfm";
    case Detector::Hfm: return "hfm";
    case Detector::SensorsDfm: return "sensors_dfm";
    case Detector::LinkTestDfm: return "link_test_dfm";
  }
  return "?";
}

std::string to_string(Storage s) {
  switch (s) {
    case Storage::DwrBits: return "dwr_bits";
    case Storage::HwrSpare: return "hwr_spare";
    case Storage::DwrNeighbourBits: return "dwr_neighbour_bits";
  }
  return "?";
}

std::string to_string(InfoPath p) {
  switch (p) {
    case InfoPath::ServiceNet: return "service_net";
    case InfoPath::LiFaMa3D: return "lifama_3d";
  }
  return "?";
}

Finding make_finding(TimeUs t, FaultClass c, StatusCode2 st,
                     std::optional<Direction> dir) {
  Finding f;
  f.time_us = t;
  f.cls = c;
  f.status = st;
  f.direction = dir;
  f.detector = fault_detector(c);
  f.storage = fault_storage(c);
  f.path = fault_path(c);
  return f;
}

std::string fault_key(FaultClass c, std::optional<Direction> dir) {
  std::string key = to_string(c);
  if (dir) key += "(" + wire::to_string(*dir) + ")";
  return key;
}

namespace {

bool is_sensor_class(FaultClass c) {
  return c == FaultClass::TemperatureThreshold ||
         c == FaultClass::VoltageThreshold ||
         c == FaultClass::CurrentThreshold;
}

std::string status_label(FaultClass c, StatusCode2 st) {
  return is_sensor_class(c) ? wire::sensor_to_string(st) : wire::to_string(st);
}

}  // namespace

std::string finding_csv_row(const Finding& f, const std::string& node) {
  return std::to_string(f.time_us) + "," + node + "," + to_string(f.detector) +
         "," + fault_key(f.cls, f.direction) + "," +
         status_label(f.cls, f.status) + "," + to_string(f.path);
}

// ---------------------------------------------------------------------------
// Service-network monitor
// ---------------------------------------------------------------------------

std::string to_string(SnetState s) {
  switch (s) {
    case SnetState::Normal: return "normal";
    case SnetState::WaitingRetry: return "waiting_retry";
    case SnetState::Broken: return "broken";
  }
  return "?";
}

SnetState SnetMonitor::step(TimeUs, bool pong_received) {
  const bool got = pong_received || pong_seen;
  pong_seen = false;
  if (got) {
    state = SnetState::Normal;
  } else if (state == SnetState::Normal) {
    state = SnetState::WaitingRetry;
  } else {
    state = SnetState::Broken;
  }
  return state;
}

SnetState snet_monitor_step(SnetMonitor& m, TimeUs now, bool pong_received) {
  return m.step(now, pong_received);
}

// ---------------------------------------------------------------------------
// DNP-side fault manager
// ---------------------------------------------------------------------------

DnpFaultManager::DnpFaultManager(WatchdogConfig cfg, SensorThresholds thresholds,
                                 LinkHealthConfig link_cfg, FaultMask mask,
                                 DfmOptions opts)
    : cfg_(cfg),
      thresholds_(thresholds),
      link_cfg_(link_cfg),
      mask_(mask),
      opts_(opts) {
  cfg_.validate();
  thresholds_.validate();
}

void DnpFaultManager::start(TimeUs now) {
  next_write_us_ = now + cfg_.t_write_us;
  next_read_us_ = now + cfg_.t_read_us;
  last_hwr_valid_us_ = now;
}

TimeUs DnpFaultManager::next_due() const {
  return std::min(next_write_us_, next_read_us_);
}

DfmTickResult DnpFaultManager::tick(TimeUs now, const DfmInputs& in,
                                    RegisterFile& regs) {
  DfmTickResult out;
  // Read before write so a host declared dead at this instant broadcasts its
  // diagnostic on the same tick when both timers coincide.
  if (now >= next_read_us_) {
    read_hwr(now, regs, out);
    while (next_read_us_ <= now) next_read_us_ += cfg_.t_read_us;
  }
  if (now >= next_write_us_) {
    refresh_dwr(now, in, regs, out);
    while (next_write_us_ <= now) next_write_us_ += cfg_.t_write_us;
  }
  out.host_broken = host_broken_;
  return out;
}

void DnpFaultManager::refresh_dwr(TimeUs now, const DfmInputs& in,
                                  RegisterFile& regs, DfmTickResult& out) {
  out.wrote = true;

  for (Direction d : wire::kAllDirections) {
    const auto i = wire::dir_index(d);
    const StatusCode2 st =
        link_health_update(link_health_[i], link_cfg_, in.link_deltas[i]);
    if (st != prev_link_[i]) {
      // Sick and Broken are separate classes; a class that stops applying is
      // cleared with a Normal-status finding before the new one is raised.
      const auto class_of = [](StatusCode2 s) {
        return s == StatusCode2::Broken ? FaultClass::LinkBroken
                                        : FaultClass::LinkSick;
      };
      if (prev_link_[i] != StatusCode2::Normal &&
          (st == StatusCode2::Normal ||
           class_of(st) != class_of(prev_link_[i]))) {
        const FaultClass old_cls = class_of(prev_link_[i]);
        if (mask_.enabled(old_cls)) {
          out.findings.push_back(
              make_finding(now, old_cls, StatusCode2::Normal, d));
        }
      }
      if (st != StatusCode2::Normal) {
        const FaultClass new_cls = class_of(st);
        if (mask_.enabled(new_cls)) {
          out.findings.push_back(make_finding(now, new_cls, st, d));
        }
      }
      prev_link_[i] = st;
    }
    dwr_.link_status[i] = st;
  }

  const auto sensor_transition = [&](StatusCode2& prev, StatusCode2 st,
                                     FaultClass cls) {
    if (st != prev) {
      if (mask_.enabled(cls)) out.findings.push_back(make_finding(now, cls, st));
      prev = st;
    }
  };
  const StatusCode2 temp =
      sensor_classify(thresholds_.temperature, in.sensors.temperature);
  const StatusCode2 volt =
      sensor_classify(thresholds_.voltage, in.sensors.voltage);
  const StatusCode2 curr =
      sensor_classify(thresholds_.current, in.sensors.current);
  sensor_transition(prev_temp_, temp, FaultClass::TemperatureThreshold);
  sensor_transition(prev_volt_, volt, FaultClass::VoltageThreshold);
  sensor_transition(prev_curr_, curr, FaultClass::CurrentThreshold);
  dwr_.temperature = temp;
  dwr_.voltage = volt;
  dwr_.current = curr;

  if (in.core_probe != prev_core_) {
    if (mask_.enabled(FaultClass::DnpCoreSick)) {
      out.findings.push_back(
          make_finding(now, FaultClass::DnpCoreSick, in.core_probe));
    }
    prev_core_ = in.core_probe;
  }
  dwr_.dnp_core = in.core_probe;

  // Neighbour-fails bits staged by apply_remote_ldm enter the register here.
  for (Direction d : wire::kAllDirections) {
    const auto i = wire::dir_index(d);
    if (dwr_.neighbour_fails[i] != prev_neighbour_[i]) {
      if (mask_.enabled(FaultClass::HostBreakdown)) {
        out.findings.push_back(make_finding(
            now, FaultClass::HostBreakdown,
            dwr_.neighbour_fails[i] ? StatusCode2::Broken : StatusCode2::Normal,
            d));
      }
      prev_neighbour_[i] = dwr_.neighbour_fails[i];
    }
  }

  // Diagnostic broadcast: active while the own host is dead, while the host
  // reports its service network down (the 3D path is then the only way out),
  // or while the host explicitly requests redundancy. One final all-clear
  // message goes out when the condition ends.
  const bool active = host_broken_ ||
                      last_hwr_.service_net != StatusCode2::Normal ||
                      last_hwr_.send_ldm;
  dwr_.lifama_busy = active;
  if (active) {
    out.ldm_broadcast = wire::encode_ldm(build_ldm());
    prev_broadcast_active_ = true;
  } else if (prev_broadcast_active_) {
    out.ldm_broadcast = wire::encode_ldm(build_ldm());
    prev_broadcast_active_ = false;
  }

  dwr_.valid = true;
  regs.dwr = wire::encode_dwr(dwr_);
}

void DnpFaultManager::read_hwr(TimeUs now, RegisterFile& regs,
                               DfmTickResult& out) {
  out.read = true;
  const std::uint32_t w = regs.hwr;
  if (w & 1u) {
    last_hwr_ = wire::decode_hwr(w);
    last_hwr_valid_us_ = now;
    out.read_saw_valid = true;
    regs.hwr = w & ~1u;  // invalidate only; content stays for debugging
    if (host_broken_) {
      host_broken_ = false;
      if (mask_.enabled(FaultClass::HostBreakdown)) {
        out.findings.push_back(make_finding(now, FaultClass::HostBreakdown,
                                            StatusCode2::Normal));
      }
    }
  } else if (!host_broken_ && now - last_hwr_valid_us_ >= cfg_.t_read_us) {
    host_broken_ = true;
    if (mask_.enabled(FaultClass::HostBreakdown)) {
      out.findings.push_back(
          make_finding(now, FaultClass::HostBreakdown, StatusCode2::Broken));
    }
  }
  out.host_broken = host_broken_;
}

void DnpFaultManager::apply_remote_ldm(Direction from, std::uint32_t ldm_word,
                                       RegisterFile& regs) {
  const wire::LifamaDiagnosticMessage msg = wire::decode_ldm(ldm_word);
  if (!msg.valid) throw InvalidLdm();
  regs.rfd[wire::dir_index(from)] = ldm_word;
  const bool fail =
      neighbour_reported_fail(ldm_word) && mask_.enabled(FaultClass::HostBreakdown);
  dwr_.neighbour_fails[wire::dir_index(from)] = fail;
}

wire::LifamaDiagnosticMessage DnpFaultManager::build_ldm() const {
  wire::LifamaDiagnosticMessage m;
  m.valid = true;
  if (host_broken_) {
    m.service_net = StatusCode2::Broken;
    m.memory = StatusCode2::Broken;
    m.peripheral = StatusCode2::Broken;
  } else {
    m.service_net = last_hwr_.service_net;
    m.memory = last_hwr_.memory;
    m.peripheral = last_hwr_.peripheral;
  }
  m.dnp_core = dwr_.dnp_core;
  m.current = dwr_.current;
  m.voltage = dwr_.voltage;
  m.temperature = dwr_.temperature;
  m.link_status = dwr_.link_status;
  return m;
}

void DnpFaultManager::reset_link_health(Direction d) {
  link_health_[wire::dir_index(d)].reset();
}

bool DnpFaultManager::neighbour_reported_fail(std::uint32_t ldm_word) const {
  const wire::LifamaDiagnosticMessage msg = wire::decode_ldm(ldm_word);
  // Host breakdown shows as all three host-side fields at the trigger level.
  const StatusCode2 level =
      opts_.neighbour_bit_on_sick ? StatusCode2::Sick : StatusCode2::Broken;
  const auto at_least = [level](StatusCode2 s) {
    return static_cast<unsigned>(s) >= static_cast<unsigned>(level);
  };
  return at_least(msg.service_net) && at_least(msg.memory) &&
         at_least(msg.peripheral);
}

// ---------------------------------------------------------------------------
// Host-side fault manager
// ---------------------------------------------------------------------------

HostFaultManager::HostFaultManager(WatchdogConfig cfg, FaultMask mask,
                                   HfmOptions opts)
    : cfg_(cfg), mask_(mask), opts_(opts) {
  cfg_.validate();
}

void HostFaultManager::start(TimeUs now) {
  next_write_us_ = now + cfg_.t_write_us;
  next_read_us_ = now + cfg_.t_read_us;
  last_dwr_valid_us_ = now;
}

TimeUs HostFaultManager::next_due() const {
  return std::min(next_write_us_, next_read_us_);
}

HfmTickResult HostFaultManager::tick(TimeUs now, const HostProbes& probes,
                                     RegisterFile& regs) {
  HfmTickResult out;
  if (now >= next_read_us_) {
    read_dwr(now, regs, out);
    while (next_read_us_ <= now) next_read_us_ += cfg_.t_read_us;
  }
  if (now >= next_write_us_) {
    write_hwr(now, probes, regs, out);
    while (next_write_us_ <= now) next_write_us_ += cfg_.t_write_us;
  }
  flush_retransmits(now, out);
  out.dnp_broken = dnp_broken_;
  return out;
}

void HostFaultManager::write_hwr(TimeUs now, const HostProbes& probes,
                                 RegisterFile& regs, HfmTickResult& out) {
  out.wrote = true;

  if (probes.memory != prev_memory_) {
    raise(now, FaultClass::HostMemory, probes.memory, std::nullopt,
          std::nullopt, out, true);
    prev_memory_ = probes.memory;
  }
  if (probes.peripheral != prev_peripheral_) {
    raise(now, FaultClass::HostPeripheral, probes.peripheral, std::nullopt,
          std::nullopt, out, true);
    prev_peripheral_ = probes.peripheral;
  }

  // The ping monitor advances on window boundaries; the state enters HWR (and
  // the diagnostic stream) on the next register refresh.
  if (monitor_.state != prev_snet_) {
    StatusCode2 st = StatusCode2::Normal;
    if (monitor_.state == SnetState::WaitingRetry) st = StatusCode2::Sick;
    if (monitor_.state == SnetState::Broken) st = StatusCode2::Broken;
    raise(now, FaultClass::HostServiceNet, st, std::nullopt, std::nullopt, out,
          true);
    prev_snet_ = monitor_.state;
  }

  wire::HostWatchdogRegister hwr;
  hwr.valid = true;
  switch (monitor_.state) {
    case SnetState::Normal: hwr.service_net = StatusCode2::Normal; break;
    case SnetState::WaitingRetry: hwr.service_net = StatusCode2::Sick; break;
    case SnetState::Broken: hwr.service_net = StatusCode2::Broken; break;
  }
  hwr.memory = probes.memory;
  hwr.peripheral = probes.peripheral;
  hwr.send_ldm = opts_.request_ldm;
  regs.hwr = wire::encode_hwr(hwr);
}

void HostFaultManager::read_dwr(TimeUs now, RegisterFile& regs,
                                HfmTickResult& out) {
  out.read = true;
  const std::uint32_t w = regs.dwr;
  if (w & 1u) {
    const wire::DnpWatchdogRegister dwr = wire::decode_dwr(w);
    last_dwr_valid_us_ = now;
    out.read_saw_valid = true;
    regs.dwr = w & ~1u;

    if (dnp_broken_) {
      dnp_broken_ = false;
      raise(now, FaultClass::DnpCoreMeltdown, StatusCode2::Normal, std::nullopt,
            std::nullopt, out, true);
    }

    // Forward the register content to the supervisor stream. Findings for
    // these were already recorded at the detecting manager.
    for (Direction d : wire::kAllDirections) {
      const StatusCode2 st = dwr.link_status[wire::dir_index(d)];
      raise(now, FaultClass::LinkBroken,
            st == StatusCode2::Broken ? StatusCode2::Broken
                                      : StatusCode2::Normal,
            std::nullopt, d, out, false);
      raise(now, FaultClass::LinkSick,
            st == StatusCode2::Sick ? StatusCode2::Sick : StatusCode2::Normal,
            std::nullopt, d, out, false);
    }
    raise(now, FaultClass::TemperatureThreshold, dwr.temperature, std::nullopt,
          std::nullopt, out, false);
    raise(now, FaultClass::VoltageThreshold, dwr.voltage, std::nullopt,
          std::nullopt, out, false);
    raise(now, FaultClass::CurrentThreshold, dwr.current, std::nullopt,
          std::nullopt, out, false);
    raise(now, FaultClass::DnpCoreSick, dwr.dnp_core, std::nullopt,
          std::nullopt, out, false);
    for (Direction d : wire::kAllDirections) {
      raise(now, FaultClass::HostBreakdown,
            dwr.neighbour_fails[wire::dir_index(d)] ? StatusCode2::Broken
                                                    : StatusCode2::Normal,
            d, std::nullopt, out, false);
    }
  } else if (!dnp_broken_ && now - last_dwr_valid_us_ >= cfg_.t_read_us) {
    dnp_broken_ = true;
    raise(now, FaultClass::DnpCoreMeltdown, StatusCode2::Broken, std::nullopt,
          std::nullopt, out, true);
  }
  out.dnp_broken = dnp_broken_;
}

SnetState HostFaultManager::snet_ping_tick(TimeUs now) {
  return monitor_.step(now, false);
}

void HostFaultManager::ack(const std::string& key) {
  const auto it = pending_.find(key);
  if (it == pending_.end()) return;
  // A clear acked by the supervisor ends the stream entirely.
  if (it->second.diag.status == StatusCode2::Normal) known_.erase(key);
  pending_.erase(it);
}

void HostFaultManager::raise(TimeUs now, FaultClass cls, StatusCode2 status,
                             std::optional<Direction> origin_via,
                             std::optional<Direction> link_dir,
                             HfmTickResult& out, bool local_finding) {
  if (!mask_.enabled(cls)) return;
  const std::optional<Direction> dir = link_dir ? link_dir : origin_via;
  const std::string key = fault_key(cls, dir);
  const auto it = known_.find(key);
  const StatusCode2 prev = it == known_.end() ? StatusCode2::Normal : it->second;
  if (prev == status) return;
  known_[key] = status;

  Diagnostic d;
  d.time_us = now;
  d.cls = cls;
  d.status = status;
  d.origin_via = origin_via;
  d.link_dir = link_dir;
  out.outbox.push_back(d);
  pending_[key] = Pending{d, now + cfg_.t_read_us, false};
  if (local_finding) {
    out.findings.push_back(make_finding(now, cls, status, dir));
  }
}

void HostFaultManager::flush_retransmits(TimeUs now, HfmTickResult& out) {
  for (auto& [key, p] : pending_) {
    if (p.acked || p.next_retx_us > now) continue;
    out.outbox.push_back(p.diag);
    p.next_retx_us = now + cfg_.t_read_us;
  }
}

std::string diagnostic_key(const Diagnostic& d) {
  const std::optional<Direction> dir = d.link_dir ? d.link_dir : d.origin_via;
  return fault_key(d.cls, dir);
}

}  // namespace lofamo::watchdog
