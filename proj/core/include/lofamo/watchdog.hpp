#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lofamo/registers.hpp"
#include "lofamo/status.hpp"

namespace lofamo {

// Virtual time, integer microseconds.
using TimeUs = std::int64_t;

namespace watchdog {

// ---------------------------------------------------------------------------
// Mutual watchdog timing. Each side rewrites its own register every t_write
// and reads (and invalidates) the peer register every t_read. t_write <
// t_read guarantees a fresh valid bit under every phase alignment, so a read
// that finds the bit clear and no validation for >= t_read is a fault, not a
// race.
// ---------------------------------------------------------------------------
struct WatchdogConfig {
  TimeUs t_write_us = 10'000;
  TimeUs t_read_us = 20'000;

  void validate() const;  // 1 ms..65 s each, t_write < t_read
};

inline constexpr TimeUs kWatchdogMinUs = 1'000;
inline constexpr TimeUs kWatchdogMaxUs = 65'000'000;

// ---------------------------------------------------------------------------
// Sensor classification. warning_low/high bound the normal band,
// alarm_low/high bound the warning band; beyond the alarm bounds the reading
// is an alarm.
// ---------------------------------------------------------------------------
struct MetricThresholds {
  double warning_low = 0;
  double warning_high = 0;
  double alarm_low = 0;
  double alarm_high = 0;

  void validate() const;  // alarm_low <= warning_low < warning_high <= alarm_high
};

struct SensorThresholds {
  MetricThresholds temperature{10.0, 70.0, 0.0, 85.0};
  MetricThresholds voltage{11.4, 12.6, 10.8, 13.2};
  MetricThresholds current{2.0, 20.0, 0.0, 25.0};

  void validate() const;
};

wire::StatusCode2 sensor_classify(const MetricThresholds& t, double reading);

struct SensorReadings {
  double temperature = 25.0;
  double voltage = 12.0;
  double current = 10.0;
};

// ---------------------------------------------------------------------------
// Link receiver health. Broken follows the credit-timeout flag; Sick latches
// once the CRC error ratio crosses the threshold on an adequate sample.
// ---------------------------------------------------------------------------
struct LinkCounters {
  std::uint64_t crc_errors = 0;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  bool credit_timeout = false;
};

struct LinkHealthConfig {
  double sick_ratio_threshold = 0.05;
  std::uint64_t min_packets = 100;
};

struct LinkHealth {
  std::uint64_t crc_errors = 0;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  bool credit_timeout = false;
  bool sick_latched = false;
  wire::StatusCode2 status = wire::StatusCode2::Normal;

  void reset();
};

wire::StatusCode2 link_health_update(LinkHealth& h, const LinkHealthConfig& cfg,
                                     const LinkCounters& delta);

// ---------------------------------------------------------------------------
// Fault taxonomy: class, detecting manager, register that stores the first
// diagnostic bit, and the path the information takes toward the supervisor.
// ---------------------------------------------------------------------------
enum class FaultClass : std::uint8_t {
  LinkSick,
  LinkBroken,
  TemperatureThreshold,
  VoltageThreshold,
  CurrentThreshold,
  DnpCoreSick,
  DnpCoreMeltdown,
  HostMemory,
  HostPeripheral,
  HostServiceNet,
  HostBreakdown,
};

inline constexpr int kFaultClassCount = 11;

enum class Detector : std::uint8_t { Dfm, Hfm, SensorsDfm, LinkTestDfm };
enum class Storage : std::uint8_t { DwrBits, HwrSpare, DwrNeighbourBits };
enum class InfoPath : std::uint8_t { ServiceNet, LiFaMa3D };

Detector fault_detector(FaultClass c);
Storage fault_storage(FaultClass c);
InfoPath fault_path(FaultClass c);

std::string to_string(FaultClass c);
std::optional<FaultClass> fault_class_from_string(const std::string& s);
std::string to_string(Detector d);
std::string to_string(Storage s);
std::string to_string(InfoPath p);

// Bit-per-class suppression mask; a clear bit silences findings, LDM
// neighbour bits and diagnostic enqueue for that class.
class FaultMask {
public:
  static FaultMask all() { return FaultMask{0x7FF}; }
  static FaultMask none() { return FaultMask{0}; }
  FaultMask() : bits_(0x7FF) {}
  explicit FaultMask(std::uint32_t bits) : bits_(bits) {}

  bool enabled(FaultClass c) const {
    return (bits_ >> static_cast<unsigned>(c)) & 1u;
  }
  void set(FaultClass c, bool on) {
    const std::uint32_t bit = 1u << static_cast<unsigned>(c);
    bits_ = on ? (bits_ | bit) : (bits_ & ~bit);
  }
  std::uint32_t bits() const { return bits_; }

private:
  std::uint32_t bits_;
};

// A detection event as recorded by the managers.
struct Finding {
  TimeUs time_us = 0;
  FaultClass cls = FaultClass::LinkSick;
  wire::StatusCode2 status = wire::StatusCode2::Normal;
  std::optional<wire::Direction> direction;  // link class or remote report
  Detector detector = Detector::Dfm;
  Storage storage = Storage::DwrBits;
  InfoPath path = InfoPath::ServiceNet;
};

Finding make_finding(TimeUs t, FaultClass c, wire::StatusCode2 st,
                     std::optional<wire::Direction> dir = std::nullopt);

// fault_class plus link direction, e.g. "link_broken(X+)".
std::string fault_key(FaultClass c, std::optional<wire::Direction> dir);

// Serialized as time,node,detector,fault_class,status,path.
std::string finding_csv_row(const Finding& f, const std::string& node);

// ---------------------------------------------------------------------------
// Watchdog register file of one node, resident in the DNP. The DFM owns DWR
// and the RFD bank and may only clear HWR.valid; the HFM owns HWR and may
// only clear DWR.valid.
// ---------------------------------------------------------------------------
struct RegisterFile {
  std::uint32_t dwr = 0;
  std::uint32_t hwr = 0;
  std::array<std::uint32_t, wire::kDirectionCount> rfd{};
};

// ---------------------------------------------------------------------------
// Service-network monitor: one ping per window toward the master; a missed
// pong grants one retry window before the interface is declared Broken.
// ---------------------------------------------------------------------------
enum class SnetState : std::uint8_t { Normal, WaitingRetry, Broken };

std::string to_string(SnetState s);

inline constexpr TimeUs kSnetPingWindowUs = 3'000'000;

struct SnetMonitor {
  SnetState state = SnetState::Normal;
  bool pong_seen = false;

  SnetState step(TimeUs now, bool pong_received);
  void notify_pong() { pong_seen = true; }
};

SnetState snet_monitor_step(SnetMonitor& m, TimeUs now, bool pong_received);

// ---------------------------------------------------------------------------
// DNP-side fault manager.
// ---------------------------------------------------------------------------
struct DfmOptions {
  bool neighbour_bit_on_sick = false;  // default: only Broken raises the bit
};

struct DfmInputs {
  wire::StatusCode2 core_probe = wire::StatusCode2::Normal;
  SensorReadings sensors{};
  std::array<LinkCounters, wire::kDirectionCount> link_deltas{};
};

struct DfmTickResult {
  bool wrote = false;
  bool read = false;
  bool read_saw_valid = false;
  bool host_broken = false;
  std::optional<std::uint32_t> ldm_broadcast;
  std::vector<Finding> findings;
};

class DnpFaultManager {
public:
  DnpFaultManager() = default;
  DnpFaultManager(WatchdogConfig cfg, SensorThresholds thresholds,
                  LinkHealthConfig link_cfg, FaultMask mask, DfmOptions opts = {});

  // Arms the timers; the registers are assumed freshly valid at `now`.
  void start(TimeUs now);
  TimeUs next_due() const;

  // Runs every action due at `now` (write side at t_write cadence, read side
  // at t_read cadence).
  DfmTickResult tick(TimeUs now, const DfmInputs& in, RegisterFile& regs);

  // Split entry points for lock-step harnesses.
  void refresh_dwr(TimeUs now, const DfmInputs& in, RegisterFile& regs,
                   DfmTickResult& out);
  void read_hwr(TimeUs now, RegisterFile& regs, DfmTickResult& out);

  // Stores a received diagnostic message and schedules the neighbour-fails
  // bit for the next DWR refresh. Throws InvalidLdm if the valid bit is off.
  void apply_remote_ldm(wire::Direction from, std::uint32_t ldm_word,
                        RegisterFile& regs);

  // Current local state rendered as an outgoing diagnostic message.
  wire::LifamaDiagnosticMessage build_ldm() const;

  bool host_broken() const { return host_broken_; }
  const LinkHealth& link_health(wire::Direction d) const {
    return link_health_[wire::dir_index(d)];
  }
  void reset_link_health(wire::Direction d);
  TimeUs last_hwr_valid_us() const { return last_hwr_valid_us_; }

private:
  bool neighbour_reported_fail(std::uint32_t ldm_word) const;

  WatchdogConfig cfg_{};
  SensorThresholds thresholds_{};
  LinkHealthConfig link_cfg_{};
  FaultMask mask_ = FaultMask::all();
  DfmOptions opts_{};

  std::array<LinkHealth, wire::kDirectionCount> link_health_{};
  std::array<wire::StatusCode2, wire::kDirectionCount> prev_link_{};
  std::array<bool, wire::kDirectionCount> prev_neighbour_{};
  wire::StatusCode2 prev_core_ = wire::StatusCode2::Normal;
  wire::StatusCode2 prev_temp_ = wire::StatusCode2::Normal;
  wire::StatusCode2 prev_volt_ = wire::StatusCode2::Normal;
  wire::StatusCode2 prev_curr_ = wire::StatusCode2::Normal;

  wire::DnpWatchdogRegister dwr_{};
  wire::HostWatchdogRegister last_hwr_{};
  TimeUs last_hwr_valid_us_ = 0;
  bool host_broken_ = false;
  bool prev_broadcast_active_ = false;

  TimeUs next_write_us_ = 0;
  TimeUs next_read_us_ = 0;
};

// ---------------------------------------------------------------------------
// Host-side fault manager.
// ---------------------------------------------------------------------------
struct HostProbes {
  wire::StatusCode2 memory = wire::StatusCode2::Normal;
  wire::StatusCode2 peripheral = wire::StatusCode2::Normal;
};

// One message toward the fault supervisor. `origin_via` is set when the
// report concerns the neighbour in that direction (learned from the RFD).
struct Diagnostic {
  TimeUs time_us = 0;
  FaultClass cls = FaultClass::HostMemory;
  wire::StatusCode2 status = wire::StatusCode2::Normal;
  std::optional<wire::Direction> origin_via;
  std::optional<wire::Direction> link_dir;  // set for link classes
};

std::string diagnostic_key(const Diagnostic& d);

struct HfmOptions {
  bool request_ldm = false;  // sets HWR.send_ldm: redundant 3D broadcast
  bool is_master = false;
};

struct HfmTickResult {
  bool wrote = false;
  bool read = false;
  bool read_saw_valid = false;
  bool dnp_broken = false;
  std::vector<Finding> findings;
  std::vector<Diagnostic> outbox;
};

class HostFaultManager {
public:
  HostFaultManager() = default;
  HostFaultManager(WatchdogConfig cfg, FaultMask mask, HfmOptions opts = {});

  void start(TimeUs now);
  TimeUs next_due() const;

  HfmTickResult tick(TimeUs now, const HostProbes& probes, RegisterFile& regs);

  void write_hwr(TimeUs now, const HostProbes& probes, RegisterFile& regs,
                 HfmTickResult& out);
  void read_dwr(TimeUs now, RegisterFile& regs, HfmTickResult& out);

  // Ping-window boundary: evaluates the previous window, arms the next one.
  // Returns the monitor state after the step.
  SnetState snet_ping_tick(TimeUs now);
  void notify_pong() { monitor_.notify_pong(); }
  SnetState snet_state() const { return monitor_.state; }

  // Supervisor acknowledgment for one diagnostic stream.
  void ack(const std::string& key);

  bool dnp_broken() const { return dnp_broken_; }
  TimeUs last_dwr_valid_us() const { return last_dwr_valid_us_; }

private:
  void raise(TimeUs now, FaultClass cls, wire::StatusCode2 status,
             std::optional<wire::Direction> origin_via,
             std::optional<wire::Direction> link_dir, HfmTickResult& out,
             bool local_finding);
  void flush_retransmits(TimeUs now, HfmTickResult& out);

  WatchdogConfig cfg_{};
  FaultMask mask_ = FaultMask::all();
  HfmOptions opts_{};
  SnetMonitor monitor_{};

  wire::StatusCode2 prev_memory_ = wire::StatusCode2::Normal;
  wire::StatusCode2 prev_peripheral_ = wire::StatusCode2::Normal;
  SnetState prev_snet_ = SnetState::Normal;

  TimeUs last_dwr_valid_us_ = 0;
  bool dnp_broken_ = false;

  struct Pending {
    Diagnostic diag;
    TimeUs next_retx_us = 0;
    bool acked = false;
  };
  // Keyed by diagnostic_key; a cleared fault is retransmitted as status
  // Normal until acked, then dropped.
  std::map<std::string, Pending> pending_;
  std::map<std::string, wire::StatusCode2> known_;

  TimeUs next_write_us_ = 0;
  TimeUs next_read_us_ = 0;
};

}  // namespace watchdog
}  // namespace lofamo
