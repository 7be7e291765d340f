#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lofamo/watchdog.hpp"

namespace lofamo::sim {

using lofamo::TimeUs;

// ---------------------------------------------------------------------------
// Torus geometry. Size-1 dimensions make a node its own neighbour, size-2
// dimensions collapse the +/- neighbours onto the same node.
// ---------------------------------------------------------------------------
struct TorusDims {
  int nx = 2, ny = 2, nz = 2;

  int node_count() const { return nx * ny * nz; }
  void validate() const;  // throws BadDims unless all >= 1
};

struct TorusCoord {
  int x = 0, y = 0, z = 0;

  friend bool operator==(const TorusCoord&, const TorusCoord&) = default;
  friend auto operator<=>(const TorusCoord&, const TorusCoord&) = default;
};

std::string to_string(const TorusCoord& c);  // "x.y.z"

TorusCoord neighbour(const TorusCoord& c, const TorusDims& dims,
                     wire::Direction d);

// ---------------------------------------------------------------------------
// Host command ring with wrapped pointers; occupancy N = (wr - rd) mod size,
// full at N == size - 1.
// ---------------------------------------------------------------------------
class CommandRing {
public:
  explicit CommandRing(std::uint32_t size = 64, std::uint32_t wr = 0,
                       std::uint32_t rd = 0);

  void push();                            // throws RingFull
  std::uint32_t pull(std::uint32_t batch);  // consumes min(pending, batch)

  std::uint32_t pending() const { return (wr_ - rd_ + size_) % size_; }
  std::uint32_t wr_ptr() const { return wr_; }
  std::uint32_t rd_ptr() const { return rd_; }
  std::uint32_t size() const { return size_; }

private:
  std::uint32_t size_;
  std::uint32_t wr_;
  std::uint32_t rd_;
};

// ---------------------------------------------------------------------------
// Fault scenario.
// ---------------------------------------------------------------------------
enum class Component : std::uint8_t {
  Host,         // whole host: break = host breakdown (HWR stops, snet dies)
  Dnp,          // whole DNP: break = DWR stops and all links stop credits
  DnpCore,      // break = core meltdown (DWR stops, links keep running)
  SnetIface,
  HostMemory,
  HostPeripheral,
  SensorTemperature,
  SensorVoltage,
  SensorCurrent,
  Link,         // needs a direction
};

enum class FaultKind : std::uint8_t { Break, Sick, Restore };

std::string to_string(Component c);
std::string to_string(FaultKind k);

struct ScenarioEvent {
  TimeUs time_us = 0;
  TorusCoord target{};
  Component component = Component::Host;
  FaultKind kind = FaultKind::Break;
  std::optional<wire::Direction> link_dir;
};

// Post-run expectations evaluated by the CLI: every expectation must hold
// for exit code 0.
struct Expectation {
  enum class What { AwareOf, DetectedAt, NeverClass, NoFaults } what;
  TorusCoord node{};
  std::string fault_key;  // class or class(dir)
};

struct FaultScenario {
  TorusDims dims{};
  TorusCoord master{};
  TimeUs duration_us = 2'000'000;
  watchdog::WatchdogConfig wd{};
  watchdog::SensorThresholds thresholds{};
  watchdog::LinkHealthConfig link_cfg{};
  watchdog::FaultMask mask = watchdog::FaultMask::all();
  TimeUs snet_delay_us = 1'000;
  TimeUs snet_ping_window_us = watchdog::kSnetPingWindowUs;
  TimeUs link_delay_us = 0;
  std::uint64_t seed = 0;  // 0 = use the run default
  std::vector<ScenarioEvent> events;
  std::vector<Expectation> expects;

  void validate() const;  // throws ValidationError
};

// ---------------------------------------------------------------------------
// Supervisor view collected at the master.
// ---------------------------------------------------------------------------
enum class SourcePath : std::uint8_t { ServiceNetDirect, NeighbourRelay, InferredDead };

// Label reported per awareness record: "ServiceNet" for direct delivery,
// "LiFaMa3D then ServiceNet" for neighbour relays, "ServiceNet via watchdog"
// for a relayed service-network fault (the watchdog register carried it),
// "inferred-dead" for deductions.
std::string path_label(SourcePath src,
                       std::optional<watchdog::FaultClass> cls = std::nullopt);

struct AwarenessRecord {
  TimeUs first_aware_us = 0;
  SourcePath source = SourcePath::ServiceNetDirect;
  std::string label;
};

struct SupervisorView {
  struct NodeEntry {
    TimeUs last_contact_us = -1;
    // fault key -> latest reported status
    std::map<std::string, wire::StatusCode2> current;
  };

  std::map<TorusCoord, NodeEntry> nodes;
  // (origin node, fault key) -> first awareness
  std::map<std::pair<TorusCoord, std::string>, AwarenessRecord> awareness;
  // origin node -> count of supporting link-broken reports
  std::map<TorusCoord, unsigned> inferred_dead;
  bool frozen = false;
};

// ---------------------------------------------------------------------------
// Trace.
// ---------------------------------------------------------------------------
struct TraceRecord {
  TimeUs time_us = 0;
  std::string node;
  std::string kind;
  std::string detail;
};

std::string trace_to_csv(const std::vector<TraceRecord>& trace);
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);

struct WorldStats {
  std::uint64_t ticks_processed = 0;
  std::uint64_t deliveries_processed = 0;
  std::uint64_t injections_processed = 0;
  std::uint64_t checks_processed = 0;
};

// ---------------------------------------------------------------------------
// Discrete-event world.
// ---------------------------------------------------------------------------
struct Node;

class World {
public:
  explicit World(const FaultScenario& scenario, bool verbose_trace = false);
  ~World();
  World(World&&) noexcept;
  World& operator=(World&&) noexcept;

  void run();  // processes events up to scenario duration

  const std::vector<TraceRecord>& trace() const { return trace_; }
  const SupervisorView& view() const { return view_; }
  const WorldStats& stats() const { return stats_; }
  const FaultScenario& scenario() const { return scenario_; }

  Node& node_at(const TorusCoord& c);
  const Node& node_at(const TorusCoord& c) const;

private:
  struct Event;
  struct EventOrder;

  void schedule(TimeUs t, Event ev);
  void process(const Event& ev);
  void process_tick(const Event& ev);
  void process_ping(const Event& ev);
  void process_inject(const Event& ev);
  void deliver_ldm(const Event& ev);
  void deliver_diag(const Event& ev);
  void deliver_pong(const Event& ev);
  void deliver_ack(const Event& ev);
  void inferred_check(const Event& ev);

  void apply_tick_results(TimeUs now, Node& n);
  void send_diags(TimeUs now, Node& n, const std::vector<watchdog::Diagnostic>& out);
  void broadcast_ldm(TimeUs now, Node& n, std::uint32_t word);
  void supervisor_ingest(TimeUs now, const TorusCoord& reporter,
                         const watchdog::Diagnostic& d);
  watchdog::DfmInputs make_dfm_inputs(const Node& n) const;
  bool edge_cut(const TorusCoord& c, wire::Direction d) const;
  bool edge_sick(const TorusCoord& c, wire::Direction d) const;
  bool master_reachable() const;
  void record(TimeUs t, const TorusCoord& c, std::string kind, std::string detail);
  void record_sv(TimeUs t, std::string kind, std::string detail);

  FaultScenario scenario_;
  TorusDims dims_;
  std::vector<std::unique_ptr<Node>> nodes_;
  SupervisorView view_;
  std::vector<TraceRecord> trace_;
  WorldStats stats_;
  bool verbose_ = false;

  // Min-heap on (time, seq), managed with the <algorithm> heap functions so
  // Event can stay private to the implementation file.
  std::vector<Event> queue_;
  std::uint64_t next_seq_ = 0;
  TimeUs now_ = 0;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Awareness accounting: one entry per injected fault (Restore events close
// episodes, they do not open entries).
// ---------------------------------------------------------------------------
struct AwarenessEntry {
  TorusCoord node{};
  std::string fault_kind;
  TimeUs inject_us = 0;
  std::optional<TimeUs> detect_us;  // first matching local finding
  std::optional<TimeUs> aware_us;   // first supervisor record
  std::string path;                 // label or "never"
};

inline constexpr const char* kFaultNeverDetected = "never";

std::vector<AwarenessEntry> awareness_latency(const World& world);

std::string awareness_to_csv(const std::vector<AwarenessEntry>& entries);
std::string awareness_to_jsonl(const std::vector<AwarenessEntry>& entries);

// Findings extracted from the trace, serialized time,node,detector,
// fault_class,status,path.
std::string findings_to_csv(const std::vector<TraceRecord>& trace);

bool check_expectations(const World& world, std::vector<std::string>* failures);

}  // namespace lofamo::sim
