#include "lofamo/sim.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "lofamo/errors.hpp"
#include "lofamo/registers.hpp"

namespace lofamo::sim {

using watchdog::Diagnostic;
using watchdog::FaultClass;
using wire::Direction;
using wire::StatusCode2;

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

void TorusDims::validate() const {
  if (nx < 1 || ny < 1 || nz < 1) {
    throw BadDims(std::to_string(nx) + "x" + std::to_string(ny) + "x" +
                  std::to_string(nz));
  }
}

std::string to_string(const TorusCoord& c) {
  return std::to_string(c.x) + "." + std::to_string(c.y) + "." +
         std::to_string(c.z);
}

TorusCoord neighbour(const TorusCoord& c, const TorusDims& dims, Direction d) {
  TorusCoord n = c;
  switch (d) {
    case Direction::XPlus: n.x = (c.x + 1) % dims.nx; break;
    case Direction::XMinus: n.x = (c.x - 1 + dims.nx) % dims.nx; break;
    case Direction::YPlus: n.y = (c.y + 1) % dims.ny; break;
    case Direction::YMinus: n.y = (c.y - 1 + dims.ny) % dims.ny; break;
    case Direction::ZPlus: n.z = (c.z + 1) % dims.nz; break;
    case Direction::ZMinus: n.z = (c.z - 1 + dims.nz) % dims.nz; break;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Command ring
// ---------------------------------------------------------------------------

CommandRing::CommandRing(std::uint32_t size, std::uint32_t wr, std::uint32_t rd)
    : size_(size), wr_(wr), rd_(rd) {
  if (size < 2) throw std::invalid_argument("ring size must be >= 2");
  if (wr >= size || rd >= size) {
    throw std::invalid_argument("ring pointers must be < size");
  }
}

void CommandRing::push() {
  if (pending() == size_ - 1) throw RingFull();
  wr_ = (wr_ + 1) % size_;
}

std::uint32_t CommandRing::pull(std::uint32_t batch) {
  const std::uint32_t take = std::min(pending(), batch);
  rd_ = (rd_ + take) % size_;
  return take;
}

// ---------------------------------------------------------------------------
// Scenario plumbing
// ---------------------------------------------------------------------------

std::string to_string(Component c) {
  switch (c) {
    case Component::Host: return "host";
    case Component::Dnp: return "dnp";
    case Component::DnpCore: return "dnp_core";
    case Component::SnetIface: return "snet_iface";
    case Component::HostMemory: return "host_memory";
    case Component::HostPeripheral: return "host_peripheral";
    case Component::SensorTemperature: return "sensor_temperature";
    case Component::SensorVoltage: return "sensor_voltage";
    case Component::SensorCurrent: return "sensor_current";
    case Component::Link: return "link";
  }
  return "?";
}

std::string to_string(FaultKind k) {
  switch (k) {
    case FaultKind::Break: return "break";
    case FaultKind::Sick: return "sick";
    case FaultKind::Restore: return "restore";
  }
  return "?";
}

namespace {

bool in_bounds(const TorusCoord& c, const TorusDims& d) {
  return c.x >= 0 && c.x < d.nx && c.y >= 0 && c.y < d.ny && c.z >= 0 &&
         c.z < d.nz;
}

bool supports_sick(Component c) {
  switch (c) {
    case Component::Host:
    case Component::Dnp:
    case Component::SnetIface: return false;
    default: return true;
  }
}

}  // namespace

void FaultScenario::validate() const {
  try {
    dims.validate();
    wd.validate();
    thresholds.validate();
  } catch (const std::exception& e) {
    throw ValidationError(e.what());
  }
  if (!in_bounds(master, dims)) throw ValidationError("master inside dims");
  if (duration_us <= 0) throw ValidationError("duration > 0");
  if (snet_delay_us < 0) throw ValidationError("snet_delay >= 0");
  if (snet_ping_window_us <= 0) throw ValidationError("snet_ping_window > 0");
  if (link_delay_us < 0) throw ValidationError("link_delay >= 0");
  if (link_cfg.min_packets < 1) throw ValidationError("min_packets >= 1");
  if (link_cfg.sick_ratio_threshold <= 0 || link_cfg.sick_ratio_threshold > 1) {
    throw ValidationError("sick_ratio in (0, 1]");
  }
  TimeUs prev_time = 0;
  for (const auto& ev : events) {
    if (ev.time_us < 0 || ev.time_us > duration_us) {
      throw ValidationError("event time inside [0, duration]");
    }
    if (ev.time_us < prev_time) {
      throw ValidationError("events ordered by time");
    }
    prev_time = ev.time_us;
    if (!in_bounds(ev.target, dims)) throw ValidationError("event target inside dims");
    if (ev.component == Component::Link && !ev.link_dir) {
      throw ValidationError("link event carries a direction");
    }
    if (ev.kind == FaultKind::Sick && !supports_sick(ev.component)) {
      throw ValidationError("sick unsupported for component " +
                            to_string(ev.component));
    }
  }
  for (const auto& ex : expects) {
    if (ex.what != Expectation::What::NoFaults) {
      if (!in_bounds(ex.node, dims)) throw ValidationError("expect node inside dims");
      if (ex.fault_key.empty()) throw ValidationError("expect carries a fault key");
    }
  }
}

std::string path_label(SourcePath src, std::optional<FaultClass> cls) {
  switch (src) {
    case SourcePath::ServiceNetDirect: return "ServiceNet";
    case SourcePath::NeighbourRelay:
      if (cls && *cls == FaultClass::HostServiceNet) {
        return "ServiceNet via watchdog";
      }
      return "LiFaMa3D then ServiceNet";
    case SourcePath::InferredDead: return "inferred-dead";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') {
      out += '\\';
      out += ch;
    } else {
      out += ch;
    }
  }
  return out;
}

}  // namespace

std::string trace_to_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "time_us,node,event_kind,detail\n";
  for (const auto& r : trace) {
    out << r.time_us << "," << r.node << "," << r.kind << ","
        << csv_quote(r.detail) << "\n";
  }
  return out.str();
}

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  for (const auto& r : trace) {
    out << "{\"time_us\":" << r.time_us << ",\"node\":\"" << r.node
        << "\",\"event_kind\":\"" << r.kind << "\",\"detail\":\""
        << json_escape(r.detail) << "\"}\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Node
// ---------------------------------------------------------------------------

struct Node {
  TorusCoord coord{};
  watchdog::RegisterFile regs{};
  watchdog::DnpFaultManager dfm{};
  watchdog::HostFaultManager hfm{};

  bool host_dead = false;
  bool dnp_dead = false;
  bool core_dead = false;
  bool core_sick = false;
  bool snet_dead = false;
  StatusCode2 mem_probe = StatusCode2::Normal;
  StatusCode2 periph_probe = StatusCode2::Normal;
  watchdog::SensorReadings sensors{};
  std::array<bool, wire::kDirectionCount> link_cut{};
  std::array<bool, wire::kDirectionCount> link_sick{};

  TimeUs next_tick_us = -1;

  // Supervisor-side bookkeeping kept per node for convenience.
  TimeUs sv_last_life_us = -1;
  TimeUs sv_last_relay_about_us = -1;
  bool sv_declared_dead = false;
  std::array<StatusCode2, wire::kDirectionCount> relay_snet_known{};
};

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

struct World::Event {
  enum class Kind : std::uint8_t {
    Tick,
    SnetPing,
    Inject,
    LdmDeliver,
    DiagDeliver,
    Pong,
    Ack,
    InferredCheck,
  };

  TimeUs t = 0;
  std::uint64_t seq = 0;
  Kind kind = Kind::Tick;
  TorusCoord target{};
  std::optional<Direction> dir;  // LDM: arrival port at the receiver
  std::uint32_t word = 0;
  Diagnostic diag{};
  TorusCoord reporter{};
  std::string key;
  TimeUs t0 = 0;  // InferredCheck: when the supporting report arrived
  ScenarioEvent inject{};
};

struct World::EventOrder {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

namespace {

double nominal_value(const watchdog::MetricThresholds& t) {
  return (t.warning_low + t.warning_high) / 2.0;
}

double sick_value(const watchdog::MetricThresholds& t) {
  if (t.warning_high < t.alarm_high) return (t.warning_high + t.alarm_high) / 2.0;
  if (t.alarm_low < t.warning_low) return (t.alarm_low + t.warning_low) / 2.0;
  return t.alarm_high;  // degenerate thresholds: no warning band exists
}

double break_value(const watchdog::MetricThresholds& t) {
  const double span = t.alarm_high - t.alarm_low;
  return t.alarm_high + (span > 0 ? 0.1 * span : 0.0) + 1.0;
}

std::string finding_detail(const watchdog::Finding& f) {
  // Mirrors finding_csv_row minus the time and node columns.
  const std::string row = watchdog::finding_csv_row(f, "@");
  const auto cut = row.find(",@,");
  return row.substr(cut + 3);
}

constexpr TimeUs kNever = std::numeric_limits<TimeUs>::max();

}  // namespace

World::World(const FaultScenario& scenario, bool verbose_trace)
    : scenario_(scenario), dims_(scenario.dims), verbose_(verbose_trace) {
  scenario_.validate();
  rng_.seed(scenario_.seed == 0 ? 0x10FA40ull : scenario_.seed);

  nodes_.reserve(static_cast<std::size_t>(dims_.node_count()));
  for (int z = 0; z < dims_.nz; ++z) {
    for (int y = 0; y < dims_.ny; ++y) {
      for (int x = 0; x < dims_.nx; ++x) {
        auto n = std::make_unique<Node>();
        n->coord = {x, y, z};
        n->dfm = watchdog::DnpFaultManager(scenario_.wd, scenario_.thresholds,
                                           scenario_.link_cfg, scenario_.mask);
        n->hfm = watchdog::HostFaultManager(
            scenario_.wd, scenario_.mask,
            watchdog::HfmOptions{false, n->coord == scenario_.master});
        n->dfm.start(0);
        n->hfm.start(0);
        n->sensors = watchdog::SensorReadings{
            nominal_value(scenario_.thresholds.temperature),
            nominal_value(scenario_.thresholds.voltage),
            nominal_value(scenario_.thresholds.current)};
        nodes_.push_back(std::move(n));
      }
    }
  }

  for (auto& n : nodes_) {
    // Manager tick chain.
    Event tick;
    tick.kind = Event::Kind::Tick;
    tick.target = n->coord;
    n->next_tick_us = std::min(n->dfm.next_due(), n->hfm.next_due());
    schedule(n->next_tick_us, tick);

    // First ping leaves immediately; window boundaries follow.
    if (!n->host_dead && !n->snet_dead && master_reachable()) {
      Event pong;
      pong.kind = Event::Kind::Pong;
      pong.target = n->coord;
      schedule(2 * scenario_.snet_delay_us, pong);
    }
    Event ping;
    ping.kind = Event::Kind::SnetPing;
    ping.target = n->coord;
    schedule(scenario_.snet_ping_window_us, ping);
  }

  for (const auto& sev : scenario_.events) {
    Event ev;
    ev.kind = Event::Kind::Inject;
    ev.target = sev.target;
    ev.inject = sev;
    schedule(sev.time_us, ev);
  }
}

World::~World() = default;
World::World(World&&) noexcept = default;
World& World::operator=(World&&) noexcept = default;

Node& World::node_at(const TorusCoord& c) {
  const std::size_t idx = static_cast<std::size_t>(
      c.x + dims_.nx * (c.y + dims_.ny * static_cast<long>(c.z)));
  return *nodes_[idx];
}

const Node& World::node_at(const TorusCoord& c) const {
  return const_cast<World*>(this)->node_at(c);
}

void World::schedule(TimeUs t, Event ev) {
  if (t > scenario_.duration_us) return;  // beyond the horizon
  ev.t = t;
  ev.seq = next_seq_++;
  queue_.push_back(std::move(ev));
  std::push_heap(queue_.begin(), queue_.end(), EventOrder{});
}

void World::run() {
  while (!queue_.empty() && queue_.front().t <= scenario_.duration_us) {
    std::pop_heap(queue_.begin(), queue_.end(), EventOrder{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    now_ = ev.t;
    process(ev);
  }
  now_ = scenario_.duration_us;
}

void World::process(const Event& ev) {
  switch (ev.kind) {
    case Event::Kind::Tick: process_tick(ev); break;
    case Event::Kind::SnetPing: process_ping(ev); break;
    case Event::Kind::Inject: process_inject(ev); break;
    case Event::Kind::LdmDeliver: deliver_ldm(ev); break;
    case Event::Kind::DiagDeliver: deliver_diag(ev); break;
    case Event::Kind::Pong: deliver_pong(ev); break;
    case Event::Kind::Ack: deliver_ack(ev); break;
    case Event::Kind::InferredCheck: inferred_check(ev); break;
  }
}

void World::process_tick(const Event& ev) {
  Node& n = node_at(ev.target);
  if (ev.t != n.next_tick_us) return;  // superseded by a rescheduled chain
  n.next_tick_us = -1;
  stats_.ticks_processed++;
  apply_tick_results(now_, n);

  TimeUs nd = kNever;
  if (!n.dnp_dead && !n.core_dead) nd = std::min(nd, n.dfm.next_due());
  if (!n.host_dead) nd = std::min(nd, n.hfm.next_due());
  if (nd != kNever && (n.next_tick_us < 0 || nd < n.next_tick_us)) {
    n.next_tick_us = nd;
    Event tick;
    tick.kind = Event::Kind::Tick;
    tick.target = n.coord;
    schedule(nd, tick);
  }
}

void World::apply_tick_results(TimeUs now, Node& n) {
  if (!n.dnp_dead && !n.core_dead) {
    const watchdog::DfmInputs in = make_dfm_inputs(n);
    const watchdog::DfmTickResult r = n.dfm.tick(now, in, n.regs);
    if (verbose_ && (r.wrote || r.read)) {
      record(now, n.coord, "tick",
             std::string("dfm wrote=") + (r.wrote ? "1" : "0") +
                 " read=" + (r.read ? "1" : "0") +
                 " saw_valid=" + (r.read_saw_valid ? "1" : "0"));
    }
    for (const auto& f : r.findings) {
      record(now, n.coord, "finding", finding_detail(f));
    }
    if (r.ldm_broadcast) broadcast_ldm(now, n, *r.ldm_broadcast);
  }
  if (!n.host_dead) {
    const watchdog::HostProbes probes{n.mem_probe, n.periph_probe};
    const watchdog::HfmTickResult r = n.hfm.tick(now, probes, n.regs);
    if (verbose_ && (r.wrote || r.read)) {
      record(now, n.coord, "tick",
             std::string("hfm wrote=") + (r.wrote ? "1" : "0") +
                 " read=" + (r.read ? "1" : "0") +
                 " saw_valid=" + (r.read_saw_valid ? "1" : "0"));
    }
    for (const auto& f : r.findings) {
      record(now, n.coord, "finding", finding_detail(f));
    }
    send_diags(now, n, r.outbox);
  }
}

watchdog::DfmInputs World::make_dfm_inputs(const Node& n) const {
  watchdog::DfmInputs in;
  in.core_probe = n.core_sick ? StatusCode2::Sick : StatusCode2::Normal;
  in.sensors = n.sensors;
  for (Direction d : wire::kAllDirections) {
    auto& delta = in.link_deltas[wire::dir_index(d)];
    if (edge_cut(n.coord, d)) {
      delta.credit_timeout = true;
    } else {
      delta.packets = 100;
      delta.bytes = 100 * 4096;
      delta.crc_errors = edge_sick(n.coord, d) ? 10 : 0;
    }
  }
  return in;
}

bool World::edge_cut(const TorusCoord& c, Direction d) const {
  const Node& n = node_at(c);
  if (n.link_cut[wire::dir_index(d)]) return true;
  // A dead DNP on the far side stops returning credits on every port.
  return node_at(neighbour(c, dims_, d)).dnp_dead;
}

bool World::edge_sick(const TorusCoord& c, Direction d) const {
  return node_at(c).link_sick[wire::dir_index(d)];
}

bool World::master_reachable() const {
  const Node& m = node_at(scenario_.master);
  return !m.host_dead && !m.snet_dead;
}

void World::broadcast_ldm(TimeUs now, Node& n, std::uint32_t word) {
  if (verbose_) {
    std::ostringstream detail;
    detail << "word=0x" << std::hex << word;
    record(now, n.coord, "ldm_tx", detail.str());
  }
  for (Direction d : wire::kAllDirections) {
    if (n.link_cut[wire::dir_index(d)]) continue;  // cable gone
    Event ev;
    ev.kind = Event::Kind::LdmDeliver;
    ev.target = neighbour(n.coord, dims_, d);
    ev.dir = wire::opposite(d);  // port the message arrives on
    ev.word = word;
    schedule(now + scenario_.link_delay_us, ev);
  }
}

void World::deliver_ldm(const Event& ev) {
  stats_.deliveries_processed++;
  Node& n = node_at(ev.target);
  if (n.dnp_dead) return;  // nobody to store the message
  n.dfm.apply_remote_ldm(*ev.dir, ev.word, n.regs);
  if (verbose_) {
    record(now_, n.coord, "ldm_rx",
           "from " + wire::to_string(*ev.dir) + " word=0x" +
               [&] {
                 std::ostringstream h;
                 h << std::hex << ev.word;
                 return h.str();
               }());
  }

  // Relay a service-network fault on behalf of the neighbour: that class
  // cannot reach the supervisor on the origin's own interface.
  const wire::LifamaDiagnosticMessage msg = wire::decode_ldm(ev.word);
  const bool breakdown = msg.service_net == StatusCode2::Broken &&
                         msg.memory == StatusCode2::Broken &&
                         msg.peripheral == StatusCode2::Broken;
  const StatusCode2 snet_remote =
      breakdown ? StatusCode2::Normal : msg.service_net;
  const auto port = wire::dir_index(*ev.dir);
  if (snet_remote != n.relay_snet_known[port]) {
    n.relay_snet_known[port] = snet_remote;
    if (!n.host_dead && !n.snet_dead &&
        scenario_.mask.enabled(FaultClass::HostServiceNet)) {
      Diagnostic d;
      d.time_us = now_;
      d.cls = FaultClass::HostServiceNet;
      d.status = snet_remote;
      d.origin_via = *ev.dir;
      send_diags(now_, n, {d});
    }
  }
}

void World::send_diags(TimeUs now, Node& n,
                       const std::vector<Diagnostic>& out) {
  for (const auto& d : out) {
    if (verbose_) {
      record(now, n.coord, "diag_tx",
             watchdog::diagnostic_key(d) + "=" + wire::to_string(d.status));
    }
    if (n.host_dead || n.snet_dead || !master_reachable()) continue;
    Event ev;
    ev.kind = Event::Kind::DiagDeliver;
    ev.reporter = n.coord;
    ev.diag = d;
    schedule(now + scenario_.snet_delay_us, ev);
  }
}

void World::deliver_diag(const Event& ev) {
  stats_.deliveries_processed++;
  if (view_.frozen || !master_reachable()) return;
  supervisor_ingest(now_, ev.reporter, ev.diag);
  Event ack;
  ack.kind = Event::Kind::Ack;
  ack.target = ev.reporter;
  ack.key = watchdog::diagnostic_key(ev.diag);
  schedule(now_ + scenario_.snet_delay_us, ack);
}

void World::deliver_ack(const Event& ev) {
  stats_.deliveries_processed++;
  Node& n = node_at(ev.target);
  if (n.host_dead) return;
  n.hfm.ack(ev.key);
}

void World::supervisor_ingest(TimeUs now, const TorusCoord& reporter,
                              const Diagnostic& d) {
  Node& rnode = node_at(reporter);
  auto& rentry = view_.nodes[reporter];
  rentry.last_contact_us = std::max(rentry.last_contact_us, now);
  rnode.sv_last_life_us = std::max(rnode.sv_last_life_us, now);
  if (rnode.sv_declared_dead) {
    rnode.sv_declared_dead = false;
    view_.nodes[reporter].current["node_dead"] = StatusCode2::Normal;
    record_sv(now, "sv_revived", to_string(reporter));
  }

  TorusCoord subject = reporter;
  SourcePath src = SourcePath::ServiceNetDirect;
  if (d.origin_via) {
    subject = neighbour(reporter, dims_, *d.origin_via);
    src = SourcePath::NeighbourRelay;
    node_at(subject).sv_last_relay_about_us = now;
  }
  const std::string key = watchdog::fault_key(d.cls, d.link_dir);

  auto& sentry = view_.nodes[subject];
  const auto prev_it = sentry.current.find(key);
  const StatusCode2 prev =
      prev_it == sentry.current.end() ? StatusCode2::Normal : prev_it->second;
  sentry.current[key] = d.status;

  if (verbose_) {
    record_sv(now, "diag_rx",
              to_string(reporter) + " reports " + to_string(subject) + " " +
                  key + "=" + wire::to_string(d.status));
  }

  // Link-broken reports toward a silent node feed the inferred-dead logic.
  if (!d.origin_via && d.cls == FaultClass::LinkBroken && d.link_dir) {
    const TorusCoord peer = neighbour(reporter, dims_, *d.link_dir);
    if (d.status == StatusCode2::Broken && prev != StatusCode2::Broken) {
      view_.inferred_dead[peer]++;
      Event chk;
      chk.kind = Event::Kind::InferredCheck;
      chk.target = peer;
      chk.t0 = now;
      schedule(now + scenario_.snet_ping_window_us +
                   2 * scenario_.snet_delay_us + 2 * scenario_.wd.t_read_us,
               chk);
    } else if (d.status != StatusCode2::Broken && prev == StatusCode2::Broken) {
      auto it = view_.inferred_dead.find(peer);
      if (it != view_.inferred_dead.end() && it->second > 0) it->second--;
    }
  }

  if (d.status != StatusCode2::Normal) {
    const auto akey = std::make_pair(subject, key);
    if (view_.awareness.find(akey) == view_.awareness.end()) {
      AwarenessRecord rec{now, src, path_label(src, d.cls)};
      view_.awareness.emplace(akey, rec);
      record_sv(now, "sv_aware",
                to_string(subject) + " " + key + " via " + rec.label);
    }
  }
}

void World::process_ping(const Event& ev) {
  Node& n = node_at(ev.target);
  stats_.ticks_processed++;
  if (!n.host_dead) {
    n.hfm.snet_ping_tick(now_);  // evaluate the window that just closed
    if (verbose_) {
      record(now_, n.coord, "ping",
             "state=" + watchdog::to_string(n.hfm.snet_state()));
    }
    if (!n.snet_dead && master_reachable()) {
      Event pong;
      pong.kind = Event::Kind::Pong;
      pong.target = n.coord;
      schedule(now_ + 2 * scenario_.snet_delay_us, pong);
    }
  }
  Event next;
  next.kind = Event::Kind::SnetPing;
  next.target = n.coord;
  schedule(now_ + scenario_.snet_ping_window_us, next);
}

void World::deliver_pong(const Event& ev) {
  stats_.deliveries_processed++;
  if (view_.frozen || !master_reachable()) return;
  Node& n = node_at(ev.target);
  // The ping reached the supervisor one hop earlier.
  const TimeUs arrival = now_ - scenario_.snet_delay_us;
  auto& entry = view_.nodes[n.coord];
  entry.last_contact_us = std::max(entry.last_contact_us, arrival);
  n.sv_last_life_us = std::max(n.sv_last_life_us, arrival);
  if (n.sv_declared_dead) {
    n.sv_declared_dead = false;
    entry.current["node_dead"] = StatusCode2::Normal;
    record_sv(now_, "sv_revived", to_string(n.coord));
  }
  if (n.host_dead) return;  // the answer finds nobody
  n.hfm.notify_pong();
  if (verbose_) record(now_, n.coord, "pong", "");
}

void World::inferred_check(const Event& ev) {
  stats_.checks_processed++;
  if (view_.frozen || !master_reachable()) return;
  Node& n = node_at(ev.target);
  if (n.sv_declared_dead) return;
  const auto it = view_.inferred_dead.find(ev.target);
  if (it == view_.inferred_dead.end() || it->second == 0) return;
  // Alive nodes produce a life sign within one ping window of the support:
  // either the next ping or their own mirror report of the broken edge.
  if (n.sv_last_life_us >= ev.t0) return;
  if (n.sv_last_relay_about_us >= ev.t0) return;  // its DNP still talks

  n.sv_declared_dead = true;
  view_.nodes[ev.target].current["node_dead"] = StatusCode2::Broken;
  const auto akey = std::make_pair(ev.target, std::string("node_dead"));
  if (view_.awareness.find(akey) == view_.awareness.end()) {
    AwarenessRecord rec{now_, SourcePath::InferredDead,
                        path_label(SourcePath::InferredDead)};
    view_.awareness.emplace(akey, rec);
  }
  record_sv(now_, "sv_inferred_dead",
            to_string(ev.target) + " supports=" + std::to_string(it->second));
}

void World::process_inject(const Event& ev) {
  stats_.injections_processed++;
  const ScenarioEvent& sev = ev.inject;
  Node& n = node_at(sev.target);
  record(now_, sev.target, "inject",
         to_string(sev.component) +
             (sev.link_dir ? "(" + wire::to_string(*sev.link_dir) + ")" : "") +
             " " + to_string(sev.kind));

  const auto revive_tick = [&](TimeUs due) {
    if (n.next_tick_us < 0 || due < n.next_tick_us) {
      n.next_tick_us = due;
      Event tick;
      tick.kind = Event::Kind::Tick;
      tick.target = n.coord;
      schedule(due, tick);
    }
  };

  switch (sev.component) {
    case Component::Host:
      if (sev.kind == FaultKind::Break) {
        n.host_dead = true;
        if (n.coord == scenario_.master) view_.frozen = true;
      } else if (sev.kind == FaultKind::Restore) {
        n.host_dead = false;
        n.hfm = watchdog::HostFaultManager(
            scenario_.wd, scenario_.mask,
            watchdog::HfmOptions{false, n.coord == scenario_.master});
        n.hfm.start(now_);
        // Grace pong: the first window boundary after a reboot would
        // otherwise count as a miss before any ping went out.
        n.hfm.notify_pong();
        if (n.coord == scenario_.master) view_.frozen = false;
        revive_tick(n.hfm.next_due());
      }
      break;
    case Component::Dnp:
      if (sev.kind == FaultKind::Break) {
        n.dnp_dead = true;
      } else if (sev.kind == FaultKind::Restore) {
        n.dnp_dead = false;
        n.core_dead = false;
        n.core_sick = false;
        n.dfm = watchdog::DnpFaultManager(scenario_.wd, scenario_.thresholds,
                                          scenario_.link_cfg, scenario_.mask);
        n.dfm.start(now_);
        revive_tick(n.dfm.next_due());
      }
      break;
    case Component::DnpCore:
      if (sev.kind == FaultKind::Break) {
        n.core_dead = true;
      } else if (sev.kind == FaultKind::Sick) {
        n.core_sick = true;
      } else {
        n.core_dead = false;
        n.core_sick = false;
        n.dfm = watchdog::DnpFaultManager(scenario_.wd, scenario_.thresholds,
                                          scenario_.link_cfg, scenario_.mask);
        n.dfm.start(now_);
        revive_tick(n.dfm.next_due());
      }
      break;
    case Component::SnetIface:
      n.snet_dead = (sev.kind == FaultKind::Break);
      break;
    case Component::HostMemory:
      n.mem_probe = sev.kind == FaultKind::Break  ? StatusCode2::Broken
                    : sev.kind == FaultKind::Sick ? StatusCode2::Sick
                                                  : StatusCode2::Normal;
      break;
    case Component::HostPeripheral:
      n.periph_probe = sev.kind == FaultKind::Break  ? StatusCode2::Broken
                       : sev.kind == FaultKind::Sick ? StatusCode2::Sick
                                                     : StatusCode2::Normal;
      break;
    case Component::SensorTemperature:
      n.sensors.temperature =
          sev.kind == FaultKind::Break
              ? break_value(scenario_.thresholds.temperature)
          : sev.kind == FaultKind::Sick
              ? sick_value(scenario_.thresholds.temperature)
              : nominal_value(scenario_.thresholds.temperature);
      break;
    case Component::SensorVoltage:
      n.sensors.voltage = sev.kind == FaultKind::Break
                              ? break_value(scenario_.thresholds.voltage)
                          : sev.kind == FaultKind::Sick
                              ? sick_value(scenario_.thresholds.voltage)
                              : nominal_value(scenario_.thresholds.voltage);
      break;
    case Component::SensorCurrent:
      n.sensors.current = sev.kind == FaultKind::Break
                              ? break_value(scenario_.thresholds.current)
                          : sev.kind == FaultKind::Sick
                              ? sick_value(scenario_.thresholds.current)
                              : nominal_value(scenario_.thresholds.current);
      break;
    case Component::Link: {
      const Direction d = *sev.link_dir;
      Node& peer = node_at(neighbour(n.coord, dims_, d));
      const Direction back = wire::opposite(d);
      if (sev.kind == FaultKind::Break) {
        n.link_cut[wire::dir_index(d)] = true;
        peer.link_cut[wire::dir_index(back)] = true;
      } else if (sev.kind == FaultKind::Sick) {
        n.link_sick[wire::dir_index(d)] = true;  // errors show at this receiver
      } else {
        n.link_cut[wire::dir_index(d)] = false;
        peer.link_cut[wire::dir_index(back)] = false;
        n.link_sick[wire::dir_index(d)] = false;
        peer.link_sick[wire::dir_index(back)] = false;
        n.dfm.reset_link_health(d);
        peer.dfm.reset_link_health(back);
      }
      break;
    }
  }
}

void World::record(TimeUs t, const TorusCoord& c, std::string kind,
                   std::string detail) {
  trace_.push_back({t, to_string(c), std::move(kind), std::move(detail)});
}

void World::record_sv(TimeUs t, std::string kind, std::string detail) {
  trace_.push_back({t, "supervisor", std::move(kind), std::move(detail)});
}

// ---------------------------------------------------------------------------
// Awareness accounting
// ---------------------------------------------------------------------------

namespace {

// The fault key an injection is expected to surface as.
std::optional<std::string> injected_fault_key(const ScenarioEvent& ev) {
  switch (ev.component) {
    case Component::Host: return "host_breakdown";
    case Component::Dnp: return "dnp_core_meltdown";
    case Component::DnpCore:
      return ev.kind == FaultKind::Sick ? "dnp_core_sick" : "dnp_core_meltdown";
    case Component::SnetIface: return "host_service_net";
    case Component::HostMemory: return "host_memory";
    case Component::HostPeripheral: return "host_peripheral";
    case Component::SensorTemperature: return "temperature_threshold";
    case Component::SensorVoltage: return "voltage_threshold";
    case Component::SensorCurrent: return "current_threshold";
    case Component::Link:
      if (!ev.link_dir) return std::nullopt;
      return watchdog::fault_key(ev.kind == FaultKind::Sick
                                     ? FaultClass::LinkSick
                                     : FaultClass::LinkBroken,
                                 *ev.link_dir);
  }
  return std::nullopt;
}

// detail = detector,fault_key,status,path
std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

std::vector<AwarenessEntry> awareness_latency(const World& world) {
  std::vector<AwarenessEntry> entries;
  for (const auto& ev : world.scenario().events) {
    if (ev.kind == FaultKind::Restore) continue;
    const auto key = injected_fault_key(ev);
    if (!key) continue;

    AwarenessEntry e;
    e.node = ev.target;
    e.fault_kind = *key;
    e.inject_us = ev.time_us;

    const std::string node_name = to_string(ev.target);
    for (const auto& r : world.trace()) {
      if (r.kind != "finding" || r.node != node_name || r.time_us < ev.time_us) {
        continue;
      }
      const auto parts = split_csv(r.detail);
      if (parts.size() >= 3 && parts[1] == *key && parts[2] != "normal") {
        e.detect_us = r.time_us;
        break;
      }
    }

    const auto& aw = world.view().awareness;
    auto it = aw.find({ev.target, *key});
    if (it == aw.end() &&
        (*key == "host_breakdown" || *key == "dnp_core_meltdown")) {
      it = aw.find({ev.target, "node_dead"});  // both managers died silent
    }
    if (it != aw.end() && it->second.first_aware_us >= ev.time_us) {
      e.aware_us = it->second.first_aware_us;
      e.path = it->second.label;
    } else {
      e.path = kFaultNeverDetected;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string awareness_to_csv(const std::vector<AwarenessEntry>& entries) {
  std::ostringstream out;
  out << "node,fault,inject_us,detect_us,aware_us,path\n";
  for (const auto& e : entries) {
    out << to_string(e.node) << "," << e.fault_kind << "," << e.inject_us
        << ",";
    if (e.detect_us) out << *e.detect_us;
    out << ",";
    if (e.aware_us) out << *e.aware_us;
    out << "," << e.path << "\n";
  }
  return out.str();
}

std::string awareness_to_jsonl(const std::vector<AwarenessEntry>& entries) {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << "{\"node\":\"" << to_string(e.node) << "\",\"fault\":\""
        << e.fault_kind << "\",\"inject_us\":" << e.inject_us;
    out << ",\"detect_us\":";
    if (e.detect_us) out << *e.detect_us;
    else out << "null";
    out << ",\"aware_us\":";
    if (e.aware_us) out << *e.aware_us;
    else out << "null";
    out << ",\"path\":\"" << json_escape(e.path) << "\"}\n";
  }
  return out.str();
}

std::string findings_to_csv(const std::vector<TraceRecord>& trace) {
  std::ostringstream out;
  out << "time,node,detector,fault_class,status,path\n";
  for (const auto& r : trace) {
    if (r.kind != "finding") continue;
    out << r.time_us << "," << r.node << "," << r.detail << "\n";
  }
  return out.str();
}

bool check_expectations(const World& world, std::vector<std::string>* failures) {
  bool ok = true;
  const auto fail = [&](const std::string& msg) {
    ok = false;
    if (failures) failures->push_back(msg);
  };

  const auto finding_at = [&](const TorusCoord& node, const std::string& key) {
    const std::string name = to_string(node);
    for (const auto& r : world.trace()) {
      if (r.kind != "finding" || r.node != name) continue;
      const auto parts = split_csv(r.detail);
      if (parts.size() >= 3 && parts[1] == key && parts[2] != "normal") {
        return true;
      }
    }
    return false;
  };

  for (const auto& ex : world.scenario().expects) {
    switch (ex.what) {
      case Expectation::What::AwareOf: {
        const auto& aw = world.view().awareness;
        if (aw.find({ex.node, ex.fault_key}) == aw.end()) {
          fail("supervisor never aware of " + ex.fault_key + " at " +
               to_string(ex.node));
        }
        break;
      }
      case Expectation::What::DetectedAt:
        if (!finding_at(ex.node, ex.fault_key)) {
          fail("no local finding " + ex.fault_key + " at " + to_string(ex.node));
        }
        break;
      case Expectation::What::NeverClass: {
        const auto& aw = world.view().awareness;
        if (aw.find({ex.node, ex.fault_key}) != aw.end() ||
            finding_at(ex.node, ex.fault_key)) {
          fail(ex.fault_key + " unexpectedly seen at " + to_string(ex.node));
        }
        break;
      }
      case Expectation::What::NoFaults: {
        if (!world.view().awareness.empty()) {
          fail("supervisor recorded awareness in a fault-free run");
        }
        for (const auto& r : world.trace()) {
          if (r.kind != "finding") continue;
          const auto parts = split_csv(r.detail);
          if (parts.size() >= 3 && parts[2] != "normal") {
            fail("finding in a fault-free run: " + r.node + " " + r.detail);
            break;
          }
        }
        break;
      }
    }
  }
  return ok;
}

}  // namespace lofamo::sim
