#include "lofamo/scenario.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "lofamo/errors.hpp"

namespace lofamo::sim {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) {
    if (t[0] == '#') break;  // trailing comment
    toks.push_back(t);
  }
  return toks;
}

long long parse_int(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_no, "expected integer, got '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw ParseError(line_no, "expected integer, got '" + tok + "'");
  }
  return v;
}

double parse_float(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_no, "expected number, got '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw ParseError(line_no, "expected number, got '" + tok + "'");
  }
  return v;
}

TimeUs parse_duration(const std::string& tok, std::size_t line_no) {
  std::size_t pos = 0;
  while (pos < tok.size() && (std::isdigit(static_cast<unsigned char>(tok[pos])))) {
    ++pos;
  }
  if (pos == 0) {
    throw ParseError(line_no, "expected duration like 10ms, got '" + tok + "'");
  }
  const long long value = parse_int(tok.substr(0, pos), line_no);
  const std::string suffix = tok.substr(pos);
  if (suffix == "us") return value;
  if (suffix == "ms") return value * 1'000;
  if (suffix == "s") return value * 1'000'000;
  throw ParseError(line_no, "duration needs a us/ms/s suffix, got '" + tok + "'");
}

TorusCoord parse_coord(const std::vector<std::string>& toks, std::size_t base,
                       std::size_t line_no) {
  return TorusCoord{static_cast<int>(parse_int(toks[base], line_no)),
                    static_cast<int>(parse_int(toks[base + 1], line_no)),
                    static_cast<int>(parse_int(toks[base + 2], line_no))};
}

std::optional<wire::Direction> parse_direction(const std::string& tok) {
  if (tok == "x+" || tok == "X+") return wire::Direction::XPlus;
  if (tok == "x-" || tok == "X-") return wire::Direction::XMinus;
  if (tok == "y+" || tok == "Y+") return wire::Direction::YPlus;
  if (tok == "y-" || tok == "Y-") return wire::Direction::YMinus;
  if (tok == "z+" || tok == "Z+") return wire::Direction::ZPlus;
  if (tok == "z-" || tok == "Z-") return wire::Direction::ZMinus;
  return std::nullopt;
}

std::optional<Component> parse_component(const std::string& tok) {
  if (tok == "host") return Component::Host;
  if (tok == "dnp") return Component::Dnp;
  if (tok == "dnp_core") return Component::DnpCore;
  if (tok == "snet_iface") return Component::SnetIface;
  if (tok == "memory") return Component::HostMemory;
  if (tok == "peripheral") return Component::HostPeripheral;
  if (tok == "temperature") return Component::SensorTemperature;
  if (tok == "voltage") return Component::SensorVoltage;
  if (tok == "current") return Component::SensorCurrent;
  if (tok == "link") return Component::Link;
  return std::nullopt;
}

std::optional<FaultKind> parse_kind(const std::string& tok) {
  if (tok == "break") return FaultKind::Break;
  if (tok == "sick") return FaultKind::Sick;
  if (tok == "restore") return FaultKind::Restore;
  return std::nullopt;
}

void expect_count(const std::vector<std::string>& toks, std::size_t n,
                  std::size_t line_no, const std::string& usage) {
  if (toks.size() != n) {
    throw ParseError(line_no, "expected '" + usage + "'");
  }
}

}  // namespace

FaultScenario parse_scenario(std::istream& in) {
  FaultScenario sc;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];

    if (head == "dims") {
      expect_count(toks, 4, line_no, "dims <nx> <ny> <nz>");
      sc.dims = {static_cast<int>(parse_int(toks[1], line_no)),
                 static_cast<int>(parse_int(toks[2], line_no)),
                 static_cast<int>(parse_int(toks[3], line_no))};
    } else if (head == "master") {
      expect_count(toks, 4, line_no, "master <x> <y> <z>");
      sc.master = parse_coord(toks, 1, line_no);
    } else if (head == "duration") {
      expect_count(toks, 2, line_no, "duration <dur>");
      sc.duration_us = parse_duration(toks[1], line_no);
    } else if (head == "t_write") {
      expect_count(toks, 2, line_no, "t_write <dur>");
      sc.wd.t_write_us = parse_duration(toks[1], line_no);
    } else if (head == "t_read") {
      expect_count(toks, 2, line_no, "t_read <dur>");
      sc.wd.t_read_us = parse_duration(toks[1], line_no);
    } else if (head == "snet_delay") {
      expect_count(toks, 2, line_no, "snet_delay <dur>");
      sc.snet_delay_us = parse_duration(toks[1], line_no);
    } else if (head == "snet_ping_window") {
      expect_count(toks, 2, line_no, "snet_ping_window <dur>");
      sc.snet_ping_window_us = parse_duration(toks[1], line_no);
    } else if (head == "link_delay") {
      expect_count(toks, 2, line_no, "link_delay <dur>");
      sc.link_delay_us = parse_duration(toks[1], line_no);
    } else if (head == "seed") {
      expect_count(toks, 2, line_no, "seed <n>");
      sc.seed = static_cast<std::uint64_t>(parse_int(toks[1], line_no));
    } else if (head == "sick_ratio") {
      expect_count(toks, 2, line_no, "sick_ratio <float>");
      sc.link_cfg.sick_ratio_threshold = parse_float(toks[1], line_no);
    } else if (head == "min_packets") {
      expect_count(toks, 2, line_no, "min_packets <n>");
      sc.link_cfg.min_packets =
          static_cast<std::uint64_t>(parse_int(toks[1], line_no));
    } else if (head == "mask") {
      expect_count(toks, 2, line_no, "mask -<fault_class>");
      if (toks[1].size() < 2 || toks[1][0] != '-') {
        throw ParseError(line_no, "mask entries start with '-'");
      }
      const auto cls = watchdog::fault_class_from_string(toks[1].substr(1));
      if (!cls) {
        throw ParseError(line_no, "unknown fault class '" + toks[1].substr(1) + "'");
      }
      sc.mask.set(*cls, false);
    } else if (head == "threshold") {
      expect_count(toks, 6, line_no,
                   "threshold <metric> <warn_lo> <warn_hi> <alarm_lo> <alarm_hi>");
      watchdog::MetricThresholds t;
      t.warning_low = parse_float(toks[2], line_no);
      t.warning_high = parse_float(toks[3], line_no);
      t.alarm_low = parse_float(toks[4], line_no);
      t.alarm_high = parse_float(toks[5], line_no);
      if (toks[1] == "temperature") sc.thresholds.temperature = t;
      else if (toks[1] == "voltage") sc.thresholds.voltage = t;
      else if (toks[1] == "current") sc.thresholds.current = t;
      else throw ParseError(line_no, "unknown metric '" + toks[1] + "'");
    } else if (head == "event") {
      if (toks.size() != 7 && toks.size() != 8) {
        throw ParseError(
            line_no, "expected 'event <dur> <x> <y> <z> <component> [dir] <kind>'");
      }
      ScenarioEvent ev;
      ev.time_us = parse_duration(toks[1], line_no);
      ev.target = parse_coord(toks, 2, line_no);
      const auto comp = parse_component(toks[5]);
      if (!comp) throw ParseError(line_no, "unknown component '" + toks[5] + "'");
      ev.component = *comp;
      std::size_t kind_pos = 6;
      if (toks.size() == 8) {
        const auto dir = parse_direction(toks[6]);
        if (!dir) throw ParseError(line_no, "unknown direction '" + toks[6] + "'");
        ev.link_dir = dir;
        kind_pos = 7;
      }
      const auto kind = parse_kind(toks[kind_pos]);
      if (!kind) {
        throw ParseError(line_no, "unknown event kind '" + toks[kind_pos] + "'");
      }
      ev.kind = *kind;
      sc.events.push_back(ev);
    } else if (head == "expect") {
      if (toks.size() < 2) throw ParseError(line_no, "expected 'expect <what> ...'");
      Expectation ex;
      if (toks[1] == "none") {
        expect_count(toks, 2, line_no, "expect none");
        ex.what = Expectation::What::NoFaults;
      } else if (toks[1] == "aware" || toks[1] == "detected" ||
                 toks[1] == "never") {
        expect_count(toks, 6, line_no,
                     "expect " + toks[1] + " <x> <y> <z> <fault_key>");
        ex.what = toks[1] == "aware"      ? Expectation::What::AwareOf
                  : toks[1] == "detected" ? Expectation::What::DetectedAt
                                          : Expectation::What::NeverClass;
        ex.node = parse_coord(toks, 2, line_no);
        ex.fault_key = toks[5];
      } else {
        throw ParseError(line_no, "unknown expectation '" + toks[1] + "'");
      }
      sc.expects.push_back(ex);
    } else {
      throw ParseError(line_no, "unknown directive '" + head + "'");
    }
  }

  sc.validate();
  return sc;
}

FaultScenario parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

FaultScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file: " + path);
  return parse_scenario(in);
}

}  // namespace lofamo::sim
