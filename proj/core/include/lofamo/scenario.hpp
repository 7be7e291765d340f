#pragma once

#include <iosfwd>
#include <string>

#include "lofamo/sim.hpp"

namespace lofamo::sim {

// Line-oriented scenario text:
//
//   # comment / blank lines ignored
//   dims <nx> <ny> <nz>
//   master <x> <y> <z>
//   duration <n><us|ms|s>
//   t_write <dur>            t_read <dur>
//   snet_delay <dur>         snet_ping_window <dur>
//   link_delay <dur>
//   seed <n>
//   sick_ratio <float>       min_packets <n>
//   mask -<fault_class>      (repeatable; all classes enabled by default)
//   threshold <temperature|voltage|current> <warn_lo> <warn_hi> <alarm_lo> <alarm_hi>
//   event <dur> <x> <y> <z> <component> [<dir>] <break|sick|restore>
//   expect aware <x> <y> <z> <fault_key>
//   expect detected <x> <y> <z> <fault_key>
//   expect never <x> <y> <z> <fault_key>
//   expect none
//
// Components: host dnp dnp_core snet_iface memory peripheral temperature
// voltage current link (link takes a direction: x+ x- y+ y- z+ z-).
//
// Throws ParseError (with line number) on malformed lines and
// ValidationError on violated invariants (event order, coordinate range,
// t_write < t_read, threshold nesting).
FaultScenario load_scenario(const std::string& path);
FaultScenario parse_scenario(std::istream& in);
FaultScenario parse_scenario_text(const std::string& text);

}  // namespace lofamo::sim
