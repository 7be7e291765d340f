#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lofamo/errors.hpp"

namespace lofamo::linkmodel {

// Which resource throttles the return of credits: the link control FSM
// (credits leave as soon as words drain past T_RED) or the router arbiter
// (credits leave only on whole-packet boundaries).
enum class CreditReturnMode {
  CtrlLimited,
  RouterLimited,
};

// Torus link and flow-control parameters. Cycle counts are transceiver clock
// cycles; sizes in bytes unless the name says words (one word = word_bytes).
struct LinkParams {
  std::uint32_t s_max_bytes = 4096;       // max payload per packet
  std::uint32_t protocol_bytes = 64;      // fixed per-packet overhead
  std::uint32_t word_bytes = 16;
  std::uint32_t remote_latency_cycles = 35;  // L_R, one way across the cable
  std::uint32_t local_latency_cycles = 20;   // L_L, on-chip to/from the FSM
  std::uint32_t credit_interval_cycles = 35; // C, words between credit returns
  std::uint32_t t_red_words = 506;        // backpressure threshold
  std::uint32_t t_yellow_words = 256;     // early-warning threshold
  std::uint32_t fifo_depth_words = 512;
  double line_rate_gbps = 28.0;
  double encoding_efficiency = 0.8;       // 8b10b line coding

  std::uint32_t s_max_words() const { return s_max_bytes / word_bytes; }

  // Throws std::invalid_argument on violated structural invariants.
  void validate() const;
};

struct EfficiencyReport {
  double e1 = 0;  // payload fraction of each packet
  double e2 = 0;  // credit channel utilization
  double e3 = 0;  // FIFO drain duty cycle
  double e_t = 0; // product
  std::uint32_t l_t_cycles = 0;  // round-trip latency 2*L_R + 2*L_L
  std::uint32_t w_cycles = 0;    // credit turnaround L_T + C
  double bw_l_max_mbs = 0;       // line rate after encoding, MB/s
  double predicted_bw_mbs = 0;   // e_t * bw_l_max
};

// E1 = S_MAX / (P + S_MAX).
double efficiency_e1(const LinkParams& p);

// E2 = C / (C + 2): every C payload words cost one credit word each way.
double efficiency_e2(const LinkParams& p);

// Round trip of one credit: L_T = 2*L_R + 2*L_L, W = L_T + C.
std::uint32_t round_trip_cycles(const LinkParams& p);
std::uint32_t wait_cycles(const LinkParams& p);

// CtrlLimited:   E3 = T_RED / (T_RED + W)
// RouterLimited: E3 = n*S / (n*S + W), n = floor(T_RED / S), S = s_max_words.
// Throws ThresholdTooSmall when RouterLimited and T_RED < S.
double efficiency_e3(const LinkParams& p, CreditReturnMode mode);

EfficiencyReport total_efficiency_and_bandwidth(const LinkParams& p,
                                                CreditReturnMode mode);

// Host-side read bandwidth as a function of message size: piecewise-linear
// between the given points, clamped beyond the ends. Default is the flat
// 2.8 GB/s plateau measured for large reads.
struct HostReadCurve {
  std::vector<std::pair<double, double>> points{{0.0, 2800.0}};  // (bytes, MB/s)

  double at(double size_bytes) const;
};

// min(host read bandwidth, link prediction) for one message size.
double predicted_bw_for_size(const LinkParams& p, CreditReturnMode mode,
                             double size_bytes, const HostReadCurve& host = {});

// Integer scan of C in [c_min, c_max] maximizing E_T in CtrlLimited mode;
// ties resolve to the smaller C.
struct CreditOptimum {
  std::uint32_t c = 0;
  double e_t = 0;
};
CreditOptimum optimize_credit_interval(const LinkParams& p,
                                       std::uint32_t c_min = 0,
                                       std::uint32_t c_max = 55);

// One row of the FIFO-depth sweep: T_RED = depth - margin(6), RouterLimited.
struct SweepRow {
  std::uint32_t depth_words = 0;
  double e3 = 0;
  double e_t = 0;
  std::vector<double> bw_mbs;  // one entry per requested line rate
};

inline constexpr std::uint32_t kFifoMarginWords = 6;

std::vector<SweepRow> fifo_sweep(const LinkParams& base,
                                 const std::vector<std::uint32_t>& depths =
                                     {512, 1024, 2048, 4096},
                                 const std::vector<double>& rates_gbps = {28.0,
                                                                          34.0});

// CSV with header depth,e3,e_t,bw_28gbps_mbs,bw_34gbps_mbs (rate columns
// follow the requested rates).
std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                         const std::vector<double>& rates_gbps = {28.0, 34.0});
std::string sweep_to_jsonl(const std::vector<SweepRow>& rows,
                           const std::vector<double>& rates_gbps = {28.0, 34.0});

// Effective frequency of an embedded memory client: the clock at which the
// block would saturate its measured bandwidth given its footprint. Reported
// per the reference convention f_eff[MHz] = peak[MB/s] / mem[MB] / 1000;
// O = f_eff / f_real.
struct EffectiveFrequency {
  double f_eff_mhz = 0;
  double o_ratio = 0;
  bool o_in_unit_range = true;  // advisory: O outside [0,1] is suspicious
};

EffectiveFrequency effective_frequency(double peak_bw_mbs, double used_mem_mb,
                                       double f_real_mhz);

// GPU TX queue admission: accept a new burst only if the write queue keeps
// room and reads in flight stay under the cap.
bool gpu_admission_check(std::int64_t w_req, std::int64_t w_wrt,
                         std::int64_t w_new, std::int64_t w_free,
                         std::int64_t r_sent, std::int64_t r_done,
                         std::int64_t r_max);

}  // namespace lofamo::linkmodel
