#include "lofamo/link_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace lofamo::linkmodel {

namespace {

std::string fmt(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string rate_tag(double gbps) {
  // 28.0 -> "28", 30.5 -> "30.5"
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", gbps);
  return buf;
}

double bw_l_max_mbs(double line_rate_gbps, double encoding_efficiency) {
  return line_rate_gbps * encoding_efficiency / 8.0 * 1000.0;
}

// Raw E_T(C) for the optimizer scan; admits C = 0 where the closed form
// degenerates to zero throughput.
double e_t_of_c(const LinkParams& p, std::uint32_t c) {
  const double e1 = static_cast<double>(p.s_max_bytes) /
                    (p.protocol_bytes + p.s_max_bytes);
  const double e2 = static_cast<double>(c) / (c + 2.0);
  const double w = 2.0 * p.remote_latency_cycles + 2.0 * p.local_latency_cycles + c;
  const double e3 = static_cast<double>(p.t_red_words) / (p.t_red_words + w);
  return e1 * e2 * e3;
}

}  // namespace

void LinkParams::validate() const {
  if (word_bytes == 0) throw std::invalid_argument("word_bytes must be > 0");
  if (s_max_bytes == 0 || s_max_bytes % word_bytes != 0) {
    throw std::invalid_argument("s_max must be a positive multiple of word_bytes");
  }
  if (credit_interval_cycles < 1) {
    throw std::invalid_argument("credit interval must be >= 1");
  }
  if (!(t_yellow_words < t_red_words)) {
    throw std::invalid_argument("t_yellow must be < t_red");
  }
  if (!(t_red_words <= fifo_depth_words)) {
    throw std::invalid_argument("t_red must be <= fifo depth");
  }
  if (line_rate_gbps <= 0 || encoding_efficiency <= 0 || encoding_efficiency > 1) {
    throw std::invalid_argument("bad line rate or encoding efficiency");
  }
}

double efficiency_e1(const LinkParams& p) {
  return static_cast<double>(p.s_max_bytes) / (p.protocol_bytes + p.s_max_bytes);
}

double efficiency_e2(const LinkParams& p) {
  return static_cast<double>(p.credit_interval_cycles) /
         (p.credit_interval_cycles + 2.0);
}

std::uint32_t round_trip_cycles(const LinkParams& p) {
  return 2 * p.remote_latency_cycles + 2 * p.local_latency_cycles;
}

std::uint32_t wait_cycles(const LinkParams& p) {
  return round_trip_cycles(p) + p.credit_interval_cycles;
}

double efficiency_e3(const LinkParams& p, CreditReturnMode mode) {
  const double w = wait_cycles(p);
  if (mode == CreditReturnMode::CtrlLimited) {
    return static_cast<double>(p.t_red_words) / (p.t_red_words + w);
  }
  const std::uint32_t s = p.s_max_words();
  const std::uint32_t n = p.t_red_words / s;
  if (n < 1) {
    throw ThresholdTooSmall("t_red=" + std::to_string(p.t_red_words) +
                            " words < one max packet (" + std::to_string(s) +
                            " words)");
  }
  const double drained = static_cast<double>(n) * s;
  return drained / (drained + w);
}

EfficiencyReport total_efficiency_and_bandwidth(const LinkParams& p,
                                                CreditReturnMode mode) {
  EfficiencyReport r;
  r.e1 = efficiency_e1(p);
  r.e2 = efficiency_e2(p);
  r.e3 = efficiency_e3(p, mode);
  r.e_t = r.e1 * r.e2 * r.e3;
  r.l_t_cycles = round_trip_cycles(p);
  r.w_cycles = wait_cycles(p);
  r.bw_l_max_mbs = bw_l_max_mbs(p.line_rate_gbps, p.encoding_efficiency);
  r.predicted_bw_mbs = r.e_t * r.bw_l_max_mbs;
  return r;
}

double HostReadCurve::at(double size_bytes) const {
  if (points.empty()) return 0.0;
  if (size_bytes <= points.front().first) return points.front().second;
  if (size_bytes >= points.back().first) return points.back().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (size_bytes <= points[i].first) {
      const auto& [x0, y0] = points[i - 1];
      const auto& [x1, y1] = points[i];
      const double t = (size_bytes - x0) / (x1 - x0);
      return y0 + t * (y1 - y0);
    }
  }
  return points.back().second;
}

double predicted_bw_for_size(const LinkParams& p, CreditReturnMode mode,
                             double size_bytes, const HostReadCurve& host) {
  const EfficiencyReport r = total_efficiency_and_bandwidth(p, mode);
  return std::min(host.at(size_bytes), r.predicted_bw_mbs);
}

CreditOptimum optimize_credit_interval(const LinkParams& p, std::uint32_t c_min,
                                       std::uint32_t c_max) {
  CreditOptimum best{c_min, e_t_of_c(p, c_min)};
  for (std::uint32_t c = c_min + 1; c <= c_max; ++c) {
    const double e_t = e_t_of_c(p, c);
    if (e_t > best.e_t) best = {c, e_t};  // strict: ties keep the smaller C
  }
  return best;
}

std::vector<SweepRow> fifo_sweep(const LinkParams& base,
                                 const std::vector<std::uint32_t>& depths,
                                 const std::vector<double>& rates_gbps) {
  std::vector<SweepRow> rows;
  rows.reserve(depths.size());
  for (std::uint32_t depth : depths) {
    if (depth < base.s_max_words() + kFifoMarginWords) {
      throw DepthTooSmall("depth=" + std::to_string(depth) + " words < " +
                          std::to_string(base.s_max_words() + kFifoMarginWords));
    }
    LinkParams p = base;
    p.fifo_depth_words = depth;
    p.t_red_words = depth - kFifoMarginWords;
    p.t_yellow_words = std::min(base.t_yellow_words, p.t_red_words - 1);

    SweepRow row;
    row.depth_words = depth;
    row.e3 = efficiency_e3(p, CreditReturnMode::RouterLimited);
    row.e_t = efficiency_e1(p) * efficiency_e2(p) * row.e3;
    for (double rate : rates_gbps) {
      row.bw_mbs.push_back(row.e_t * bw_l_max_mbs(rate, p.encoding_efficiency));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows,
                         const std::vector<double>& rates_gbps) {
  std::ostringstream out;
  out << "depth,e3,e_t";
  for (double r : rates_gbps) out << ",bw_" << rate_tag(r) << "gbps_mbs";
  out << "\n";
  for (const auto& row : rows) {
    out << row.depth_words << "," << fmt(row.e3, 6) << "," << fmt(row.e_t, 6);
    for (double bw : row.bw_mbs) out << "," << fmt(bw, 3);
    out << "\n";
  }
  return out.str();
}

std::string sweep_to_jsonl(const std::vector<SweepRow>& rows,
                           const std::vector<double>& rates_gbps) {
  std::ostringstream out;
  for (const auto& row : rows) {
    out << "{\"depth\":" << row.depth_words << ",\"e3\":" << fmt(row.e3, 6)
        << ",\"e_t\":" << fmt(row.e_t, 6);
    for (std::size_t i = 0; i < rates_gbps.size() && i < row.bw_mbs.size(); ++i) {
      out << ",\"bw_" << rate_tag(rates_gbps[i]) << "gbps_mbs\":"
          << fmt(row.bw_mbs[i], 3);
    }
    out << "}\n";
  }
  return out.str();
}

EffectiveFrequency effective_frequency(double peak_bw_mbs, double used_mem_mb,
                                       double f_real_mhz) {
  if (used_mem_mb <= 0) throw ZeroMemory();
  if (f_real_mhz <= 0) throw std::invalid_argument("f_real must be > 0");
  EffectiveFrequency out;
  // Reference convention: MB/s over MB, quoted in "MHz" after dividing by 1000.
  out.f_eff_mhz = peak_bw_mbs / used_mem_mb / 1000.0;
  out.o_ratio = out.f_eff_mhz / f_real_mhz;
  out.o_in_unit_range = out.o_ratio >= 0.0 && out.o_ratio <= 1.0;
  return out;
}

bool gpu_admission_check(std::int64_t w_req, std::int64_t w_wrt,
                         std::int64_t w_new, std::int64_t w_free,
                         std::int64_t r_sent, std::int64_t r_done,
                         std::int64_t r_max) {
  if (w_req < 0 || w_wrt < 0 || w_new < 0 || w_free < 0 || r_sent < 0 ||
      r_done < 0 || r_max < 0) {
    throw std::invalid_argument("admission counters must be non-negative");
  }
  if (r_done > r_sent) {
    throw std::invalid_argument("r_done cannot exceed r_sent");
  }
  return (w_req - w_wrt + w_new < w_free) && (r_sent - r_done < r_max);
}

}  // namespace lofamo::linkmodel
