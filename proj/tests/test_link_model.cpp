#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "lofamo/errors.hpp"
#include "lofamo/link_model.hpp"

using namespace lofamo;
using namespace lofamo::linkmodel;
using doctest::Approx;

namespace {

// Independent oracle: total efficiency at credit interval c, from first
// principles (CtrlLimited form used by the optimizer).
double oracle_e_t_ctrl(const LinkParams& p, std::uint32_t c) {
  const double e1 = static_cast<double>(p.s_max_bytes) /
                    (p.protocol_bytes + p.s_max_bytes);
  const double e2 = static_cast<double>(c) / (c + 2.0);
  const double l_t = 2.0 * p.remote_latency_cycles + 2.0 * p.local_latency_cycles;
  const double w = l_t + c;
  const double e3 = static_cast<double>(p.t_red_words) / (p.t_red_words + w);
  return e1 * e2 * e3;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scalar anchors
// ---------------------------------------------------------------------------

TEST_CASE("protocol and credit efficiency anchors") {
  const LinkParams p{};
  CHECK(efficiency_e1(p) == Approx(4096.0 / 4160.0).epsilon(1e-12));
  CHECK(efficiency_e1(p) == Approx(0.985).epsilon(0.001));
  CHECK(efficiency_e2(p) == Approx(35.0 / 37.0).epsilon(1e-12));
  CHECK(efficiency_e2(p) == Approx(0.946).epsilon(0.001));
  CHECK(round_trip_cycles(p) == 110);
  CHECK(wait_cycles(p) == 145);
}

TEST_CASE("stall efficiency in both credit-return modes") {
  const LinkParams p{};
  const double e3_ctrl = efficiency_e3(p, CreditReturnMode::CtrlLimited);
  CHECK(e3_ctrl == Approx(506.0 / 651.0).epsilon(1e-12));
  CHECK(e3_ctrl == Approx(0.777).epsilon(0.001));

  // Router-limited: credits only on packet boundaries, n = floor(506/256) = 1.
  const double e3_router = efficiency_e3(p, CreditReturnMode::RouterLimited);
  CHECK(e3_router == Approx(256.0 / 401.0).epsilon(1e-12));
  CHECK(e3_router == Approx(0.638).epsilon(0.001));
}

TEST_CASE("total efficiency and bandwidth") {
  const LinkParams p{};
  const auto ctrl = total_efficiency_and_bandwidth(p, CreditReturnMode::CtrlLimited);
  CHECK(ctrl.e_t == Approx(0.724).epsilon(0.0015));
  CHECK(ctrl.l_t_cycles == 110);
  CHECK(ctrl.w_cycles == 145);
  CHECK(ctrl.bw_l_max_mbs == Approx(2800.0));

  const auto router = total_efficiency_and_bandwidth(p, CreditReturnMode::RouterLimited);
  CHECK(router.e_t == Approx(0.595).epsilon(0.0017));
  CHECK(router.e_t == Approx(efficiency_e1(p) * efficiency_e2(p) *
                             efficiency_e3(p, CreditReturnMode::RouterLimited))
                          .epsilon(1e-12));
  CHECK(router.predicted_bw_mbs == Approx(router.e_t * 2800.0).epsilon(1e-12));

  LinkParams fast = p;
  fast.line_rate_gbps = 34.0;
  const auto at34 = total_efficiency_and_bandwidth(fast, CreditReturnMode::RouterLimited);
  CHECK(at34.bw_l_max_mbs == Approx(3400.0));
}

TEST_CASE("router-limited mode needs at least one packet under t_red") {
  LinkParams p{};
  p.t_red_words = 255;  // one word short of a max packet
  CHECK_THROWS_AS(efficiency_e3(p, CreditReturnMode::RouterLimited),
                  ThresholdTooSmall);
  CHECK_NOTHROW(efficiency_e3(p, CreditReturnMode::CtrlLimited));
}

TEST_CASE("parameter validation") {
  LinkParams p{};
  p.word_bytes = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LinkParams{};
  p.s_max_bytes = 100;  // not a whole number of words
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LinkParams{};
  p.encoding_efficiency = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LinkParams{};
  p.line_rate_gbps = -1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(LinkParams{}.validate());
}

// ---------------------------------------------------------------------------
// Credit interval optimizer
// ---------------------------------------------------------------------------

TEST_CASE("credit optimizer matches the exhaustive oracle") {
  const LinkParams p{};
  std::uint32_t best_c = 0;
  double best = -1;
  for (std::uint32_t c = 0; c <= 55; ++c) {
    const double e_t = oracle_e_t_ctrl(p, c);
    if (e_t > best) {
      best = e_t;
      best_c = c;
    }
  }
  const CreditOptimum got = optimize_credit_interval(p);
  CHECK(got.c == best_c);
  CHECK(got.c == 35);
  CHECK(got.e_t == Approx(best).epsilon(1e-12));

  // Stays the argmax under different windows containing it.
  CHECK(optimize_credit_interval(p, 10, 55).c == 35);
  CHECK(optimize_credit_interval(p, 0, 35).c == 35);
  // Clipped window: the best inside the window wins.
  const auto clipped = optimize_credit_interval(p, 0, 20);
  CHECK(clipped.c == 20);
}

TEST_CASE("optimizer oracle agreement on perturbed parameters") {
  std::mt19937_64 rng(0x0C);
  for (int trial = 0; trial < 50; ++trial) {
    LinkParams p{};
    p.t_red_words = 64 + static_cast<std::uint32_t>(rng() % 2048);
    p.remote_latency_cycles = 1 + static_cast<std::uint32_t>(rng() % 100);
    p.local_latency_cycles = 1 + static_cast<std::uint32_t>(rng() % 50);
    std::uint32_t best_c = 0;
    double best = -1;
    for (std::uint32_t c = 0; c <= 55; ++c) {
      const double e_t = oracle_e_t_ctrl(p, c);
      if (e_t > best) {
        best = e_t;
        best_c = c;
      }
    }
    const auto got = optimize_credit_interval(p);
    CHECK(got.c == best_c);
    CHECK(got.e_t == Approx(best).epsilon(1e-12));
  }
}

// ---------------------------------------------------------------------------
// FIFO depth sweep
// ---------------------------------------------------------------------------

TEST_CASE("fifo sweep rows match the closed-form oracle") {
  const LinkParams base{};
  const auto rows = fifo_sweep(base);
  REQUIRE(rows.size() == 4);

  const std::uint32_t depths[] = {512, 1024, 2048, 4096};
  const double e1 = 4096.0 / 4160.0;
  const double e2 = 35.0 / 37.0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rows[i].depth_words == depths[i]);
    const std::uint32_t t_red = depths[i] - 6;
    const std::uint32_t n = t_red / 256;
    const double e3 = (n * 256.0) / (n * 256.0 + 145.0);
    CHECK(rows[i].e3 == Approx(e3).epsilon(1e-12));
    CHECK(rows[i].e_t == Approx(e1 * e2 * e3).epsilon(1e-12));
    REQUIRE(rows[i].bw_mbs.size() == 2);
    CHECK(rows[i].bw_mbs[0] == Approx(e1 * e2 * e3 * 2800.0).epsilon(1e-12));
    CHECK(rows[i].bw_mbs[1] == Approx(e1 * e2 * e3 * 3400.0).epsilon(1e-12));
  }

  // Published reference points for the stall factor and the total.
  CHECK(rows[0].e3 == Approx(0.638).epsilon(0.001));
  CHECK(rows[1].e3 == Approx(0.841).epsilon(0.001));
  CHECK(rows[2].e3 == Approx(0.925).epsilon(0.001));
  CHECK(rows[3].e3 == Approx(0.964).epsilon(0.001));
  CHECK(rows[0].e_t == Approx(0.595).epsilon(0.001));
  CHECK(rows[1].e_t == Approx(0.784).epsilon(0.001));
  CHECK(rows[2].e_t == Approx(0.862).epsilon(0.001));
  CHECK(rows[3].e_t == Approx(0.898).epsilon(0.001));
}

TEST_CASE("fifo sweep rejects depths under one packet plus margin") {
  const LinkParams base{};
  CHECK_THROWS_AS(fifo_sweep(base, {261}), DepthTooSmall);  // 256 + 6 > 261
  CHECK_NOTHROW(fifo_sweep(base, {262}));
}

TEST_CASE("sweep csv shape") {
  const LinkParams base{};
  const auto rows = fifo_sweep(base);
  const std::string csv = sweep_to_csv(rows);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "depth,e3,e_t,bw_28gbps_mbs,bw_34gbps_mbs");
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == 4);

  const std::string jsonl = sweep_to_jsonl(rows);
  CHECK(jsonl.find("\"depth\":512") != std::string::npos);
  CHECK(jsonl.find("\"bw_34gbps_mbs\":") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Host read curve and size prediction
// ---------------------------------------------------------------------------

TEST_CASE("host read curve interpolates and clamps") {
  HostReadCurve curve;
  curve.points = {{0.0, 100.0}, {100.0, 200.0}, {200.0, 150.0}};
  CHECK(curve.at(-5.0) == Approx(100.0));
  CHECK(curve.at(0.0) == Approx(100.0));
  CHECK(curve.at(50.0) == Approx(150.0));
  CHECK(curve.at(150.0) == Approx(175.0));
  CHECK(curve.at(1000.0) == Approx(150.0));

  const HostReadCurve flat{};
  CHECK(flat.at(1.0) == Approx(2800.0));
  CHECK(flat.at(1e9) == Approx(2800.0));
}

TEST_CASE("size prediction takes the binding constraint") {
  const LinkParams p{};
  HostReadCurve slow;
  slow.points = {{0.0, 100.0}};
  CHECK(predicted_bw_for_size(p, CreditReturnMode::RouterLimited, 4096, slow) ==
        Approx(100.0));
  HostReadCurve fast;
  fast.points = {{0.0, 1e6}};
  const auto rep = total_efficiency_and_bandwidth(p, CreditReturnMode::RouterLimited);
  CHECK(predicted_bw_for_size(p, CreditReturnMode::RouterLimited, 4096, fast) ==
        Approx(rep.predicted_bw_mbs));
}

// ---------------------------------------------------------------------------
// Effective frequency
// ---------------------------------------------------------------------------

TEST_CASE("effective frequency reference rows") {
  struct Row {
    double peak_mbs, mem_mb, f_real;
    double f_eff, o;
  };
  const Row rows[] = {
      {2800.0, 0.105, 250.0, 26.7, 0.107},   // TX block
      {1500.0, 0.088, 250.0, 17.0, 0.068},   // GPU TX
      {9600.0, 0.167, 175.0, 57.5, 0.328},   // torus links, all six
      {1200.0, 0.402, 200.0, 3.0, 0.015},    // microcontroller
  };
  for (const Row& r : rows) {
    const auto got = effective_frequency(r.peak_mbs, r.mem_mb, r.f_real);
    CHECK(got.f_eff_mhz == Approx(r.peak_mbs / r.mem_mb / 1000.0).epsilon(1e-12));
    CHECK(std::abs(got.f_eff_mhz - r.f_eff) < 0.1);
    CHECK(std::abs(got.o_ratio - r.o) < 0.001);
    CHECK(got.o_in_unit_range);
  }
  CHECK_THROWS_AS(effective_frequency(100.0, 0.0, 100.0), ZeroMemory);
}

TEST_CASE("o ratio flags out-of-range values") {
  // 1 MB footprint, 1 TB/s peak at 1 MHz real clock: O far above 1.
  const auto got = effective_frequency(1e6, 1.0, 1.0);
  CHECK_FALSE(got.o_in_unit_range);
}

// ---------------------------------------------------------------------------
// GPU TX admission
// ---------------------------------------------------------------------------

TEST_CASE("gpu admission known cases") {
  // Queue would be exactly full: reject.
  CHECK_FALSE(gpu_admission_check(512, 0, 1, 512, 0, 0, 4));
  // Two writes drained leaves one word of slack: admit.
  CHECK(gpu_admission_check(512, 2, 1, 512, 0, 0, 4));
  // Reads in flight at the cap: reject.
  CHECK_FALSE(gpu_admission_check(0, 0, 1, 512, 4, 0, 4));
  CHECK(gpu_admission_check(0, 0, 1, 512, 3, 0, 4));
  CHECK(gpu_admission_check(0, 0, 1, 512, 4, 1, 4));
}

TEST_CASE("gpu admission rejects invalid accounting") {
  CHECK_THROWS_AS(gpu_admission_check(-1, 0, 0, 1, 0, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gpu_admission_check(0, 0, 0, 1, 1, 2, 4), std::invalid_argument);
}

TEST_CASE("gpu admission differential") {
  std::mt19937_64 rng(0xAD);
  for (int i = 0; i < 10'000; ++i) {
    const std::int64_t w_req = static_cast<std::int64_t>(rng() % 1024);
    const std::int64_t w_wrt = static_cast<std::int64_t>(rng() % (w_req + 1));
    const std::int64_t w_new = static_cast<std::int64_t>(rng() % 64);
    const std::int64_t w_free = static_cast<std::int64_t>(rng() % 1024);
    const std::int64_t r_sent = static_cast<std::int64_t>(rng() % 64);
    const std::int64_t r_done = static_cast<std::int64_t>(rng() % (r_sent + 1));
    const std::int64_t r_max = static_cast<std::int64_t>(rng() % 16);
    const bool expected =
        (w_req - w_wrt + w_new < w_free) && (r_sent - r_done < r_max);
    CHECK(gpu_admission_check(w_req, w_wrt, w_new, w_free, r_sent, r_done,
                              r_max) == expected);
  }
}
