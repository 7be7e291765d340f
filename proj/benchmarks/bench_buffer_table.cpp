#include <benchmark/benchmark.h>

#include <cstdint>

#include "lofamo/buffer_table.hpp"

namespace {

using lofamo::bufmgr::BufferDescriptor;
using lofamo::bufmgr::BufferTable;

constexpr std::uint32_t kLen = 0x800;

BufferTable filled_table() {
  BufferTable t;
  for (unsigned k = 0; k < BufferTable::kSlots; ++k) {
    t.add(BufferDescriptor{0x1000ull * (k + 1), kLen, 0, 0});
  }
  return t;
}

void BM_SearchSlot(benchmark::State& state) {
  BufferTable t = filled_table();
  const std::uint64_t base = 0x1000ull * (static_cast<std::uint64_t>(state.range(0)) + 1);
  for (auto _ : state) {
    auto hit = t.search(base, base + kLen - 1);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_SearchSlot)->Arg(0)->Arg(16)->Arg(31);

void BM_RemoveReadd(benchmark::State& state) {
  BufferTable t = filled_table();
  const std::uint64_t base = 0x1000ull * (static_cast<std::uint64_t>(state.range(0)) + 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(t.remove(base, kLen));
    benchmark::DoNotOptimize(t.add(BufferDescriptor{base, kLen, 0, 0}));
  }
}
BENCHMARK(BM_RemoveReadd)->Arg(0)->Arg(16)->Arg(31);

void BM_RangeCheck(benchmark::State& state) {
  std::uint64_t start = 0x123456789ABCull;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lofamo::bufmgr::check_addr_in_range(start, start + 0x7FF, 0x123456780000ull, 0x10000));
    start += 16;
  }
}
BENCHMARK(BM_RangeCheck);

void BM_SearchMiss(benchmark::State& state) {
  BufferTable t = filled_table();
  for (auto _ : state) {
    auto hit = t.search(0xFFFF0000ull, 0xFFFF07FFull);
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_SearchMiss);

}  // namespace

BENCHMARK_MAIN();
