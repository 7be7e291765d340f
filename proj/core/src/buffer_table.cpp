#include "lofamo/buffer_table.hpp"

#include <sstream>
#include <stdexcept>

namespace lofamo::bufmgr {

namespace {

void validate_descriptor(const BufferDescriptor& d) {
  if (d.len == 0) throw std::invalid_argument("buffer length must be > 0");
  if (d.virt_addr > UINT64_MAX - (d.len - 1)) {
    throw std::invalid_argument("buffer wraps the address space");
  }
}

}  // namespace

bool BufferTable::free_slot() {
  for (unsigned i = 0; i < kSlots; ++i) {
    if ((bm_ & (1u << i)) == 0) {
      bi_ = i;
      bm_ |= 1u << i;
      bc_ = true;
      return true;
    }
  }
  bc_ = false;
  return false;
}

void BufferTable::write_slot(const BufferDescriptor& d) {
  bva_[bi_] = d.virt_addr;
  bln_[bi_] = d.len;
  bfl_[bi_] = d.flags;
  bmw_[bi_] = d.magic_word;
}

bool BufferTable::add(const BufferDescriptor& d, OpCost* cost) {
  validate_descriptor(d);
  // The slot scan is one priority-encoder operation in the register bank.
  if (cost) cost->probes = 1;
  if (!free_slot()) return false;
  write_slot(d);
  return true;
}

std::optional<BufferDescriptor> BufferTable::search(std::uint64_t start,
                                                    std::uint64_t end,
                                                    OpCost* cost) {
  unsigned probes = 0;
  for (unsigned i = 0; i < kSlots; ++i) {
    if ((bm_ & (1u << i)) == 0) continue;
    ++probes;
    rc_ = check_addr_in_range(start, end, bva_[i], bln_[i]);
    if (rc_) {
      bi_ = i;
      if (cost) cost->probes = probes;
      return BufferDescriptor{bva_[i], bln_[i], bfl_[i], bmw_[i]};
    }
  }
  if (cost) cost->probes = probes;
  return std::nullopt;
}

bool BufferTable::remove(std::uint64_t virt_addr, std::uint32_t len,
                         OpCost* cost) {
  unsigned probes = 0;
  for (unsigned i = 0; i < kSlots; ++i) {
    if ((bm_ & (1u << i)) == 0) continue;
    ++probes;
    if (bva_[i] == virt_addr && bln_[i] == len) {
      bm_ &= ~(1u << i);
      bi_ = i;
      if (cost) cost->probes = probes;
      return true;
    }
  }
  if (cost) cost->probes = probes;
  return false;
}

unsigned BufferTable::live_count() const {
  unsigned n = 0;
  for (unsigned i = 0; i < kSlots; ++i) {
    if (bm_ & (1u << i)) ++n;
  }
  return n;
}

std::optional<BufferDescriptor> BufferTable::slot(unsigned idx) const {
  if (idx >= kSlots || (bm_ & (1u << idx)) == 0) return std::nullopt;
  return BufferDescriptor{bva_[idx], bln_[idx], bfl_[idx], bmw_[idx]};
}

// ---------------------------------------------------------------------------

bool ReferencePool::add(const BufferDescriptor& d, OpCost* cost) {
  validate_descriptor(d);
  if (cost) cost->probes = 1;
  if (pool_.size() >= BufferTable::kSlots) return false;  // mirror the 32-slot cap
  pool_.push_back(d);
  return true;
}

std::optional<BufferDescriptor> ReferencePool::search(std::uint64_t start,
                                                      std::uint64_t end,
                                                      OpCost* cost) const {
  unsigned probes = 0;
  for (const auto& d : pool_) {
    ++probes;
    if (check_addr_in_range(start, end, d.virt_addr, d.len)) {
      if (cost) cost->probes = probes;
      return d;
    }
  }
  if (cost) cost->probes = probes;
  return std::nullopt;
}

bool ReferencePool::remove(std::uint64_t virt_addr, std::uint32_t len,
                           OpCost* cost) {
  unsigned probes = 0;
  for (auto it = pool_.begin(); it != pool_.end(); ++it) {
    ++probes;
    if (it->virt_addr == virt_addr && it->len == len) {
      pool_.erase(it);
      if (cost) cost->probes = probes;
      return true;
    }
  }
  if (cost) cost->probes = probes;
  return false;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kBenchLen = 0x800;
constexpr std::uint32_t kBenchSpan = 16;  // bytes probed per search

std::uint64_t bench_vaddr(unsigned k) { return 0x1000ull * (k + 1); }

void push_row(BenchmarkTrace& t, std::string phase, std::string op,
              std::uint64_t vaddr, std::uint32_t len, std::string result,
              unsigned probes) {
  t.rows.push_back({std::move(phase), std::move(op), vaddr, len,
                    std::move(result), probes});
}

}  // namespace

BenchmarkTrace run_benchmark() {
  BenchmarkTrace t;
  BufferTable table;
  OpCost cost;

  for (unsigned k = 0; k < BufferTable::kSlots; ++k) {
    const bool ok = table.add({bench_vaddr(k), kBenchLen, 0, 0}, &cost);
    push_row(t, "fill", "add", bench_vaddr(k), kBenchLen, ok ? "ok" : "full",
             cost.probes);
  }

  const unsigned picks[] = {0, 16, 31};
  for (unsigned k : picks) {
    const auto hit = table.search(bench_vaddr(k), bench_vaddr(k) + kBenchSpan - 1,
                                  &cost);
    push_row(t, "search", "search", bench_vaddr(k), kBenchSpan,
             hit ? "found" : "miss", cost.probes);
  }

  for (unsigned k : picks) {
    const bool removed = table.remove(bench_vaddr(k), kBenchLen, &cost);
    push_row(t, "remove", "remove", bench_vaddr(k), kBenchLen,
             removed ? "removed" : "miss", cost.probes);
  }

  const auto hit = table.search(bench_vaddr(16), bench_vaddr(16) + kBenchSpan - 1,
                                &cost);
  push_row(t, "verify", "search", bench_vaddr(16), kBenchSpan,
           hit ? "found" : "miss", cost.probes);

  return t;
}

std::string benchmark_to_csv(const BenchmarkTrace& trace) {
  std::ostringstream out;
  out << "phase,op,arg_vaddr,arg_len,result,probes\n";
  for (const auto& r : trace.rows) {
    out << r.phase << "," << r.op << ",0x" << std::hex << r.arg_vaddr
        << std::dec << "," << r.arg_len << "," << r.result << "," << r.probes
        << "\n";
  }
  return out.str();
}

std::string benchmark_to_jsonl(const BenchmarkTrace& trace) {
  std::ostringstream out;
  for (const auto& r : trace.rows) {
    out << "{\"phase\":\"" << r.phase << "\",\"op\":\"" << r.op
        << "\",\"arg_vaddr\":" << r.arg_vaddr << ",\"arg_len\":" << r.arg_len
        << ",\"result\":\"" << r.result << "\",\"probes\":" << r.probes
        << "}\n";
  }
  return out.str();
}

}  // namespace lofamo::bufmgr
