#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace lofamo::bufmgr {

// One registered receive buffer. len counts bytes and must be positive;
// virt_addr + len - 1 must not wrap the address space.
struct BufferDescriptor {
  std::uint64_t virt_addr = 0;
  std::uint32_t len = 0;
  std::uint32_t flags = 0;
  std::uint64_t magic_word = 0;

  friend bool operator==(const BufferDescriptor&, const BufferDescriptor&) = default;
};

// True iff [start, end] lies inside [virt_addr, virt_addr + len - 1].
// Exact for the full 64-bit range; no intermediate overflow.
constexpr bool check_addr_in_range(std::uint64_t start, std::uint64_t end,
                                   std::uint64_t virt_addr, std::uint32_t len) {
  if (len == 0) return false;
  return virt_addr <= start && end >= start &&
         end - virt_addr <= std::uint64_t{len} - 1;
}

// Scan-cost accounting for the differential tests and the benchmark trace:
// one probe per live slot visited (or per pool element), abstract units.
struct OpCost {
  unsigned probes = 0;
};

// ---------------------------------------------------------------------------
// Fixed register-bank table: 32 descriptor slots across four register files
// (address, length, flags, magic), a live-slot bitmask BM, the slot pointer
// BI and the two condition flags BC (free-slot found) / RC (last range check).
// ---------------------------------------------------------------------------
class BufferTable {
public:
  static constexpr unsigned kSlots = 32;

  // Finds the lowest clear BM bit; on success points BI at it, marks it live
  // and sets BC. BC=false when the table is full.
  bool free_slot();

  // Writes the descriptor into slot BI. Only meaningful right after a
  // successful free_slot().
  void write_slot(const BufferDescriptor& d);

  // free_slot + write_slot. Returns BC. Throws std::invalid_argument on a
  // zero-length or address-wrapping descriptor.
  bool add(const BufferDescriptor& d, OpCost* cost = nullptr);

  // Walks live slots in ascending index order; first descriptor whose range
  // covers [start, end] wins. RC keeps the last range-check result.
  std::optional<BufferDescriptor> search(std::uint64_t start, std::uint64_t end,
                                         OpCost* cost = nullptr);

  // Clears the BM bit of the first live slot matching (virt_addr, len)
  // exactly. Returns false if none matches.
  bool remove(std::uint64_t virt_addr, std::uint32_t len, OpCost* cost = nullptr);

  std::uint32_t mask() const { return bm_; }
  unsigned index() const { return bi_; }
  bool condition() const { return bc_; }
  bool range_condition() const { return rc_; }
  unsigned live_count() const;
  std::optional<BufferDescriptor> slot(unsigned idx) const;

private:
  std::array<std::uint64_t, kSlots> bva_{};
  std::array<std::uint32_t, kSlots> bln_{};
  std::array<std::uint32_t, kSlots> bfl_{};
  std::array<std::uint64_t, kSlots> bmw_{};
  std::uint32_t bm_ = 0;
  unsigned bi_ = 0;
  bool bc_ = false;
  bool rc_ = false;
};

// ---------------------------------------------------------------------------
// Insertion-ordered pool with the same observable contract as BufferTable,
// including the 32-entry capacity. Search returns the earliest inserted
// match; remove drops the earliest exact match. Differential oracle for
// BufferTable. Both containers key matches the same way as long as every
// live descriptor is unique in (virt_addr, len), which the tests maintain.
// ---------------------------------------------------------------------------
class ReferencePool {
public:
  bool add(const BufferDescriptor& d, OpCost* cost = nullptr);
  std::optional<BufferDescriptor> search(std::uint64_t start, std::uint64_t end,
                                         OpCost* cost = nullptr) const;
  bool remove(std::uint64_t virt_addr, std::uint32_t len, OpCost* cost = nullptr);
  std::size_t size() const { return pool_.size(); }

private:
  std::deque<BufferDescriptor> pool_;
};

// ---------------------------------------------------------------------------
// Deterministic register/search/remove exercise over a fresh table: fill all
// 32 slots (slot k holds virt=0x1000*(k+1), len=0x800), search entries
// 0/16/31, remove them, then show the removed entry no longer resolves.
// ---------------------------------------------------------------------------
struct BenchmarkRow {
  std::string phase;
  std::string op;
  std::uint64_t arg_vaddr = 0;
  std::uint32_t arg_len = 0;
  std::string result;   // ok | full | found | miss | removed
  unsigned probes = 0;
};

struct BenchmarkTrace {
  std::vector<BenchmarkRow> rows;
};

BenchmarkTrace run_benchmark();

// CSV with header phase,op,arg_vaddr,arg_len,result,probes.
std::string benchmark_to_csv(const BenchmarkTrace& trace);
std::string benchmark_to_jsonl(const BenchmarkTrace& trace);

}  // namespace lofamo::bufmgr
