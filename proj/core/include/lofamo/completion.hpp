#pragma once

#include <cstdint>
#include <string>

#include "lofamo/word128.hpp"

namespace lofamo::wire {

// Producers that push completion events into the shared event queue. The
// second 128-bit word identifies the producer via its magic pattern.
enum class EventSource : std::uint8_t {
  TxDma0,
  TxDma1,
  GpuTx,
  Nios,
  Rx,
};

std::string to_string(EventSource s);

// Command descriptor layout shared by the TX and microcontroller queues:
//
//   1..0     pad
//   3..2     tag (kTagCompletion requests a completion event)
//   18..4    command code
//   20..19   destination port
//   31..21   pad
//   63..32   immediate data
//   127..64  queue entry address (written back as the completion magic)
struct Cmd1 {
  std::uint8_t tag = 0;        // 2 bits
  std::uint16_t code = 0;      // 15 bits
  std::uint8_t port_id = 0;    // 2 bits
  std::uint32_t data = 0;
  std::uint64_t entry_addr = 0;

  friend bool operator==(const Cmd1&, const Cmd1&) = default;
};

inline constexpr std::uint8_t kTagCompletion = 0b00;  // completion requested
inline constexpr std::uint8_t kTagDummy = 0b01;       // dismissed silently

Word128 encode_cmd1(const Cmd1& cmd);
Cmd1 decode_cmd1(const Word128& word);

// A queue event: two 128-bit words. For command-driven producers the first
// word is the originating command descriptor; for RX it is the packet header
// and the second word carries the landing address next to the footer half.
struct CompletionEvent {
  EventSource source = EventSource::TxDma0;
  Cmd1 cmd1{};                 // TxDma0/TxDma1/GpuTx/Nios
  Word128 rx_header{};         // Rx
  std::uint64_t rx_phys_addr = 0;
  std::uint64_t rx_footer_lo = 0;

  friend bool operator==(const CompletionEvent&, const CompletionEvent&) = default;
};

struct EventWords {
  Word128 first;
  Word128 second;

  friend bool operator==(const EventWords&, const EventWords&) = default;
};

// Per-producer magic word (both 64-bit halves are identical; the low 32 bits
// of each half are the fixed 0xDAD0DAD0 signature).
Word128 magic_word(EventSource s);

EventWords encode_event(const CompletionEvent& ev);

// Classifies by the second word: a known magic selects its producer, a
// non-magic-shaped word is an RX landing record. A magic-shaped word with an
// unknown producer tag throws UnknownMagic. An RX whose address/footer pair
// happens to be magic-shaped is indistinguishable by construction; the wire
// format offers no further discriminator.
CompletionEvent decode_event(const EventWords& words);

}  // namespace lofamo::wire
