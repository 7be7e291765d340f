#include "lofamo/completion.hpp"

#include "lofamo/errors.hpp"

namespace lofamo::wire {

namespace {

constexpr std::uint64_t kMagicLow32 = 0xDAD0DAD0ull;

constexpr std::uint64_t magic_half(std::uint32_t tag) {
  return (static_cast<std::uint64_t>(tag) << 32) | kMagicLow32;
}

constexpr std::uint32_t kTagTx0 = 0x11111111u;
constexpr std::uint32_t kTagTx1 = 0x22222222u;
constexpr std::uint32_t kTagGpu = 0x00000000u;
constexpr std::uint32_t kTagNios = 0x33333333u;

}  // namespace

std::string to_string(EventSource s) {
  switch (s) {
    case EventSource::TxDma0: return "tx0";
    case EventSource::TxDma1: return "tx1";
    case EventSource::GpuTx: return "gputx";
    case EventSource::Nios: return "nios";
    case EventSource::Rx: return "rx";
  }
  return "?";
}

Word128 magic_word(EventSource s) {
  std::uint64_t half = 0;
  switch (s) {
    case EventSource::TxDma0: half = magic_half(kTagTx0); break;
    case EventSource::TxDma1: half = magic_half(kTagTx1); break;
    case EventSource::GpuTx: half = magic_half(kTagGpu); break;
    case EventSource::Nios: half = magic_half(kTagNios); break;
    case EventSource::Rx:
      throw UnknownMagic("rx events carry an address, not a magic word");
  }
  return Word128{half, half};
}

Word128 encode_cmd1(const Cmd1& cmd) {
  Word128 w;
  w.lo = (static_cast<std::uint64_t>(cmd.tag & 0x3u) << 2) |
         (static_cast<std::uint64_t>(cmd.code & 0x7FFFu) << 4) |
         (static_cast<std::uint64_t>(cmd.port_id & 0x3u) << 19) |
         (static_cast<std::uint64_t>(cmd.data) << 32);
  w.hi = cmd.entry_addr;
  return w;
}

Cmd1 decode_cmd1(const Word128& word) {
  Cmd1 cmd;
  cmd.tag = static_cast<std::uint8_t>((word.lo >> 2) & 0x3u);
  cmd.code = static_cast<std::uint16_t>((word.lo >> 4) & 0x7FFFu);
  cmd.port_id = static_cast<std::uint8_t>((word.lo >> 19) & 0x3u);
  cmd.data = static_cast<std::uint32_t>(word.lo >> 32);
  cmd.entry_addr = word.hi;
  return cmd;
}

EventWords encode_event(const CompletionEvent& ev) {
  EventWords out;
  if (ev.source == EventSource::Rx) {
    out.first = ev.rx_header;
    out.second = Word128{ev.rx_phys_addr, ev.rx_footer_lo};
  } else {
    out.first = encode_cmd1(ev.cmd1);
    out.second = magic_word(ev.source);
  }
  return out;
}

CompletionEvent decode_event(const EventWords& words) {
  const Word128& second = words.second;
  const bool magic_shaped =
      second.hi == second.lo && (second.lo & 0xFFFFFFFFull) == kMagicLow32;

  CompletionEvent ev;
  if (!magic_shaped) {
    ev.source = EventSource::Rx;
    ev.rx_header = words.first;
    ev.rx_phys_addr = second.hi;
    ev.rx_footer_lo = second.lo;
    return ev;
  }

  const std::uint32_t tag = static_cast<std::uint32_t>(second.lo >> 32);
  switch (tag) {
    case kTagTx0: ev.source = EventSource::TxDma0; break;
    case kTagTx1: ev.source = EventSource::TxDma1; break;
    case kTagGpu: ev.source = EventSource::GpuTx; break;
    case kTagNios: ev.source = EventSource::Nios; break;
    default: throw UnknownMagic(to_hex32(second));
  }
  ev.cmd1 = decode_cmd1(words.first);
  return ev;
}

}  // namespace lofamo::wire
