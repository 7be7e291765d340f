#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lofamo {

// Base class for everything this library throws on contract violations.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// ---- codec errors -----------------------------------------------------

// A 2-bit status field held the reserved pattern 11.
class InvalidStatusPattern : public Error {
public:
  InvalidStatusPattern() : Error("invalid 2-bit status pattern 11") {}
};

// Completion event second word looked like a magic word but matched no
// known producer tag.
class UnknownMagic : public Error {
public:
  explicit UnknownMagic(const std::string& detail)
      : Error("unknown completion magic: " + detail) {}
};

// ---- frame errors ------------------------------------------------------

class FrameError : public Error {
public:
  using Error::Error;
};

class BadLength : public FrameError {
public:
  explicit BadLength(const std::string& detail)
      : FrameError("bad frame length: " + detail) {}
};

class BadFraming : public FrameError {
public:
  explicit BadFraming(const std::string& detail)
      : FrameError("bad framing: " + detail) {}
};

class CrcMismatch : public FrameError {
public:
  CrcMismatch(std::uint32_t expected, std::uint32_t actual)
      : FrameError("crc mismatch"), expected_crc(expected), actual_crc(actual) {}
  std::uint32_t expected_crc;
  std::uint32_t actual_crc;
};

// ---- link model errors --------------------------------------------------

// T_RED smaller than one max-size packet: the router-limited regime is
// undefined (n would be zero).
class ThresholdTooSmall : public Error {
public:
  explicit ThresholdTooSmall(const std::string& detail)
      : Error("t_red too small: " + detail) {}
};

// A swept FIFO depth cannot host one max packet plus the fixed margin.
class DepthTooSmall : public Error {
public:
  explicit DepthTooSmall(const std::string& detail)
      : Error("fifo depth too small: " + detail) {}
};

// Effective-frequency computation with no memory footprint.
class ZeroMemory : public Error {
public:
  ZeroMemory() : Error("used memory must be > 0") {}
};

// ---- watchdog / sim errors ----------------------------------------------

// An RFD slot or LDM delivery carried a message without the valid bit.
class InvalidLdm : public Error {
public:
  InvalidLdm() : Error("diagnostic message lacks valid bit") {}
};

class BadDims : public Error {
public:
  explicit BadDims(const std::string& detail) : Error("bad torus dims: " + detail) {}
};

class UnknownTarget : public Error {
public:
  explicit UnknownTarget(const std::string& detail)
      : Error("unknown fault target: " + detail) {}
};

class RingFull : public Error {
public:
  RingFull() : Error("command ring full") {}
};

// ---- scenario file errors -------------------------------------------------

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& detail)
      : Error("parse error at line " + std::to_string(line) + ": " + detail),
        line_no(line) {}
  std::size_t line_no;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& invariant)
      : Error("scenario violates invariant: " + invariant) {}
};

}  // namespace lofamo
