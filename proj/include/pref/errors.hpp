#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pref {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A FrequencyLayout violates its invariants.
class LayoutError : public Error {
 public:
  using Error::Error;
};

// Array shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside the operation's domain (negative sigma, bad order).
class DomainError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered, or training diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. a stale activation tape.
class UsageError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed checkpoint or asset file. Carries the byte offset of the problem.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace pref
