#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcfill {

// Error taxonomy mirrored by the CLI exit codes: invalid inputs or
// arguments exit 2, malformed binary files exit 3, broken internal
// invariants exit 4.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (byte " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pcfill
