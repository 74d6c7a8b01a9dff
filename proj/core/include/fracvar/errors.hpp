#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fracvar {

// Numeric domain violation: orders outside (0,1), gamma outside [0,1],
// non-positive Gamma argument, log of a negative number, zero direction.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A caller broke an operation's precondition (wrong dimensions, wrong
// problem shape, mismatched grids).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Syntax error in an expression. offset() is the byte offset into the text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace fracvar
