#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poemetric {

// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (dictionary lines, CSV, JSON records). `line` is
// 1-based; 0 means the position is unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A precondition on an argument was violated (empty input, out-of-range
// rating, unknown meter name, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A statistic has no defined value for the given input (e.g. Spearman on a
// constant series).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace poemetric
