#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace agraph {

// Raised for malformed input files (triples, catalogs, snapshots, queries).
// `line()` is 1-based; 0 means the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : std::runtime_error(line == 0 ? message
                                     : "line " + std::to_string(line) + ": " +
                                           message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace agraph
