#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aqnn {

// File could not be opened, read, or written.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed text input; line numbers are 1-based.
struct parse_error : std::runtime_error {
  parse_error(const std::string& what, std::size_t line_no)
      : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

// Not a model file we understand.
struct format_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model file written by a newer format revision than this build supports.
struct version_error : format_error {
  using format_error::format_error;
};

// Model file bytes fail integrity checks (bad checksum, truncation).
struct corruption_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aqnn
