#pragma once

#include <stdexcept>
#include <string>

namespace somm {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed textual input (formula dumps, structure dumps, QCIR/QDIMACS).
struct FormatError : Error {
  using Error::Error;
};

// Litmus source errors carry a position. Line and column are 1-based.
struct ParseError : Error {
  int line;
  int col;
  ParseError(int line_, int col_, const std::string& msg)
      : Error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

}  // namespace somm
