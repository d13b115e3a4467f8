#pragma once

#include <stdexcept>
#include <string>

namespace srfm {

// Exit-code contract of the CLI: 0 ok, 2 config, 3 non-convergence, 4 I/O.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double last_iterate_, double residual_, int iterations_)
      : std::runtime_error(what), last_iterate(last_iterate_), residual(residual_), iterations(iterations_) {}
  double last_iterate;
  double residual;
  int iterations;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, long line_) : std::runtime_error(what), line(line_) {}
  long line;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srfm
