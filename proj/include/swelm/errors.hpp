#pragma once

#include <stdexcept>
#include <string>

namespace swelm {

// Error taxonomy mirrors the CLI exit codes: config 2, numeric 3, io 4.

struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swelm
