#pragma once

#include <stdexcept>

namespace cimax {

// File could not be opened, read, written, or parsed at the byte level.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration file or flag value is unusable; the message carries the
// key and, for files, the line number.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cimax
