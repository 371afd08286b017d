#pragma once

#include <stdexcept>
#include <string>

namespace lbt {

// Precondition or argument violation (unknown state, bad dimensions, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An event or call that the session phase machine does not accept.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (logs, CSV tables, config files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lbt
