#pragma once

#include <stdexcept>
#include <string>

namespace pptgnn {

// Malformed input schema or configuration (CLI exit code 2).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint, codec or tensor shapes that do not line up (CLI exit code 3).
class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Nothing to train on or evaluate (CLI exit code 4).
class EmptyDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pptgnn
