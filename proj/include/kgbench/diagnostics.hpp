#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgbench {

// Base type for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Malformed input with a byte offset into the source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at position " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Collector for non-fatal warnings (degenerate inputs, skipped blocks,
// dangling links). Callers that do not care pass nullptr.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  bool empty() const { return warnings.empty(); }
};

inline void warn(Diagnostics* diags, std::string message) {
  if (diags != nullptr) diags->warn(std::move(message));
}

}  // namespace kgbench
