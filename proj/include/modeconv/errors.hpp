#pragma once

#include <stdexcept>
#include <string>

namespace modeconv {

// Wavelength (or other physical argument) outside the validated domain of a model.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Field evaluated at a point where the closed-form expression is singular.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative numerical procedure failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or inconsistent configuration. Carries the source location when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string source = {}, int line = 0)
      : std::runtime_error(source.empty() ? what
                                          : source + ":" + std::to_string(line) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  int line() const noexcept { return line_; }

 private:
  std::string source_;
  int line_ = 0;
};

}  // namespace modeconv
