#pragma once

#include <stdexcept>
#include <string>

namespace pcsemu {

// Bad input: malformed configs, traces, dimension mismatches, decisions
// outside the schedule set. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Horizon too short for the requested learning-rate schedule.
class HorizonError : public ValidationError {
 public:
  explicit HorizonError(const std::string& what) : ValidationError(what) {}
};

// I/O and other failures after validation passed. Maps to exit code 2.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pcsemu
