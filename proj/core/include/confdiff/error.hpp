#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confdiff {

// Bad argument: non-finite score, |c| > 1, prior outside (0, 1), dimension
// mismatch, empty batch.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A gradient was requested for a loss that has none (zero-one).
class UnsupportedGradient : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Object used out of sequence, e.g. a backward pass fed a cache that was
// produced by a differently shaped model.
class InvalidState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Inconsistent configuration detected before any work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite risk or gradient.
class AbortedRun : public std::runtime_error {
 public:
  AbortedRun(const std::string& what, std::size_t epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace confdiff
