#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or missing input (cluster files, score files, JSON documents).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input that parsed but violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// An out-of-range or inconsistent configuration value.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error("config field '" + field + "': " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Power iteration did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(std::vector<double> last_iterate, double residual, int iterations)
      : Error("stationary distribution did not converge after " + std::to_string(iterations) +
              " iterations (L1 residual " + std::to_string(residual) + ")"),
        last_iterate_(std::move(last_iterate)),
        residual_(residual),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
  int iterations_;
};

/// Wraps an error raised inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace qsum
