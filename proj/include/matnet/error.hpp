#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace matnet {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or input data. Maps to CLI exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed input file; carries the 1-based line number when known.
class IngestError : public ConfigError {
public:
  IngestError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// 1 - Rs*Rv <= 0 at the evaluated pressure.
class SingularPvtError : public Error {
public:
  using Error::Error;
};

class DegenerateBlockError : public Error {
public:
  using Error::Error;
};

/// Dense factorization failed (zero pivot, non-finite entries).
class LinearSolveError : public Error {
public:
  using Error::Error;
};

/// Newton iteration did not converge. Maps to CLI exit code 3.
class NonconvergenceError : public Error {
public:
  NonconvergenceError(const std::string& what, std::size_t step, double residual_norm,
                      std::vector<double> last_iterate);
  std::size_t step() const { return step_; }
  double residual_norm() const { return residual_norm_; }
  const std::vector<double>& last_iterate() const { return last_iterate_; }

private:
  std::size_t step_;
  double residual_norm_;
  std::vector<double> last_iterate_;
};

}  // namespace matnet
