#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument or configuration value outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Two grids that must share a shape do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed image file. Carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Time step larger than the Courant-Friedrichs-Lewy bound.
class CflError : public Error {
 public:
  CflError(double tau, double admissible_tau)
      : Error("time step " + std::to_string(tau) + " violates the CFL bound; admissible tau <= " +
              std::to_string(admissible_tau)),
        tau_(tau),
        admissible_tau_(admissible_tau) {}

  double tau() const noexcept { return tau_; }
  double admissible_tau() const noexcept { return admissible_tau_; }

 private:
  double tau_;
  double admissible_tau_;
};

/// Gauss-Seidel did not reach its residual tolerance within the sweep cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(double residual, int sweeps)
      : Error("Gauss-Seidel did not converge after " + std::to_string(sweeps) +
              " sweeps (residual " + std::to_string(residual) + ")"),
        residual_(residual),
        sweeps_(sweeps) {}

  double residual() const noexcept { return residual_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  double residual_;
  int sweeps_;
};

/// Unknown key or unparsable value in a key=value configuration.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace tdm
