#pragma once

#include <stdexcept>
#include <string>

namespace bpre {

// Failure classes double as CLI exit codes.
enum class ErrorKind : int {
  ConfigParse = 2,
  Simulation = 3,
  Statistics = 4,
  Io = 5,
  ConfigValidation = 6,
  InvalidArgument = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class SimulationError : public Error {
 public:
  explicit SimulationError(const std::string& what) : Error(ErrorKind::Simulation, what) {}
};

class StatisticsError : public Error {
 public:
  explicit StatisticsError(const std::string& what) : Error(ErrorKind::Statistics, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

}  // namespace bpre
