#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace far {

/// Failure categories raised by the library. Every throwing operation reports
/// exactly one of these through far::Error::code().
enum class ErrorCode {
  InvalidArgument,
  InvalidSupport,
  GridTooSmall,
  GridMismatch,
  NotSymmetric,
  NonPSD,
  NegativeDensity,
  TooFewObservations,
  DegenerateSample,
  BandwidthNonpositive,
  EmptyPanel,
  TooFewPeriods,
  RankDeficient,
  EmptyResiduals,
  DegenerateMetric,
  ZeroVariance,
  ThresholdOutOfSupport,
  DegenerateForecast,
  NoFeasibleK,
  TooFewResiduals,
  TooManyFailures,
  DegenerateDensity,
  UnstableGenerator,
  ParseError,
  EmptyFile,
  IoError,
  FormatError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad inputs (arguments, files, preconditions)
/// rather than by numerical breakdown during a computation.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed text input; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error(ErrorCode::ParseError,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + reason),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Corrupt or truncated binary input; offset is the byte position where
/// decoding failed.
class FormatError : public Error {
 public:
  FormatError(std::size_t offset, const std::string& reason)
      : Error(ErrorCode::FormatError, "byte offset " + std::to_string(offset) + ": " + reason),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace far
