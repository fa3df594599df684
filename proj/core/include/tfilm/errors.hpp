#pragma once

#include <stdexcept>
#include <string>

namespace tfilm {

/// Base class for all tfilm errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A region contains no cell center (radius below grid resolution).
struct EmptyRegionError : Error {
  using Error::Error;
};

/// A cutoff ramp spans too few cells to be quadrature-meaningful.
struct RampUnresolvedError : Error {
  RampUnresolvedError(const std::string& msg, double min_radius_)
      : Error(msg), min_radius(min_radius_) {}
  double min_radius;  // smallest resolvable radius for the failing profile
};

/// A solver update produced NaN/Inf.
struct NonFiniteError : Error {
  using Error::Error;
};

/// Cumulative energy increase exceeded the divergence threshold.
struct DivergedError : Error {
  using Error::Error;
};

/// Entropy exponent outside the admissible range.
struct AlphaOutOfRangeError : Error {
  using Error::Error;
};

/// A bad-time hypothesis does not hold for the given (field, ball).
struct NotBadTimeError : Error {
  using Error::Error;
};

/// Fewer than the required number of snapshots in a time window.
struct InsufficientSnapshotsError : Error {
  using Error::Error;
};

/// Fewer than the required number of data points for a fit.
struct InsufficientPointsError : Error {
  using Error::Error;
};

/// Mobility exponent outside the admissible open interval.
struct RegimeViolationError : Error {
  using Error::Error;
};

// ---- persistence errors ---------------------------------------------------

struct IoError : Error {
  using Error::Error;
};

struct BadMagicError : IoError {
  using IoError::IoError;
};

struct VersionUnsupportedError : IoError {
  using IoError::IoError;
};

struct TruncatedPayloadError : IoError {
  TruncatedPayloadError(const std::string& msg, std::size_t expected_,
                        std::size_t actual_)
      : IoError(msg), expected(expected_), actual(actual_) {}
  std::size_t expected;
  std::size_t actual;
};

struct IoFailureError : IoError {
  using IoError::IoError;
};

// ---- configuration errors -------------------------------------------------

struct ConfigError : Error {
  using Error::Error;
};

struct UnknownKeyError : ConfigError {
  explicit UnknownKeyError(const std::string& key_)
      : ConfigError("unknown config key: " + key_), key(key_) {}
  std::string key;
};

struct ConstraintViolationError : ConfigError {
  ConstraintViolationError(const std::string& key_, const std::string& msg)
      : ConfigError("config key '" + key_ + "': " + msg), key(key_) {}
  std::string key;
};

struct SchemaMismatchError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace tfilm
