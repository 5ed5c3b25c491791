#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace atreg {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidSize : public Error {
 public:
  using Error::Error;
};

/// A dense materialization or dense-only diagnostic was requested beyond the
/// configured size cap.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

/// Least-squares factor lost full column rank; carries the detected rank.
class RankDeficient : public Error {
 public:
  RankDeficient(std::size_t detected_rank, const std::string& what_arg)
      : Error(what_arg), rank_(detected_rank) {}
  std::size_t detected_rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

class Singular : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InvalidNoise : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ZeroStartVector : public Error {
 public:
  using Error::Error;
};

class BreakdownError : public Error {
 public:
  using Error::Error;
};

/// The GMRES residual increased between steps, which indicates a loss of
/// orthogonality upstream in the Arnoldi basis.
class MonotonicityViolation : public Error {
 public:
  using Error::Error;
};

class InvalidReference : public Error {
 public:
  using Error::Error;
};

}  // namespace atreg
