#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace confreg {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed file header or payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose content is unusable (e.g. NaN values).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient design matrix or zero contrast.
class DesignError : public Error {
 public:
  using Error::Error;
};

/// Pixels whose residual variance is zero.
class DegeneratePixelError : public Error {
 public:
  explicit DegeneratePixelError(std::vector<std::size_t> pixels);
  const std::vector<std::size_t>& pixels() const noexcept { return pixels_; }

 private:
  std::vector<std::size_t> pixels_;
};

/// The estimated combined excursion set is empty or covers the whole lattice,
/// so it has no boundary to calibrate on.
class EmptyEstimateError : public Error {
 public:
  EmptyEstimateError();
};

/// A bootstrap realization produced a zero standard deviation at a boundary
/// point.
class DegenerateBootstrapError : public Error {
 public:
  DegenerateBootstrapError(std::size_t realization, std::size_t point);
  std::size_t realization() const noexcept { return realization_; }
  std::size_t point() const noexcept { return point_; }

 private:
  std::size_t realization_;
  std::size_t point_;
};

}  // namespace confreg
