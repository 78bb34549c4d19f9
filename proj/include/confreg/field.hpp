#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace confreg {

/// Width x height pixel grid. Pixels are addressed row-major:
/// index = row * width + col.
class Lattice {
 public:
  Lattice(std::size_t width, std::size_t height);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return width_ * height_; }

  std::size_t index(std::size_t row, std::size_t col) const noexcept { return row * width_ + col; }
  std::size_t row_of(std::size_t index) const noexcept { return index / width_; }
  std::size_t col_of(std::size_t index) const noexcept { return index % width_; }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
};

/// One real value per lattice pixel.
class ScalarField {
 public:
  explicit ScalarField(Lattice lattice, double fill = 0.0);
  ScalarField(Lattice lattice, std::vector<double> values);

  const Lattice& lattice() const noexcept { return lattice_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double at(std::size_t row, std::size_t col) const noexcept { return values_[lattice_.index(row, col)]; }
  double& at(std::size_t row, std::size_t col) noexcept { return values_[lattice_.index(row, col)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Pixel-wise a*x + b*y over two fields on the same lattice.
  static ScalarField axpby(double a, const ScalarField& x, double b, const ScalarField& y);

  double sum() const noexcept;

 private:
  Lattice lattice_;
  std::vector<double> values_;
};

/// n observations of a field on a shared lattice, stored observation-major:
/// value(l, s) lives at l * lattice.size() + s.
class FieldStack {
 public:
  FieldStack(Lattice lattice, std::size_t n);
  FieldStack(Lattice lattice, std::size_t n, std::vector<double> values);

  const Lattice& lattice() const noexcept { return lattice_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t pixels() const noexcept { return lattice_.size(); }

  double operator()(std::size_t obs, std::size_t pixel) const noexcept { return values_[obs * pixels() + pixel]; }
  double& operator()(std::size_t obs, std::size_t pixel) noexcept { return values_[obs * pixels() + pixel]; }

  std::span<const double> observation(std::size_t obs) const noexcept {
    return std::span<const double>(values_).subspan(obs * pixels(), pixels());
  }
  std::span<double> observation(std::size_t obs) noexcept {
    return std::span<double>(values_).subspan(obs * pixels(), pixels());
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

 private:
  Lattice lattice_;
  std::size_t n_;
  std::vector<double> values_;
};

/// Binary pixel set on a lattice.
class Mask {
 public:
  explicit Mask(Lattice lattice, bool fill = false);
  Mask(Lattice lattice, std::vector<std::uint8_t> bits);

  const Lattice& lattice() const noexcept { return lattice_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }

  std::size_t count() const noexcept;
  bool subset_of(const Mask& other) const;

  Mask complement() const;
  Mask intersect(const Mask& other) const;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Lattice lattice_;
  std::vector<std::uint8_t> bits_;
};

/// Kernel standard deviation for a Gaussian of the given full width at half
/// maximum.
double fwhm_to_sigma(double fwhm);

/// Half-width of the truncated smoothing kernel, ceil(4 sigma).
std::size_t kernel_radius(double sigma);

/// Normalized 1-D Gaussian taps on [-radius, radius]. The 2-D smoothing kernel
/// is the outer product of these taps with themselves.
std::vector<double> gaussian_taps(double fwhm);

/// Isotropic Gaussian smoothing with zero padding outside the lattice.
/// Throws InvalidParameterError for fwhm <= 0.
ScalarField gaussian_smooth(const ScalarField& f, double fwhm);

}  // namespace confreg
