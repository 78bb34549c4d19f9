#include "confreg/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "confreg/errors.hpp"

namespace confreg {

Lattice::Lattice(std::size_t width, std::size_t height) : width_(width), height_(height) {
  if (width < 2 || height < 2) {
    throw InvalidParameterError("lattice must be at least 2x2, got " + std::to_string(width) + "x" +
                                std::to_string(height));
  }
}

ScalarField::ScalarField(Lattice lattice, double fill) : lattice_(lattice), values_(lattice.size(), fill) {}

ScalarField::ScalarField(Lattice lattice, std::vector<double> values)
    : lattice_(lattice), values_(std::move(values)) {
  if (values_.size() != lattice_.size()) {
    throw InvalidParameterError("field has " + std::to_string(values_.size()) + " values, lattice needs " +
                                std::to_string(lattice_.size()));
  }
}

ScalarField ScalarField::axpby(double a, const ScalarField& x, double b, const ScalarField& y) {
  if (!(x.lattice() == y.lattice())) throw InvalidParameterError("axpby: lattice mismatch");
  ScalarField out(x.lattice());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

double ScalarField::sum() const noexcept { return std::accumulate(values_.begin(), values_.end(), 0.0); }

FieldStack::FieldStack(Lattice lattice, std::size_t n) : lattice_(lattice), n_(n), values_(n * lattice.size()) {}

FieldStack::FieldStack(Lattice lattice, std::size_t n, std::vector<double> values)
    : lattice_(lattice), n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * lattice_.size()) {
    throw InvalidParameterError("stack payload has " + std::to_string(values_.size()) + " values, expected " +
                                std::to_string(n_ * lattice_.size()));
  }
}

Mask::Mask(Lattice lattice, bool fill) : lattice_(lattice), bits_(lattice.size(), fill ? 1 : 0) {}

Mask::Mask(Lattice lattice, std::vector<std::uint8_t> bits) : lattice_(lattice), bits_(std::move(bits)) {
  if (bits_.size() != lattice_.size()) throw InvalidParameterError("mask size does not match lattice");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

bool Mask::subset_of(const Mask& other) const {
  if (!(lattice_ == other.lattice_)) throw InvalidParameterError("mask lattice mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

Mask Mask::complement() const {
  Mask out(lattice_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] ? 0 : 1;
  return out;
}

Mask Mask::intersect(const Mask& other) const {
  if (!(lattice_ == other.lattice_)) throw InvalidParameterError("mask lattice mismatch");
  Mask out(lattice_);
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] & other.bits_[i];
  return out;
}

double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

std::size_t kernel_radius(double sigma) { return static_cast<std::size_t>(std::ceil(4.0 * sigma)); }

std::vector<double> gaussian_taps(double fwhm) {
  if (!(fwhm > 0.0) || !std::isfinite(fwhm)) {
    throw InvalidParameterError("smoothing FWHM must be positive, got " + std::to_string(fwhm));
  }
  const double sigma = fwhm_to_sigma(fwhm);
  const auto radius = static_cast<std::ptrdiff_t>(kernel_radius(sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double x = static_cast<double>(k);
    taps[static_cast<std::size_t>(k + radius)] = std::exp(-x * x / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= total;
  return taps;
}

ScalarField gaussian_smooth(const ScalarField& f, double fwhm) {
  const std::vector<double> taps = gaussian_taps(fwhm);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const Lattice& lat = f.lattice();
  const auto w = static_cast<std::ptrdiff_t>(lat.width());
  const auto h = static_cast<std::ptrdiff_t>(lat.height());

  // Separable: rows first, then columns. Out-of-range taps read zero.
  ScalarField tmp(lat);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-radius, -c);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(radius, w - 1 - c);
      for (std::ptrdiff_t k = lo; k <= hi; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] * f.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c + k));
      }
      tmp.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  }
  ScalarField out(lat);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(-radius, -r);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(radius, h - 1 - r);
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = lo; k <= hi; ++k) {
        acc += taps[static_cast<std::size_t>(k + radius)] * tmp.at(static_cast<std::size_t>(r + k), static_cast<std::size_t>(c));
      }
      out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  }
  return out;
}

}  // namespace confreg
