#include "confreg/errors.hpp"

#include <algorithm>
#include <sstream>

namespace confreg {

namespace {

std::string describe_pixels(const std::vector<std::size_t>& pixels) {
  std::ostringstream os;
  os << "zero residual variance at " << pixels.size() << " pixel(s):";
  const std::size_t shown = std::min<std::size_t>(pixels.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) os << ' ' << pixels[i];
  if (shown < pixels.size()) os << " ...";
  return os.str();
}

}  // namespace

DegeneratePixelError::DegeneratePixelError(std::vector<std::size_t> pixels)
    : Error(describe_pixels(pixels)), pixels_(std::move(pixels)) {}

EmptyEstimateError::EmptyEstimateError()
    : Error(
          "estimated combined excursion set is empty or fills the whole lattice; "
          "it has no boundary, so confidence regions are undefined") {}

DegenerateBootstrapError::DegenerateBootstrapError(std::size_t realization, std::size_t point)
    : Error("bootstrap sample has zero standard deviation (realization " + std::to_string(realization) +
            ", boundary point " + std::to_string(point) + ")"),
      realization_(realization),
      point_(point) {}

}  // namespace confreg
