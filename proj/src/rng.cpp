#include "confreg/rng.hpp"

#include <algorithm>

namespace confreg::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, ctr[0], lo0, hi0);
    mulhilo(kMul1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

void rademacher_stream(std::uint64_t seed, std::uint64_t realization, std::span<double> out) noexcept {
  const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const auto b_lo = static_cast<std::uint32_t>(realization);
  const auto b_hi = static_cast<std::uint32_t>(realization >> 32);
  std::uint64_t block = 0;
  for (std::size_t j = 0; j < out.size(); j += 128, ++block) {
    const PhiloxCounter bits = philox4x32(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), b_lo, b_hi}, key);
    const std::size_t end = std::min<std::size_t>(out.size(), j + 128);
    for (std::size_t k = j; k < end; ++k) {
      const std::size_t bit = k - j;
      out[k] = ((bits[bit / 32] >> (bit % 32)) & 1u) ? 1.0 : -1.0;
    }
  }
}

std::vector<double> rademacher_stream(std::uint64_t seed, std::uint64_t realization, std::size_t n) {
  std::vector<double> out(n);
  rademacher_stream(seed, realization, out);
  return out;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(mix64(master) ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
}

}  // namespace confreg::rng
