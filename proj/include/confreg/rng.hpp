#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace confreg::rng {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key).
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key) noexcept;

/// n Rademacher signs for one bootstrap realization. Realization b of seed S
/// reads Philox blocks with key S and counter (block, b); bit j of the stream
/// maps 1 -> +1 and 0 -> -1.
void rademacher_stream(std::uint64_t seed, std::uint64_t realization, std::span<double> out) noexcept;
std::vector<double> rademacher_stream(std::uint64_t seed, std::uint64_t realization, std::size_t n);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Independent-looking child seed for substream `index` of `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace confreg::rng
