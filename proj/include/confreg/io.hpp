#pragma once

#include <filesystem>
#include <vector>

#include "confreg/field.hpp"

namespace confreg::io {

// Raw stack format: a JSON header
//   {"width":W,"height":H,"n":N,"dtype":"f64","order":"row-major","endianness":"little"}
// next to a payload of N*W*H little-endian float64 values, observation-major,
// each observation row-major. The payload lives beside the header with the
// extension replaced by ".bin" (stack.json + stack.bin).

/// Payload path paired with a header path.
std::filesystem::path payload_path(const std::filesystem::path& header);

/// Throws FormatError on header/payload mismatch and ValidationError (naming
/// the observation and pixel) on non-finite values.
FieldStack load_field_stack(const std::filesystem::path& header);
void save_field_stack(const std::filesystem::path& header, const FieldStack& stack);

/// Writes `<base>.png` (0/255 grayscale) and `<base>.csv` (row,col,value).
void save_mask(const std::filesystem::path& base, const Mask& mask);
void save_mask_png(const std::filesystem::path& path, const Mask& mask);
void save_mask_csv(const std::filesystem::path& path, const Mask& mask);

/// Reads a row,col,value CSV. Lattice dimensions are taken from the largest
/// row and column present.
Mask load_mask_csv(const std::filesystem::path& path);

/// Tri-region overlay: lower-only pixels blue #1f4fff, point-estimate pixels
/// yellow #ffd700, upper pixels red #e02020, everything else black.
void save_overlay_png(const std::filesystem::path& path, const Mask& upper, const Mask& point, const Mask& lower);

/// Numeric CSV matrix; rows are lines, columns are comma separated. A
/// non-numeric first line is treated as a header and skipped.
std::vector<std::vector<double>> read_csv_matrix(const std::filesystem::path& path);

}  // namespace confreg::io
