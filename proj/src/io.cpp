#include "confreg/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "confreg/errors.hpp"

namespace confreg::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

std::size_t positive_size(const json& header, const char* key, const fs::path& path) {
  if (!header.contains(key) || !header[key].is_number_integer() || header[key].get<long long>() <= 0) {
    throw FormatError(path.string() + ": header field '" + key + "' must be a positive integer");
  }
  return header[key].get<std::size_t>();
}

void expect_string(const json& header, const char* key, const char* value, const fs::path& path) {
  if (!header.contains(key) || !header[key].is_string() || header[key].get<std::string>() != value) {
    throw FormatError(path.string() + ": header field '" + key + "' must be \"" + value + "\"");
  }
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

// libpng reports failures through longjmp; keep the frame free of objects with
// destructors between setjmp and the write calls.
void write_png(const fs::path& path, std::size_t width, std::size_t height, int color_type,
               const std::vector<std::uint8_t>& pixels) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error("cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error("libpng initialisation failed");
  }
  const std::size_t channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::vector<png_bytep> rows(height);
  for (std::size_t r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(pixels.data() + r * width * channels);
  }
  bool failed = false;
  if (setjmp(png_jmpbuf(png))) {
    failed = true;
  } else {
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  if (failed) throw Error("failed writing PNG " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

}  // namespace

fs::path payload_path(const fs::path& header) {
  fs::path p = header;
  p.replace_extension(".bin");
  return p;
}

FieldStack load_field_stack(const fs::path& header_path) {
  std::ifstream hin(header_path);
  if (!hin) throw FormatError("cannot read stack header " + header_path.string());
  json header;
  try {
    hin >> header;
  } catch (const json::exception& e) {
    throw FormatError(header_path.string() + ": invalid JSON header: " + e.what());
  }
  if (!header.is_object()) throw FormatError(header_path.string() + ": header must be a JSON object");

  const std::size_t width = positive_size(header, "width", header_path);
  const std::size_t height = positive_size(header, "height", header_path);
  const std::size_t n = positive_size(header, "n", header_path);
  expect_string(header, "dtype", "f64", header_path);
  expect_string(header, "order", "row-major", header_path);
  expect_string(header, "endianness", "little", header_path);
  if (width < 2 || height < 2) throw FormatError(header_path.string() + ": lattice must be at least 2x2");
  if (n < 2) throw FormatError(header_path.string() + ": stack needs at least 2 observations");

  const fs::path payload = payload_path(header_path);
  std::ifstream pin(payload, std::ios::binary);
  if (!pin) throw FormatError("cannot read stack payload " + payload.string());
  const std::size_t count = n * width * height;
  const auto expected_bytes = static_cast<std::uintmax_t>(count) * sizeof(double);
  const std::uintmax_t actual_bytes = fs::file_size(payload);
  if (actual_bytes != expected_bytes) {
    throw FormatError(payload.string() + ": payload has " + std::to_string(actual_bytes) + " bytes, header implies " +
                      std::to_string(expected_bytes));
  }

  std::vector<std::uint64_t> raw(count);
  pin.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(expected_bytes));
  if (!pin) throw FormatError(payload.string() + ": short read");

  const Lattice lattice(width, height);
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<double>(to_little(raw[i]));
    if (!std::isfinite(values[i])) {
      throw ValidationError(payload.string() + ": non-finite value at observation " + std::to_string(i / lattice.size()) +
                            ", pixel index " + std::to_string(i % lattice.size()));
    }
  }
  return FieldStack(lattice, n, std::move(values));
}

void save_field_stack(const fs::path& header_path, const FieldStack& stack) {
  const json header = {{"width", stack.lattice().width()},
                       {"height", stack.lattice().height()},
                       {"n", stack.n()},
                       {"dtype", "f64"},
                       {"order", "row-major"},
                       {"endianness", "little"}};
  open_out(header_path) << header.dump() << '\n';

  std::vector<std::uint64_t> raw(stack.values().size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_little(std::bit_cast<std::uint64_t>(stack.values()[i]));
  auto out = open_out(payload_path(header_path), std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (!out) throw Error("failed writing " + payload_path(header_path).string());
}

void save_mask_png(const fs::path& path, const Mask& mask) {
  std::vector<std::uint8_t> pixels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) pixels[i] = mask[i] ? 255 : 0;
  write_png(path, mask.lattice().width(), mask.lattice().height(), PNG_COLOR_TYPE_GRAY, pixels);
}

void save_mask_csv(const fs::path& path, const Mask& mask) {
  auto out = open_out(path);
  out << "row,col,value\n";
  const Lattice& lat = mask.lattice();
  for (std::size_t r = 0; r < lat.height(); ++r) {
    for (std::size_t c = 0; c < lat.width(); ++c) out << r << ',' << c << ',' << (mask[lat.index(r, c)] ? 1 : 0) << '\n';
  }
}

void save_mask(const fs::path& base, const Mask& mask) {
  fs::path png = base;
  png += ".png";
  fs::path csv = base;
  csv += ".csv";
  save_mask_png(png, mask);
  save_mask_csv(csv, mask);
}

Mask load_mask_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read mask " + path.string());
  struct Entry {
    std::size_t row, col;
    bool value;
  };
  std::vector<Entry> entries;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_row = 0, max_col = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    double r = 0, c = 0, v = 0;
    if (cells.size() != 3 || !parse_double(cells[0], r) || !parse_double(cells[1], c) || !parse_double(cells[2], v)) {
      if (line_no == 1) continue;  // header
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected row,col,value");
    }
    if (r < 0 || c < 0 || r != std::floor(r) || c != std::floor(c) || (v != 0.0 && v != 1.0)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": invalid mask entry");
    }
    entries.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), v != 0.0});
    max_row = std::max(max_row, entries.back().row);
    max_col = std::max(max_col, entries.back().col);
  }
  if (entries.empty()) throw FormatError(path.string() + ": mask has no entries");
  const Lattice lattice(max_col + 1, max_row + 1);
  if (entries.size() != lattice.size()) {
    throw FormatError(path.string() + ": expected " + std::to_string(lattice.size()) + " entries, found " +
                      std::to_string(entries.size()));
  }
  Mask mask(lattice);
  for (const auto& e : entries) mask.set(lattice.index(e.row, e.col), e.value);
  return mask;
}

void save_overlay_png(const fs::path& path, const Mask& upper, const Mask& point, const Mask& lower) {
  if (!(upper.lattice() == point.lattice()) || !(point.lattice() == lower.lattice())) {
    throw InvalidParameterError("overlay masks must share a lattice");
  }
  std::vector<std::uint8_t> rgb(upper.size() * 3, 0);
  for (std::size_t i = 0; i < upper.size(); ++i) {
    std::uint8_t* px = &rgb[3 * i];
    if (upper[i]) {
      px[0] = 0xe0, px[1] = 0x20, px[2] = 0x20;
    } else if (point[i]) {
      px[0] = 0xff, px[1] = 0xd7, px[2] = 0x00;
    } else if (lower[i]) {
      px[0] = 0x1f, px[1] = 0x4f, px[2] = 0xff;
    }
  }
  write_png(path, upper.lattice().width(), upper.lattice().height(), PNG_COLOR_TYPE_RGB, rgb);
}

std::vector<std::vector<double>> read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& cell : split_csv_line(line)) {
      double v = 0;
      if (!parse_double(cell, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": no data rows");
  return rows;
}

}  // namespace confreg::io
