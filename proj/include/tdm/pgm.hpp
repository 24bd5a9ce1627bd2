#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include "tdm/error.hpp"
#include "tdm/grid.hpp"

namespace tdm {

namespace detail {

// Cursor over a PGM byte buffer. Header tokens are separated by whitespace;
// '#' starts a comment that runs to the end of the line.
class PgmReader {
 public:
  explicit PgmReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           bytes_[pos_] != '#') {
      ++pos_;
    }
    return bytes_.substr(start, pos_ - start);
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    const auto tok = token();
    if (tok.empty()) throw ParseError(std::string("expected ") + what + ", found end of data", start);
    std::uint64_t value = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", start);
      value = value * 10 + static_cast<std::uint64_t>(c - '0');
      if (value > 0xFFFFFFFFull) throw ParseError(std::string(what) + " out of range", start);
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from a binary raster.
  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw ParseError("expected whitespace before raster data", pos_);
    }
    ++pos_;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  unsigned char byte() { return static_cast<unsigned char>(bytes_[pos_++]); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Decodes a P2 or P5 graymap held in memory. Intensities are divided by
/// maxval and clamped below at `floor_intensity`; the spatial step is 1.
inline ImageGrid parse_pgm(std::string_view bytes) {
  detail::PgmReader in(bytes);
  const auto magic = in.token();
  if (magic != "P5" && magic != "P2") throw ParseError("not a PGM file (magic must be P2 or P5)", 0);
  const bool binary = magic == "P5";

  const std::size_t dims_at = (in.skip_space_and_comments(), in.offset());
  const auto width = in.number("width");
  const auto height = in.number("height");
  if (width == 0 || height == 0) throw ParseError("degenerate image dimensions", dims_at);

  const std::size_t maxval_at = (in.skip_space_and_comments(), in.offset());
  const auto maxval = in.number("maxval");
  if (maxval != 255 && maxval != 65535) {
    throw ParseError("unsupported maxval " + std::to_string(maxval) + " (expected 255 or 65535)", maxval_at);
  }

  const std::size_t count = width * height;
  std::vector<double> data(count);
  const double scale = static_cast<double>(maxval);

  if (binary) {
    in.single_whitespace();
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    if (in.remaining() < count * bytes_per_sample) {
      throw ParseError("truncated raster: need " + std::to_string(count * bytes_per_sample) +
                           " bytes, have " + std::to_string(in.remaining()),
                       in.offset());
    }
    for (auto& v : data) {
      std::uint32_t sample = in.byte();
      if (bytes_per_sample == 2) sample = (sample << 8) | in.byte();
      v = static_cast<double>(sample) / scale;
    }
  } else {
    for (auto& v : data) {
      const std::size_t at = (in.skip_space_and_comments(), in.offset());
      if (in.remaining() == 0) throw ParseError("truncated raster", at);
      const auto sample = in.number("sample");
      if (sample > maxval) throw ParseError("sample exceeds maxval", at);
      v = static_cast<double>(sample) / scale;
    }
  }

  ImageGrid grid(width, height, std::move(data));
  clamp_below(grid, floor_intensity);
  return grid;
}

inline ImageGrid load_pgm(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path.string() + "' for reading");
  const std::string bytes{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
  try {
    return parse_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

/// Quantizes a [0,1] intensity to 8 bits: clamp, scale by 255, round half up.
inline std::uint8_t quantize_8bit(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

/// Encodes a grid as binary P5 with maxval 255.
inline std::string encode_pgm(const ImageGrid& grid) {
  std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
  out.reserve(out.size() + grid.size());
  for (double v : grid) out.push_back(static_cast<char>(quantize_8bit(v)));
  return out;
}

inline void save_pgm(const ImageGrid& grid, const std::filesystem::path& path) {
  if (!all_finite(grid)) throw ParameterError("cannot save '" + path.string() + "': non-finite values");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot open '" + path.string() + "' for writing");
  const auto bytes = encode_pgm(grid);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace tdm
