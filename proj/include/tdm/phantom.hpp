#pragma once

#include <array>
#include <cmath>
#include <string>

#include "tdm/error.hpp"
#include "tdm/grid.hpp"

namespace tdm {

enum class PhantomKind { Circle, Mosaic, Ramp };

inline std::string to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Circle: return "circle";
    case PhantomKind::Mosaic: return "mosaic";
    case PhantomKind::Ramp: return "ramp";
  }
  return "?";
}

/// Synthetic test scenes on [0, 1]:
///  - Circle: background 0.2 with a centred disk of 0.8, radius 0.3 min(width, height).
///  - Mosaic: 4x4 tiling of constant blocks, levels from {0.2, 0.4, 0.6, 0.8}.
///  - Ramp: horizontal ramp from floor_intensity (column 0) to 1 (last column).
inline ImageGrid make_phantom(PhantomKind kind, std::size_t width, std::size_t height) {
  if (width < 32 || height < 32) throw ParameterError("phantom dimensions must be >= 32");
  ImageGrid img(width, height);
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);

  switch (kind) {
    case PhantomKind::Circle: {
      const double cx = (w - 1.0) / 2.0;
      const double cy = (h - 1.0) / 2.0;
      const double r = 0.3 * std::min(w, h);
      for (std::size_t j = 0; j < height; ++j) {
        for (std::size_t i = 0; i < width; ++i) {
          const double dx = static_cast<double>(i) - cx;
          const double dy = static_cast<double>(j) - cy;
          img(i, j) = dx * dx + dy * dy <= r * r ? 0.8 : 0.2;
        }
      }
      break;
    }
    case PhantomKind::Mosaic: {
      // Level index (bx + 2 by) mod 4 gives every block a different level from
      // its horizontal and vertical neighbours.
      constexpr std::array<double, 4> levels{0.2, 0.4, 0.6, 0.8};
      for (std::size_t j = 0; j < height; ++j) {
        const std::size_t by = j * 4 / height;
        for (std::size_t i = 0; i < width; ++i) {
          const std::size_t bx = i * 4 / width;
          img(i, j) = levels[(bx + 2 * by) % 4];
        }
      }
      break;
    }
    case PhantomKind::Ramp: {
      for (std::size_t j = 0; j < height; ++j) {
        for (std::size_t i = 0; i < width; ++i) {
          img(i, j) = floor_intensity + (1.0 - floor_intensity) * static_cast<double>(i) / (w - 1.0);
        }
      }
      break;
    }
  }
  return img;
}

}  // namespace tdm
