#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tdm/error.hpp"

namespace tdm {

/// Smallest intensity allowed in PDE initial data (one 8-bit gray level on [0,1]).
inline constexpr double floor_intensity = 1.0 / 255.0;

/// Rectangular scalar field stored row-major. Index (i, j) addresses column i
/// (0 <= i < width) of row j (0 <= j < height); `step` is the spatial step h.
template <std::floating_point T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;

  Grid(std::size_t width, std::size_t height, T fill = T{0}, T step = T{1})
      : width_(width), height_(height), step_(step), data_(checked_size(width, height), fill) {}

  Grid(std::size_t width, std::size_t height, std::vector<T> data, T step = T{1})
      : width_(width), height_(height), step_(step), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) {
      throw DimensionError("grid data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T step() const noexcept { return step_; }
  void set_step(T step) { step_ = step; }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * width_ + i]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * width_ + i]; }

  T& operator[](std::size_t k) noexcept { return data_[k]; }
  const T& operator[](std::size_t k) const noexcept { return data_[k]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool same_shape(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.step_ == b.step_ && a.data_ == b.data_;
  }

 private:
  static std::size_t checked_size(std::size_t width, std::size_t height) {
    if (width == 0 || height == 0) {
      throw DimensionError("grid dimensions must be positive, got " + std::to_string(width) +
                           "x" + std::to_string(height));
    }
    return width * height;
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  T step_ = T{1};
  std::vector<T> data_;
};

using ImageGrid = Grid<double>;

/// Read-only view that extends a grid by one ghost cell on every side.
/// Out-of-range indices are clamped, which realizes the discrete Neumann
/// condition I(-1, j) = I(0, j), I(M, j) = I(M-1, j) and likewise in j.
template <std::floating_point T>
class GhostView {
 public:
  explicit GhostView(const Grid<T>& grid) noexcept : grid_(&grid) {}

  T operator()(std::ptrdiff_t i, std::ptrdiff_t j) const noexcept {
    const auto w = static_cast<std::ptrdiff_t>(grid_->width());
    const auto h = static_cast<std::ptrdiff_t>(grid_->height());
    return (*grid_)(static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, w - 1)),
                    static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, h - 1)));
  }

  const Grid<T>& grid() const noexcept { return *grid_; }

 private:
  const Grid<T>* grid_;
};

template <std::floating_point T>
GhostView(const Grid<T>&) -> GhostView<T>;

template <std::floating_point T>
std::pair<T, T> minmax(const Grid<T>& grid) {
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  return {*lo, *hi};
}

template <std::floating_point T>
bool all_finite(const Grid<T>& grid) {
  return std::all_of(grid.begin(), grid.end(), [](T v) { return std::isfinite(v); });
}

template <std::floating_point T>
void clamp_below(Grid<T>& grid, T floor) {
  for (auto& v : grid) v = std::max(v, floor);
}

template <std::floating_point T>
void require_same_shape(const Grid<T>& a, const Grid<T>& b, const char* context) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(context) + ": shape mismatch " + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                         "x" + std::to_string(b.height()));
  }
}

/// Rejects data the PDE solvers cannot start from: non-finite values or
/// values below `floor_intensity`.
inline void require_positive_initial_data(const ImageGrid& grid) {
  if (!all_finite(grid)) throw ParameterError("initial image contains non-finite values");
  if (minmax(grid).first < floor_intensity) {
    throw ParameterError("initial image has values below floor_intensity (1/255)");
  }
}

}  // namespace tdm
