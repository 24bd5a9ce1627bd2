#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "tdm/error.hpp"
#include "tdm/grid.hpp"

namespace tdm {

/// Normalized 1D Gaussian taps truncated at radius ceil(3 xi).
struct GaussianKernel {
  double xi = 1.0;
  std::size_t radius = 0;
  std::vector<double> weights;  // length 2 * radius + 1, centre at index radius

  explicit GaussianKernel(double std_dev) : xi(std_dev) {
    if (!(xi > 0.0) || !std::isfinite(xi)) throw ParameterError("Gaussian xi must be positive");
    radius = static_cast<std::size_t>(std::ceil(3.0 * xi));
    weights.resize(2 * radius + 1);
    double total = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double d = static_cast<double>(k) - static_cast<double>(radius);
      weights[k] = std::exp(-d * d / (2.0 * xi * xi));
      total += weights[k];
    }
    for (auto& w : weights) w /= total;
  }
};

/// Separable convolution with replicate padding. Output shape equals input.
template <std::floating_point T>
Grid<T> gaussian_convolve(const Grid<T>& image, const GaussianKernel& kernel) {
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const auto r = static_cast<std::ptrdiff_t>(kernel.radius);

  Grid<T> rows(image.width(), image.height(), T{0}, image.step());
  for (std::ptrdiff_t j = 0; j < h; ++j) {
    for (std::ptrdiff_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) {
        const auto ii = std::clamp<std::ptrdiff_t>(i + d, 0, w - 1);
        acc += kernel.weights[static_cast<std::size_t>(d + r)] * image(ii, j);
      }
      rows(i, j) = static_cast<T>(acc);
    }
  }

  Grid<T> out(image.width(), image.height(), T{0}, image.step());
  for (std::ptrdiff_t j = 0; j < h; ++j) {
    for (std::ptrdiff_t i = 0; i < w; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -r; d <= r; ++d) {
        const auto jj = std::clamp<std::ptrdiff_t>(j + d, 0, h - 1);
        acc += kernel.weights[static_cast<std::size_t>(d + r)] * rows(i, jj);
      }
      out(i, j) = static_cast<T>(acc);
    }
  }
  return out;
}

template <std::floating_point T>
Grid<T> gaussian_convolve(const Grid<T>& image, double xi) {
  return gaussian_convolve(image, GaussianKernel(xi));
}

template <std::floating_point T>
struct Gradient {
  Grid<T> gx;
  Grid<T> gy;

  Grid<T> magnitude() const {
    Grid<T> m = gx;
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
    return m;
  }
};

/// Central differences (I(i+1) - I(i-1)) / 2h under ghost-cell replication.
template <std::floating_point T>
Gradient<T> central_gradient(const Grid<T>& image) {
  const GhostView<T> v(image);
  const T inv_2h = T{1} / (T{2} * image.step());
  Gradient<T> g{Grid<T>(image.width(), image.height(), T{0}, image.step()),
                Grid<T>(image.width(), image.height(), T{0}, image.step())};
  for (std::size_t j = 0; j < image.height(); ++j) {
    for (std::size_t i = 0; i < image.width(); ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const auto jj = static_cast<std::ptrdiff_t>(j);
      g.gx(i, j) = (v(ii + 1, jj) - v(ii - 1, jj)) * inv_2h;
      g.gy(i, j) = (v(ii, jj + 1) - v(ii, jj - 1)) * inv_2h;
    }
  }
  return g;
}

/// Gradient of G_xi * I.
template <std::floating_point T>
Gradient<T> smoothed_gradient(const Grid<T>& image, double xi) {
  return central_gradient(gaussian_convolve(image, xi));
}

/// max |I_xi| over the grid.
template <std::floating_point T>
T smoothed_max(const Grid<T>& smoothed) {
  T m{0};
  for (T v : smoothed) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace tdm
