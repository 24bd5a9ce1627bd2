#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tdm/error.hpp"
#include "tdm/grid.hpp"
#include "tdm/smoothing.hpp"

namespace tdm {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

inline double mean_squared_error(const ImageGrid& a, const ImageGrid& b) {
  require_same_shape(a, b, "mean_squared_error");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// 10 log10(max(reference)^2 / MSE). Identical images give +inf.
inline double psnr(const ImageGrid& reference, const ImageGrid& test) {
  const double mse = mean_squared_error(reference, test);
  if (mse == 0.0) return infinity;
  const double peak = minmax(reference).second;
  return 10.0 * std::log10(peak * peak / mse);
}

/// Mean SSIM over every full 11x11 window (Gaussian weights, sigma 1.5,
/// K1 = 0.01, K2 = 0.03). The dynamic range defaults to max(reference).
inline double mssim(const ImageGrid& reference, const ImageGrid& test,
                    std::optional<double> dynamic_range = std::nullopt) {
  constexpr std::size_t win = 11;
  constexpr double sigma = 1.5;
  require_same_shape(reference, test, "mssim");
  if (reference.width() < win || reference.height() < win) {
    throw DimensionError("mssim needs images of at least 11x11 pixels");
  }
  const double range = dynamic_range.value_or(minmax(reference).second);
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  // The 2D window is the outer product of this 1D profile.
  std::vector<double> w1(win);
  double total = 0.0;
  for (std::size_t k = 0; k < win; ++k) {
    const double d = static_cast<double>(k) - 5.0;
    w1[k] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += w1[k];
  }
  for (auto& w : w1) w /= total;

  // Valid-mode separable filtering of x, y, x^2, y^2 and xy.
  const std::size_t ow = reference.width() - win + 1;
  const std::size_t oh = reference.height() - win + 1;
  auto filter = [&](auto&& value) {
    std::vector<double> rows(ow * reference.height());
    for (std::size_t j = 0; j < reference.height(); ++j) {
      for (std::size_t i = 0; i < ow; ++i) {
        double acc = 0.0;
        for (std::size_t d = 0; d < win; ++d) acc += w1[d] * value(i + d, j);
        rows[j * ow + i] = acc;
      }
    }
    std::vector<double> out(ow * oh);
    for (std::size_t j = 0; j < oh; ++j) {
      for (std::size_t i = 0; i < ow; ++i) {
        double acc = 0.0;
        for (std::size_t d = 0; d < win; ++d) acc += w1[d] * rows[(j + d) * ow + i];
        out[j * ow + i] = acc;
      }
    }
    return out;
  };
  const auto mx = filter([&](std::size_t i, std::size_t j) { return reference(i, j); });
  const auto my = filter([&](std::size_t i, std::size_t j) { return test(i, j); });
  const auto mxx = filter([&](std::size_t i, std::size_t j) { return reference(i, j) * reference(i, j); });
  const auto myy = filter([&](std::size_t i, std::size_t j) { return test(i, j) * test(i, j); });
  const auto mxy = filter([&](std::size_t i, std::size_t j) { return reference(i, j) * test(i, j); });

  double sum = 0.0;
  for (std::size_t k = 0; k < mx.size(); ++k) {
    const double vx = mxx[k] - mx[k] * mx[k];
    const double vy = myy[k] - my[k] * my[k];
    const double cxy = mxy[k] - mx[k] * my[k];
    sum += ((2.0 * mx[k] * my[k] + c1) * (2.0 * cxy + c2)) /
           ((mx[k] * mx[k] + my[k] * my[k] + c1) * (vx + vy + c2));
  }
  return sum / static_cast<double>(mx.size());
}

/// Pointwise noisy / restored, with restored clamped below at floor_intensity.
struct RatioImage {
  ImageGrid grid;
};

inline RatioImage ratio_image(const ImageGrid& noisy, const ImageGrid& restored) {
  require_same_shape(noisy, restored, "ratio_image");
  ImageGrid r = noisy;
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = noisy[k] / std::max(restored[k], floor_intensity);
  return {std::move(r)};
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Sample mean and population variance (two-pass).
inline MeanVariance mean_variance(std::span<const double> values) {
  if (values.empty()) throw DimensionError("mean_variance of an empty set");
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return {values.front(), 0.0};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(values.size())};
}

/// Mean of ratio (MoR) and variance of ratio (VoR).
inline MeanVariance mor_vor(const RatioImage& ratio) { return mean_variance(ratio.grid.values()); }

/// 10 log10(MSE(clean, noisy) / MSE(clean, restored)); +inf when restored == clean.
inline double despeckling_gain(const ImageGrid& clean, const ImageGrid& noisy, const ImageGrid& restored) {
  const double before = mean_squared_error(clean, noisy);
  const double after = mean_squared_error(clean, restored);
  if (after == 0.0) return infinity;
  return 10.0 * std::log10(before / after);
}

/// Equivalent number of looks mean^2 / variance; +inf for a constant region.
inline double enl(std::span<const double> region) {
  if (region.size() < 2) throw DimensionError("ENL needs more than one pixel");
  const auto [mean, var] = mean_variance(region);
  if (var == 0.0) return infinity;
  return mean * mean / var;
}

inline double enl(const ImageGrid& region) { return enl(region.values()); }

/// ENL on the values left after discarding floor(trim * n) samples from each tail.
inline double enl_trimmed(std::span<const double> region, double trim = 0.05) {
  if (!(trim >= 0.0 && trim < 0.5)) throw ParameterError("trim fraction must lie in [0, 0.5)");
  std::vector<double> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  const auto cut = static_cast<std::size_t>(std::floor(trim * static_cast<double>(sorted.size())));
  return enl(std::span<const double>(sorted).subspan(cut, sorted.size() - 2 * cut));
}

inline double enl_trimmed(const ImageGrid& region, double trim = 0.05) { return enl_trimmed(region.values(), trim); }

struct SpeckleIndexResult {
  double value = 0.0;
  std::size_t flagged = 0;  // pixels whose local mean fell below floor_intensity
};

/// Mean over pixels of local std / local mean in a window x window
/// neighbourhood with replicate padding.
inline SpeckleIndexResult speckle_index(const ImageGrid& image, std::size_t window = 3) {
  if (window < 3 || window % 2 == 0) throw ParameterError("speckle index window must be odd and >= 3");
  const auto r = static_cast<std::ptrdiff_t>(window / 2);
  const auto w = static_cast<std::ptrdiff_t>(image.width());
  const auto h = static_cast<std::ptrdiff_t>(image.height());
  const double n = static_cast<double>(window * window);
  SpeckleIndexResult out;
  std::vector<double> window_values(window * window);
  double sum = 0.0;
  for (std::size_t j = 0; j < image.height(); ++j) {
    for (std::size_t i = 0; i < image.width(); ++i) {
      std::size_t count = 0;
      double s = 0.0;
      for (std::ptrdiff_t dj = -r; dj <= r; ++dj) {
        for (std::ptrdiff_t di = -r; di <= r; ++di) {
          const auto ii = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + di, 0, w - 1);
          const auto jj = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(j) + dj, 0, h - 1);
          const double x = image(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
          window_values[count++] = x;
          s += x;
        }
      }
      const double mean = s / n;
      if (mean < floor_intensity) {
        ++out.flagged;
        continue;
      }
      double ss = 0.0;
      for (std::size_t k = 0; k < count; ++k) ss += (window_values[k] - mean) * (window_values[k] - mean);
      const double var = ss / n;
      sum += std::sqrt(var) / mean;
    }
  }
  out.value = sum / static_cast<double>(image.size());
  return out;
}

/// Binary edge map, row-major, same layout as ImageGrid.
struct EdgeMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> edges;

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(edges.begin(), edges.end(), std::uint8_t{1}));
  }
};

/// Otsu threshold of a set of nonnegative values over a 256-bin histogram on
/// [0, max]. Returns the upper edge of the lower class.
inline double otsu_threshold(std::span<const double> values) {
  constexpr int bins = 256;
  double hi = 0.0;
  for (double v : values) hi = std::max(hi, v);
  if (hi <= 0.0) return 0.0;
  std::vector<double> hist(bins, 0.0);
  for (double v : values) hist[std::min(bins - 1, static_cast<int>(v / hi * bins))] += 1.0;
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int b = 0; b < bins; ++b) sum_all += b * hist[b];
  double w0 = 0.0;
  double sum0 = 0.0;
  double best = -1.0;
  int best_bin = 0;
  for (int b = 0; b < bins; ++b) {
    w0 += hist[b];
    sum0 += b * hist[b];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  return (best_bin + 1) * hi / bins;
}

/// Sobel gradient magnitude thresholded at its Otsu level.
inline EdgeMap detect_edges(const ImageGrid& image) {
  const GhostView<double> v(image);
  ImageGrid mag(image.width(), image.height());
  for (std::size_t j = 0; j < image.height(); ++j) {
    for (std::size_t i = 0; i < image.width(); ++i) {
      const auto x = static_cast<std::ptrdiff_t>(i);
      const auto y = static_cast<std::ptrdiff_t>(j);
      const double gx = (v(x + 1, y - 1) + 2 * v(x + 1, y) + v(x + 1, y + 1)) -
                        (v(x - 1, y - 1) + 2 * v(x - 1, y) + v(x - 1, y + 1));
      const double gy = (v(x - 1, y + 1) + 2 * v(x, y + 1) + v(x + 1, y + 1)) -
                        (v(x - 1, y - 1) + 2 * v(x, y - 1) + v(x + 1, y - 1));
      mag(i, j) = std::hypot(gx, gy);
    }
  }
  const double t = otsu_threshold(mag.values());
  EdgeMap out{image.width(), image.height(), std::vector<std::uint8_t>(image.size(), 0)};
  if (t <= 0.0) return out;
  for (std::size_t k = 0; k < mag.size(); ++k) out.edges[k] = mag[k] >= t ? 1 : 0;
  return out;
}

/// Pratt's figure of merit with scaling a = 1/9:
/// (1 / max(N_ref, N_test)) * sum over test edges of 1 / (1 + a d^2),
/// d the Euclidean distance to the nearest reference edge.
inline double figure_of_merit(const EdgeMap& reference, const EdgeMap& test, double scaling = 1.0 / 9.0) {
  if (reference.width != test.width || reference.height != test.height) {
    throw DimensionError("figure_of_merit: edge map shapes differ");
  }
  std::vector<std::pair<double, double>> ref_points;
  for (std::size_t k = 0; k < reference.edges.size(); ++k) {
    if (reference.edges[k]) {
      ref_points.emplace_back(static_cast<double>(k % reference.width), static_cast<double>(k / reference.width));
    }
  }
  const std::size_t n_test = test.count();
  if (ref_points.empty() || n_test == 0) throw ParameterError("figure_of_merit: empty edge set");

  double sum = 0.0;
  for (std::size_t k = 0; k < test.edges.size(); ++k) {
    if (!test.edges[k]) continue;
    const double x = static_cast<double>(k % test.width);
    const double y = static_cast<double>(k / test.width);
    double d2 = infinity;
    for (const auto& [rx, ry] : ref_points) d2 = std::min(d2, (x - rx) * (x - rx) + (y - ry) * (y - ry));
    sum += 1.0 / (1.0 + scaling * d2);
  }
  return sum / static_cast<double>(std::max(ref_points.size(), n_test));
}

/// All quality measures for one clean / noisy / restored triple. NaN marks a
/// value that could not be computed (e.g. FOM without edges, unknown L).
struct MetricsReport {
  double psnr = 0.0;
  double mssim = 0.0;
  double mor = 0.0;
  double vor = 0.0;
  double vor_normalized = std::numeric_limits<double>::quiet_NaN();  // VoR * L
  double dg = 0.0;
  double enl = 0.0;
  double enl_star = 0.0;
  double si = 0.0;
  std::size_t si_flagged = 0;
  double fom = std::numeric_limits<double>::quiet_NaN();
};

inline MetricsReport evaluate(const ImageGrid& clean, const ImageGrid& noisy, const ImageGrid& restored,
                              std::optional<unsigned> looks = std::nullopt, std::size_t si_window = 3) {
  require_same_shape(clean, noisy, "evaluate");
  require_same_shape(clean, restored, "evaluate");
  MetricsReport r;
  r.psnr = psnr(clean, restored);
  r.mssim = mssim(clean, restored);
  const auto mv = mor_vor(ratio_image(noisy, restored));
  r.mor = mv.mean;
  r.vor = mv.variance;
  if (looks) r.vor_normalized = mv.variance * static_cast<double>(*looks);
  r.dg = despeckling_gain(clean, noisy, restored);
  r.enl = enl(restored);
  r.enl_star = enl_trimmed(restored);
  const auto si = speckle_index(restored, si_window);
  r.si = si.value;
  r.si_flagged = si.flagged;
  const auto ref_edges = detect_edges(clean);
  const auto test_edges = detect_edges(restored);
  if (ref_edges.count() > 0 && test_edges.count() > 0) r.fom = figure_of_merit(ref_edges, test_edges);
  return r;
}

}  // namespace tdm
