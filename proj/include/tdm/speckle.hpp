#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "tdm/error.hpp"
#include "tdm/grid.hpp"

namespace tdm {

struct SpeckleParams {
  unsigned looks = 1;
  std::uint64_t seed = 0;
};

/// Gamma variates from a fixed uniform stream.
///
/// The uniform source is std::mt19937_64, whose output sequence is pinned by
/// the C++ standard. Uniform and normal conversions are done here rather than
/// through <random> distributions, whose algorithms are implementation-defined,
/// so a seed yields the same field on every platform.
class GammaSampler {
 public:
  explicit GammaSampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1].
  double uniform() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Gamma(shape, scale) by Marsaglia-Tsang squeeze. Shapes below one use
  /// Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw ParameterError("gamma shape and scale must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return gamma(shape + 1.0, scale) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// i.i.d. Gamma(L, 1/L) field: unit mean, variance 1/L.
inline ImageGrid sample_speckle_field(const SpeckleParams& params, std::size_t width, std::size_t height) {
  if (params.looks == 0) throw ParameterError("look number L must be >= 1");
  ImageGrid field(width, height);
  GammaSampler sampler(params.seed);
  const double shape = static_cast<double>(params.looks);
  for (auto& v : field) {
    do {
      v = sampler.gamma(shape, 1.0 / shape);
    } while (!(v > 0.0));  // underflow to 0 is possible only for tiny shapes
  }
  return field;
}

/// Multiplicative degradation clean * noise, clamped below at floor_intensity.
inline ImageGrid apply_speckle(const ImageGrid& clean, const ImageGrid& noise) {
  require_same_shape(clean, noise, "apply_speckle");
  ImageGrid out = clean;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(clean[k] * noise[k], floor_intensity);
  return out;
}

}  // namespace tdm
