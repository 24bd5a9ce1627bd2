#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "tdm/error.hpp"
#include "tdm/grid.hpp"
#include "tdm/smoothing.hpp"

namespace tdm {

// Edge-stopping exponent choices. p0 is the base exponent; the variable kinds
// subtract a gray-level or gradient dependent amount from it.

/// p everywhere.
struct ConstantExponent {
  double p = 2.0;
};

/// p0 minus the image-wide mean of the smoothed gray indicator with power alpha.
struct AvgGrayExponent {
  double p0 = 2.0;
  double alpha = 1.0;
};

/// p0 - 2|I|^alpha / (M^alpha + |I|^alpha) on the unsmoothed image, M = max |I|.
struct GrayExponent {
  double p0 = 2.0;
  double alpha = 1.0;
};

/// p0 - 2 / (1 + k |grad G_sigma * I|^2). sigma defaults to the smoothing scale xi.
struct GradExponent {
  double p0 = 2.0;
  double k = 1.0;
  std::optional<double> sigma;
};

using ExponentKind = std::variant<ConstantExponent, AvgGrayExponent, GrayExponent, GradExponent>;

/// Base exponent: p for the constant kind, p0 otherwise.
inline double base_exponent(const ExponentKind& kind) {
  return std::visit(
      [](const auto& e) {
        if constexpr (std::is_same_v<std::decay_t<decltype(e)>, ConstantExponent>) {
          return e.p;
        } else {
          return e.p0;
        }
      },
      kind);
}

inline std::string exponent_name(const ExponentKind& kind) {
  switch (kind.index()) {
    case 0: return "constant";
    case 1: return "avg_gray";
    case 2: return "gray";
    default: return "grad";
  }
}

struct DiffusivityConfig {
  double epsilon = 1e-4;
  double nu = 0.0;
  double K = 0.1;
  ExponentKind exponent = ConstantExponent{};
  double xi = 1.0;

  /// Throws ParameterError on the first violated constraint. `allow_zero_epsilon`
  /// admits the epsilon-free coefficient used for the constant-p model.
  void validate(bool allow_zero_epsilon = false) const {
    if (allow_zero_epsilon ? !(epsilon >= 0.0) : !(epsilon > 0.0)) {
      throw ParameterError("epsilon must be > 0");
    }
    if (!(nu >= 0.0)) throw ParameterError("nu must be >= 0");
    if (!(K > 0.0)) throw ParameterError("K must be > 0");
    if (!(xi > 0.0)) throw ParameterError("xi must be > 0");
    const double p0 = base_exponent(exponent);
    if (!(p0 > 0.0 && p0 <= 4.0)) throw ParameterError("p0 (or p) must lie in (0, 4]");
    if (const auto* e = std::get_if<AvgGrayExponent>(&exponent); e && !(e->alpha > 0.0)) {
      throw ParameterError("alpha must be > 0");
    }
    if (const auto* e = std::get_if<GrayExponent>(&exponent); e && !(e->alpha > 0.0)) {
      throw ParameterError("alpha must be > 0");
    }
    if (const auto* e = std::get_if<GradExponent>(&exponent)) {
      if (!(e->k > 0.0)) throw ParameterError("k must be > 0");
      if (e->sigma && !(*e->sigma > 0.0)) throw ParameterError("sigma must be > 0");
    }
  }
};

/// Coefficient g, exponent p and gray indicator a sampled on the grid.
struct DiffusivityField {
  ImageGrid g;
  ImageGrid p;
  ImageGrid a;
};

namespace detail {

inline constexpr double degenerate_max = 1e-12;

// 2 r^q / (1 + r^q) with r = |x| / M, clamped to [0, 1]. Written on the ratio
// so that scaling x and M together leaves the value unchanged.
inline double indicator(double x, double max_abs, double power) {
  if (max_abs < degenerate_max) return 1.0;
  const double rq = std::pow(std::abs(x) / max_abs, power);
  return std::clamp(2.0 * rq / (1.0 + rq), 0.0, 1.0);
}

inline double max_abs(const ImageGrid& grid) {
  double m = 0.0;
  for (double v : grid) m = std::max(m, std::abs(v));
  return m;
}

// Exponent field given the current iterate and its smoothed version.
inline ImageGrid exponent_from(const ImageGrid& image, const ImageGrid& smoothed, double smoothed_max_abs,
                               const DiffusivityConfig& cfg) {
  ImageGrid p(image.width(), image.height(), 0.0, image.step());
  std::visit(
      [&](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, ConstantExponent>) {
          for (auto& v : p) v = e.p;
        } else if constexpr (std::is_same_v<E, AvgGrayExponent>) {
          double sum = 0.0;
          for (double s : smoothed) sum += indicator(s, smoothed_max_abs, e.alpha);
          const double mean = std::clamp(sum / static_cast<double>(smoothed.size()), 0.0, 1.0);
          for (auto& v : p) v = e.p0 - mean;
        } else if constexpr (std::is_same_v<E, GrayExponent>) {
          const double m = max_abs(image);
          for (std::size_t k = 0; k < p.size(); ++k) p[k] = e.p0 - indicator(image[k], m, e.alpha);
        } else {
          const double sigma = e.sigma.value_or(cfg.xi);
          const auto grad = sigma == cfg.xi ? central_gradient(smoothed) : smoothed_gradient(image, sigma);
          for (std::size_t k = 0; k < p.size(); ++k) {
            const double s2 = grad.gx[k] * grad.gx[k] + grad.gy[k] * grad.gy[k];
            p[k] = e.p0 - std::clamp(2.0 / (1.0 + e.k * s2), 0.0, 2.0);
          }
        }
      },
      cfg.exponent);
  return p;
}

}  // namespace detail

/// a(I_xi) = 2|I_xi|^nu / (M_xi^nu + |I_xi|^nu). Identically 1 when M_xi is
/// below 1e-12 or when nu = 0.
inline ImageGrid gray_indicator(const ImageGrid& smoothed, double nu, double smoothed_max_abs) {
  if (!(nu >= 0.0)) throw ParameterError("nu must be >= 0");
  if (!(smoothed_max_abs >= 0.0)) throw ParameterError("M_xi must be >= 0");
  ImageGrid a(smoothed.width(), smoothed.height(), 0.0, smoothed.step());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = detail::indicator(smoothed[k], smoothed_max_abs, nu);
  return a;
}

/// Variable exponent p on the grid for the configured kind.
inline ImageGrid exponent_field(const ImageGrid& image, const DiffusivityConfig& cfg) {
  cfg.validate(true);
  const auto smoothed = gaussian_convolve(image, cfg.xi);
  return detail::exponent_from(image, smoothed, smoothed_max(smoothed), cfg);
}

namespace detail {

inline DiffusivityField diffusivity(const ImageGrid& image, const DiffusivityConfig& cfg) {
  const auto smoothed = gaussian_convolve(image, cfg.xi);
  const double m = smoothed_max(smoothed);
  DiffusivityField f{ImageGrid(image.width(), image.height(), 0.0, image.step()),
                     exponent_from(image, smoothed, m, cfg), gray_indicator(smoothed, cfg.nu, m)};
  const auto grad = central_gradient(smoothed);
  for (std::size_t k = 0; k < f.g.size(); ++k) {
    const double mag = std::sqrt(grad.gx[k] * grad.gx[k] + grad.gy[k] * grad.gy[k]);
    // std::pow(0, 0) == 1, so a flat pixel with p == 0 gets the factor 1/2.
    const double stop = 1.0 / (1.0 + std::pow(mag / cfg.K, f.p[k]));
    f.g[k] = cfg.epsilon + f.a[k] * stop;
  }
  return f;
}

}  // namespace detail

/// g = eps + a(I_xi) / (1 + (|grad I_xi| / K)^p), with I_xi = G_xi * I.
inline DiffusivityField diffusivity_field(const ImageGrid& image, const DiffusivityConfig& cfg) {
  cfg.validate();
  return detail::diffusivity(image, cfg);
}

/// Constant-exponent coefficient a(I_xi) / (1 + (|grad I_xi| / K)^p); epsilon
/// is zero here. With nu = 0 and p = 2 this is the Catte et al. coefficient.
inline DiffusivityField diffusivity_constant_p(const ImageGrid& image, double nu, double K, double p,
                                               double xi = 1.0, double epsilon = 0.0) {
  DiffusivityConfig cfg{epsilon, nu, K, ConstantExponent{p}, xi};
  cfg.validate(true);
  return detail::diffusivity(image, cfg);
}

}  // namespace tdm
