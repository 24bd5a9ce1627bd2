#pragma once

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "tdm/diffusivity.hpp"
#include "tdm/error.hpp"
#include "tdm/grid.hpp"
#include "tdm/metrics.hpp"

namespace tdm {

/// I_t = div(g grad I).
struct DiffusionModel {};

/// I_tt + gamma I_t = div(g grad I).
struct TelegraphModel {
  double gamma = 2.0;
};

using Model = std::variant<DiffusionModel, TelegraphModel>;

/// Stop at the first step with ||I^{k+1} - I^k||^2 / ||I^k||^2 <= eps.
struct RelChangeStop {
  double eps = 1e-4;
};

/// Keep the iterate with the highest PSNR against `reference`; stop after
/// `patience` consecutive steps without improvement.
struct BestPsnrStop {
  ImageGrid reference;
  int patience = 10;
};

using StopRule = std::variant<RelChangeStop, BestPsnrStop>;

struct SolverConfig {
  Model model = DiffusionModel{};
  double tau = 0.25;
  double theta1 = 0.0;  // weight of the implicit flux at level n+1
  double theta2 = 0.0;  // weight of the lagged flux at level n-1
  double gs_tol = 1e-6;
  int gs_max_sweeps = 100;
  StopRule stop = RelChangeStop{};
  int max_steps = 500;
  bool cfl_enforce = true;

  void validate() const {
    if (!(tau > 0.0)) throw ParameterError("tau must be > 0");
    if (!(theta1 >= 0.0) || !(theta2 >= 0.0) || theta1 + theta2 > 1.0) {
      throw ParameterError("theta1, theta2 must be >= 0 with theta1 + theta2 <= 1");
    }
    if (const auto* t = std::get_if<TelegraphModel>(&model); t && !(t->gamma > 0.0)) {
      throw ParameterError("gamma must be > 0");
    }
    if (!(gs_tol > 0.0)) throw ParameterError("gs_tol must be > 0");
    if (gs_max_sweeps < 1) throw ParameterError("gs_max_sweeps must be >= 1");
    if (max_steps < 1) throw ParameterError("max_steps must be >= 1");
    if (const auto* r = std::get_if<RelChangeStop>(&stop); r && !(r->eps > 0.0)) {
      throw ParameterError("eps_stop must be > 0");
    }
    if (const auto* b = std::get_if<BestPsnrStop>(&stop); b && b->patience < 1) {
      throw ParameterError("patience must be >= 1");
    }
  }
};

struct StepRecord {
  int step = 0;
  double rel_change = 0.0;
  double psnr = std::numeric_limits<double>::quiet_NaN();
  int gs_sweeps = 0;
  double max_g = 0.0;
};

/// Two consecutive time levels plus the per-step log.
struct SolverState {
  ImageGrid prev;  // level n-1
  ImageGrid curr;  // level n
  int step = 0;
  std::vector<StepRecord> history;

  /// Both levels start at I0, i.e. I^1 = I^0 (zero initial velocity).
  static SolverState initial(const ImageGrid& image) { return {image, image, 0, {}}; }
};

/// Arithmetic-mean flux stencil for div(g grad I):
///   0.5/h^2 [ (g_ij + g_i+1j) I_i+1j + (g_ij + g_i-1j) I_i-1j - (g_i+1j + 2 g_ij + g_i-1j) I_ij ]
/// + the same expression in j, with ghost-cell replication for both I and g.
template <std::floating_point T>
Grid<T> flux_divergence(const Grid<T>& image, const Grid<T>& g) {
  require_same_shape(image, g, "flux_divergence");
  const GhostView<T> I(image);
  const GhostView<T> G(g);
  const T scale = T{0.5} / (image.step() * image.step());
  Grid<T> out(image.width(), image.height(), T{0}, image.step());
  for (std::size_t j = 0; j < image.height(); ++j) {
    for (std::size_t i = 0; i < image.width(); ++i) {
      const auto x = static_cast<std::ptrdiff_t>(i);
      const auto y = static_cast<std::ptrdiff_t>(j);
      const T c = G(x, y);
      const T e = G(x + 1, y), w = G(x - 1, y), n = G(x, y + 1), s = G(x, y - 1);
      const T v = I(x, y);
      const T dx = (c + e) * I(x + 1, y) + (c + w) * I(x - 1, y) - (e + 2 * c + w) * v;
      const T dy = (c + n) * I(x, y + 1) + (c + s) * I(x, y - 1) - (n + 2 * c + s) * v;
      out(i, j) = scale * (dx + dy);
    }
  }
  return out;
}

/// Largest stable time step h / sqrt(max g).
inline double cfl_max_tau(double g_max, double h) {
  if (!(g_max > 0.0)) throw ParameterError("cfl_max_tau needs max g > 0");
  if (!(h > 0.0)) throw ParameterError("cfl_max_tau needs h > 0");
  return h / std::sqrt(g_max);
}

/// Result of one weighted-theta telegraph update.
struct TelegraphUpdate {
  ImageGrid next;
  int sweeps = 0;
  double residual = 0.0;
};

/// Max-norm defect of
///   (1 + gamma tau / 2) I^{n+1} - tau^2 theta1 F(I^{n+1}) - rhs
/// where F = flux_divergence(., g).
inline double telegraph_residual(const ImageGrid& next, const ImageGrid& rhs, const ImageGrid& g, double gamma,
                                 double tau, double theta1) {
  const auto flux = flux_divergence(next, g);
  const double diag = 1.0 + 0.5 * gamma * tau;
  double worst = 0.0;
  for (std::size_t k = 0; k < next.size(); ++k) {
    worst = std::max(worst, std::abs(diag * next[k] - tau * tau * theta1 * flux[k] - rhs[k]));
  }
  return worst;
}

/// Right-hand side of the weighted-theta scheme:
///   2 I^n + tau^2 (1 - theta1 - theta2) F(I^n) + tau^2 theta2 F(I^{n-1}) + (gamma tau / 2 - 1) I^{n-1}.
inline ImageGrid telegraph_rhs(const ImageGrid& prev, const ImageGrid& curr, const ImageGrid& g, double gamma,
                               double tau, double theta1, double theta2) {
  const auto flux_curr = flux_divergence(curr, g);
  const double t2 = tau * tau;
  ImageGrid rhs = curr;
  if (theta2 != 0.0) {
    const auto flux_prev = flux_divergence(prev, g);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += t2 * theta2 * flux_prev[k];
  }
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] += curr[k] + t2 * (1.0 - theta1 - theta2) * flux_curr[k] + (0.5 * gamma * tau - 1.0) * prev[k];
  }
  return rhs;
}

/// Advances (I^{n-1}, I^n) to I^{n+1} with the coefficient g frozen at level n.
/// theta1 == 0 is an explicit update; otherwise the linear system is solved by
/// lexicographic Gauss-Seidel sweeps.
inline TelegraphUpdate telegraph_update(const ImageGrid& prev, const ImageGrid& curr, const ImageGrid& g,
                                        double gamma, double tau, double theta1, double theta2,
                                        double gs_tol = 1e-6, int gs_max_sweeps = 100) {
  require_same_shape(prev, curr, "telegraph_update");
  require_same_shape(curr, g, "telegraph_update");
  const auto rhs = telegraph_rhs(prev, curr, g, gamma, tau, theta1, theta2);
  const double diag = 1.0 + 0.5 * gamma * tau;

  TelegraphUpdate out{rhs, 0, 0.0};
  if (theta1 == 0.0) {
    for (auto& v : out.next) v /= diag;
    return out;
  }

  // Off-diagonal weights: tau^2 theta1 * 0.5/h^2 * (g_ij + g_neighbour). Ghost
  // neighbours carry the unknown itself and drop out of the equation.
  const double h = curr.step();
  const double wscale = tau * tau * theta1 * 0.5 / (h * h);
  const std::size_t width = curr.width();
  const std::size_t height = curr.height();
  auto& x = out.next;
  x = curr;
  for (int sweep = 1; sweep <= gs_max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < height; ++j) {
      for (std::size_t i = 0; i < width; ++i) {
        const double c = g(i, j);
        double num = rhs(i, j);
        double den = diag;
        auto couple = [&](std::size_t ii, std::size_t jj) {
          const double wgt = wscale * (c + g(ii, jj));
          num += wgt * x(ii, jj);
          den += wgt;
        };
        if (i + 1 < width) couple(i + 1, j);
        if (i > 0) couple(i - 1, j);
        if (j + 1 < height) couple(i, j + 1);
        if (j > 0) couple(i, j - 1);
        x(i, j) = num / den;
      }
    }
    out.sweeps = sweep;
    out.residual = telegraph_residual(x, rhs, g, gamma, tau, theta1);
    if (out.residual < gs_tol) return out;
  }
  throw ConvergenceError(out.residual, out.sweeps);
}

namespace detail {

inline double max_value(const ImageGrid& grid) { return minmax(grid).second; }

inline void check_cfl(const SolverConfig& cfg, double g_max, double h) {
  if (!cfg.cfl_enforce) return;
  const double admissible = cfl_max_tau(g_max, h);
  if (cfg.tau > admissible) throw CflError(cfg.tau, admissible);
}

inline double relative_change(const ImageGrid& next, const ImageGrid& curr) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < next.size(); ++k) {
    num += (next[k] - curr[k]) * (next[k] - curr[k]);
    den += curr[k] * curr[k];
  }
  return den > 0.0 ? num / den : (num > 0.0 ? infinity : 0.0);
}

inline void advance(SolverState& state, ImageGrid next, StepRecord record) {
  record.step = state.step + 1;
  record.rel_change = relative_change(next, state.curr);
  state.prev = std::move(state.curr);
  state.curr = std::move(next);
  state.step = record.step;
  state.history.push_back(record);
}

}  // namespace detail

/// Forward Euler: I^{n+1} = I^n + tau F(I^n, g^n).
inline SolverState diffusion_step(SolverState state, const SolverConfig& cfg, const DiffusivityConfig& dcfg) {
  const auto field = diffusivity_field(state.curr, dcfg);
  const double g_max = detail::max_value(field.g);
  detail::check_cfl(cfg, g_max, state.curr.step());
  const auto flux = flux_divergence(state.curr, field.g);
  ImageGrid next = state.curr;
  for (std::size_t k = 0; k < next.size(); ++k) next[k] += cfg.tau * flux[k];
  StepRecord rec;
  rec.max_g = g_max;
  detail::advance(state, std::move(next), rec);
  return state;
}

/// One weighted-theta step of the telegraph model.
inline SolverState telegraph_step(SolverState state, const SolverConfig& cfg, const DiffusivityConfig& dcfg) {
  const auto* model = std::get_if<TelegraphModel>(&cfg.model);
  if (!model) throw ParameterError("telegraph_step needs a telegraph model");
  const auto field = diffusivity_field(state.curr, dcfg);
  const double g_max = detail::max_value(field.g);
  detail::check_cfl(cfg, g_max, state.curr.step());
  auto upd = telegraph_update(state.prev, state.curr, field.g, model->gamma, cfg.tau, cfg.theta1, cfg.theta2,
                              cfg.gs_tol, cfg.gs_max_sweeps);
  StepRecord rec;
  rec.max_g = g_max;
  rec.gs_sweeps = upd.sweeps;
  detail::advance(state, std::move(upd.next), rec);
  return state;
}

inline SolverState step(SolverState state, const SolverConfig& cfg, const DiffusivityConfig& dcfg) {
  if (std::holds_alternative<DiffusionModel>(cfg.model)) return diffusion_step(std::move(state), cfg, dcfg);
  return telegraph_step(std::move(state), cfg, dcfg);
}

struct RunResult {
  ImageGrid restored;
  std::vector<StepRecord> history;
  int steps = 0;      // time steps taken
  int best_step = 0;  // level returned as `restored`
};

/// Iterates from I0 until the stop rule fires or max_steps is reached.
inline RunResult run(const ImageGrid& initial, const SolverConfig& cfg, const DiffusivityConfig& dcfg) {
  cfg.validate();
  dcfg.validate();
  require_positive_initial_data(initial);

  const auto* best_rule = std::get_if<BestPsnrStop>(&cfg.stop);
  const auto* rel_rule = std::get_if<RelChangeStop>(&cfg.stop);
  if (best_rule) require_same_shape(best_rule->reference, initial, "run (reference)");

  auto state = SolverState::initial(initial);
  RunResult result;
  double best_psnr = best_rule ? psnr(best_rule->reference, initial) : 0.0;
  ImageGrid best = initial;
  int stale = 0;

  while (state.step < cfg.max_steps) {
    state = step(std::move(state), cfg, dcfg);
    auto& rec = state.history.back();
    if (rel_rule) {
      if (rec.rel_change <= rel_rule->eps) break;
    } else {
      rec.psnr = psnr(best_rule->reference, state.curr);
      if (rec.psnr > best_psnr) {
        best_psnr = rec.psnr;
        best = state.curr;
        result.best_step = state.step;
        stale = 0;
      } else if (++stale >= best_rule->patience) {
        break;
      }
    }
  }

  result.steps = state.step;
  result.history = std::move(state.history);
  if (best_rule) {
    result.restored = std::move(best);
  } else {
    result.restored = std::move(state.curr);
    result.best_step = result.steps;
  }
  return result;
}

}  // namespace tdm
