#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tdm/diffusivity.hpp"
#include "tdm/error.hpp"
#include "tdm/solver.hpp"

namespace tdm {

/// Ordered key=value pairs of one section.
struct ConfigSection {
  std::string name;  // empty for the top-level block
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  void set(std::string key, std::string value) {
    for (auto& [k, v] : entries) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
};

/// TOML-subset document: an unnamed top-level section followed by `[name]`
/// sections. Values are bare words or double-quoted strings; '#' starts a comment.
struct ConfigDocument {
  std::vector<ConfigSection> sections{ConfigSection{}};

  const ConfigSection& top() const { return sections.front(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"') quoted = !quoted;
    if (line[k] == '#' && !quoted) return std::string(line.substr(0, k));
  }
  return std::string(line);
}

}  // namespace detail

inline ConfigDocument parse_config(std::string_view text) {
  ConfigDocument doc;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string stripped = detail::strip_comment(raw);
    const auto line = detail::trim(stripped);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError(std::string(line), where + ": malformed section header");
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      for (const auto& s : doc.sections) {
        if (s.name == name) throw ConfigError(std::string(name), where + ": duplicate section");
      }
      doc.sections.push_back(ConfigSection{std::string(name), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(std::string(line), where + ": expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", where + ": empty key");
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') throw ConfigError(std::string(key), where + ": unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    auto& section = doc.sections.back();
    if (section.find(key)) throw ConfigError(std::string(key), where + ": duplicate key");
    section.entries.emplace_back(std::string(key), std::string(value));
  }
  return doc;
}

inline ConfigDocument load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("", "cannot open config file '" + path + "'");
  const std::string text{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
  return parse_config(text);
}

inline double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) throw ConfigError(key, "expected a number, got '" + value + "'");
  return out;
}

inline long long parse_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), last, out);
  if (ec != std::errc{} || ptr != last) throw ConfigError(key, "expected an integer, got '" + value + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

/// Comma-separated list with surrounding whitespace trimmed.
inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto end = comma == std::string::npos ? value.size() : comma;
    const auto item = detail::trim(std::string_view(value).substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

enum class StopKind { RelChange, BestPsnr };

/// Solver and diffusivity settings read from a config; the reference image for
/// the best-PSNR rule is supplied separately.
struct RunConfig {
  DiffusivityConfig diffusivity;
  SolverConfig solver;
  StopKind stop = StopKind::RelChange;
  double eps_stop = 1e-4;
  int patience = 10;

  /// Solver configuration with the stop rule resolved. BestPsnr without a
  /// reference is a configuration error on key `stop`.
  SolverConfig solver_with(const ImageGrid* reference) const {
    SolverConfig cfg = solver;
    if (stop == StopKind::BestPsnr) {
      if (!reference) throw ConfigError("stop", "best_psnr requires a reference image");
      cfg.stop = BestPsnrStop{*reference, patience};
    } else {
      cfg.stop = RelChangeStop{eps_stop};
    }
    return cfg;
  }
};

/// Keys accepted by `parse_run_config`.
inline const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "model", "gamma",   "tau",       "theta1",   "theta2", "epsilon", "nu",       "K",
      "exponent", "p0",   "alpha",     "k",        "xi",     "sigma",   "stop",     "eps_stop",
      "max_steps", "patience", "gs_tol", "gs_max_sweeps", "cfl_enforce"};
  return keys;
}

/// Builds a RunConfig from flat keys. Unspecified keys keep their defaults:
/// diffusion model, gamma 2, tau 0.25, theta1 = theta2 = 0, epsilon 1e-4,
/// nu 0, K 0.1, constant exponent p0 = 2, alpha 1, k 1, xi 1, sigma = xi,
/// rel_change stop with eps 1e-4, 500 steps, patience 10.
/// Unknown keys in `entries` raise ConfigError naming the key unless listed in `ignore`.
inline RunConfig parse_run_config(const ConfigSection& section, const std::vector<std::string>& ignore = {}) {
  const auto& known = run_config_keys();
  for (const auto& [key, value] : section.entries) {
    const bool ok = std::find(known.begin(), known.end(), key) != known.end() ||
                    std::find(ignore.begin(), ignore.end(), key) != ignore.end();
    if (!ok) throw ConfigError(key, "unknown key");
  }
  auto real = [&](const char* key, double fallback) {
    const auto* v = section.find(key);
    return v ? parse_real(key, *v) : fallback;
  };
  auto integer = [&](const char* key, long long fallback) {
    const auto* v = section.find(key);
    return v ? parse_integer(key, *v) : fallback;
  };
  auto text = [&](const char* key, const char* fallback) {
    const auto* v = section.find(key);
    return v ? *v : std::string(fallback);
  };

  RunConfig rc;
  const auto model = text("model", "diffusion");
  if (model == "diffusion") {
    rc.solver.model = DiffusionModel{};
    if (section.find("gamma")) parse_real("gamma", *section.find("gamma"));
  } else if (model == "telegraph") {
    rc.solver.model = TelegraphModel{real("gamma", 2.0)};
  } else {
    throw ConfigError("model", "expected diffusion or telegraph, got '" + model + "'");
  }
  rc.solver.tau = real("tau", 0.25);
  rc.solver.theta1 = real("theta1", 0.0);
  rc.solver.theta2 = real("theta2", 0.0);
  rc.solver.gs_tol = real("gs_tol", 1e-6);
  rc.solver.gs_max_sweeps = static_cast<int>(integer("gs_max_sweeps", 100));
  rc.solver.max_steps = static_cast<int>(integer("max_steps", 500));
  if (const auto* v = section.find("cfl_enforce")) rc.solver.cfl_enforce = parse_bool("cfl_enforce", *v);

  rc.diffusivity.epsilon = real("epsilon", 1e-4);
  rc.diffusivity.nu = real("nu", 0.0);
  rc.diffusivity.K = real("K", 0.1);
  rc.diffusivity.xi = real("xi", 1.0);
  const double p0 = real("p0", 2.0);
  const double alpha = real("alpha", 1.0);
  const double k = real("k", 1.0);
  const auto exponent = text("exponent", "constant");
  if (exponent == "constant") {
    rc.diffusivity.exponent = ConstantExponent{p0};
  } else if (exponent == "avg_gray") {
    rc.diffusivity.exponent = AvgGrayExponent{p0, alpha};
  } else if (exponent == "gray") {
    rc.diffusivity.exponent = GrayExponent{p0, alpha};
  } else if (exponent == "grad") {
    GradExponent g{p0, k, std::nullopt};
    if (const auto* v = section.find("sigma")) g.sigma = parse_real("sigma", *v);
    rc.diffusivity.exponent = g;
  } else {
    throw ConfigError("exponent", "expected constant, avg_gray, gray or grad, got '" + exponent + "'");
  }

  const auto stop = text("stop", "rel_change");
  if (stop == "rel_change") {
    rc.stop = StopKind::RelChange;
  } else if (stop == "best_psnr") {
    rc.stop = StopKind::BestPsnr;
  } else {
    throw ConfigError("stop", "expected rel_change or best_psnr, got '" + stop + "'");
  }
  rc.eps_stop = real("eps_stop", 1e-4);
  rc.patience = static_cast<int>(integer("patience", 10));

  // Map range violations back onto config keys.
  auto check = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
  };
  check(rc.solver.tau > 0.0, "tau", "must be > 0");
  check(rc.solver.theta1 >= 0.0, "theta1", "must be >= 0");
  check(rc.solver.theta2 >= 0.0, "theta2", "must be >= 0");
  check(rc.solver.theta1 + rc.solver.theta2 <= 1.0, "theta2", "theta1 + theta2 must be <= 1");
  if (const auto* t = std::get_if<TelegraphModel>(&rc.solver.model)) check(t->gamma > 0.0, "gamma", "must be > 0");
  check(rc.solver.max_steps >= 1, "max_steps", "must be >= 1");
  check(rc.solver.gs_tol > 0.0, "gs_tol", "must be > 0");
  check(rc.solver.gs_max_sweeps >= 1, "gs_max_sweeps", "must be >= 1");
  check(rc.eps_stop > 0.0, "eps_stop", "must be > 0");
  check(rc.patience >= 1, "patience", "must be >= 1");
  check(rc.diffusivity.epsilon > 0.0, "epsilon", "must be > 0");
  check(rc.diffusivity.nu >= 0.0, "nu", "must be >= 0");
  check(rc.diffusivity.K > 0.0, "K", "must be > 0");
  check(rc.diffusivity.xi > 0.0, "xi", "must be > 0");
  check(p0 > 0.0 && p0 <= 4.0, "p0", "must lie in (0, 4]");
  check(alpha > 0.0, "alpha", "must be > 0");
  check(k > 0.0, "k", "must be > 0");
  if (const auto* g = std::get_if<GradExponent>(&rc.diffusivity.exponent); g && g->sigma) {
    check(*g->sigma > 0.0, "sigma", "must be > 0");
  }
  return rc;
}

}  // namespace tdm
