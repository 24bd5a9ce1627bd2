#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <ostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "tdm/config.hpp"
#include "tdm/metrics.hpp"
#include "tdm/pgm.hpp"
#include "tdm/phantom.hpp"
#include "tdm/report.hpp"
#include "tdm/solver.hpp"
#include "tdm/speckle.hpp"

namespace tdm {

/// Clean scene for a benchmark case: a synthetic phantom or a PGM file.
struct PhantomSource {
  std::variant<PhantomKind, std::filesystem::path> source = PhantomKind::Circle;

  std::string name() const {
    if (const auto* k = std::get_if<PhantomKind>(&source)) return to_string(*k);
    return "file:" + std::get<std::filesystem::path>(source).string();
  }

  ImageGrid make(std::size_t width, std::size_t height) const {
    if (const auto* k = std::get_if<PhantomKind>(&source)) return make_phantom(*k, width, height);
    return load_pgm(std::get<std::filesystem::path>(source));
  }

  static PhantomSource parse(const std::string& text) {
    if (text == "circle") return {PhantomKind::Circle};
    if (text == "mosaic") return {PhantomKind::Mosaic};
    if (text == "ramp") return {PhantomKind::Ramp};
    if (text.rfind("file:", 0) == 0 && text.size() > 5) return {std::filesystem::path(text.substr(5))};
    throw ConfigError("phantoms", "unknown phantom '" + text + "' (circle, mosaic, ramp or file:<path>)");
  }
};

struct BenchCase {
  std::string label;  // method label, e.g. "TVE"
  PhantomSource phantom;
  std::size_t width = 256;
  std::size_t height = 256;
  unsigned looks = 1;
  std::uint64_t seed = 0;
  RunConfig run;
};

struct BenchRow {
  std::string label;
  std::string phantom;
  unsigned looks = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  int best_step = 0;
  double wall_seconds = 0.0;
  MetricsReport metrics;
  std::string error;  // empty on success
};

/// Expands a suite document into cases.
///
/// Top-level keys `phantoms`, `looks`, `seeds`, `width`, `height` define the
/// grid; remaining top-level keys are defaults for every method. Each `[label]`
/// section is one method; `[label@phantom]` overrides keys for that phantom
/// only. Cases are ordered phantom, looks, method, seed.
inline std::vector<BenchCase> expand_suite(const ConfigDocument& doc) {
  static const std::vector<std::string> grid_keys{"phantoms", "looks", "seeds", "width", "height"};
  const auto& top = doc.top();
  auto required = [&](const char* key) -> const std::string& {
    const auto* v = top.find(key);
    if (!v) throw ConfigError(key, "missing from suite");
    return *v;
  };

  std::vector<PhantomSource> phantoms;
  for (const auto& p : split_list(required("phantoms"))) phantoms.push_back(PhantomSource::parse(p));
  std::vector<unsigned> looks;
  for (const auto& l : split_list(required("looks"))) {
    const auto v = parse_integer("looks", l);
    if (v < 1) throw ConfigError("looks", "must be >= 1");
    looks.push_back(static_cast<unsigned>(v));
  }
  std::vector<std::uint64_t> seeds;
  for (const auto& s : split_list(required("seeds"))) {
    const auto v = parse_integer("seeds", s);
    if (v < 0) throw ConfigError("seeds", "must be >= 0");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  const auto width = top.find("width") ? parse_integer("width", *top.find("width")) : 256;
  const auto height = top.find("height") ? parse_integer("height", *top.find("height")) : 256;
  if (width < 32 || height < 32) throw ConfigError("width", "suite images must be at least 32x32");
  if (phantoms.empty() || looks.empty() || seeds.empty()) throw ConfigError("phantoms", "empty suite grid");

  std::vector<const ConfigSection*> methods;
  for (std::size_t s = 1; s < doc.sections.size(); ++s) {
    const auto& name = doc.sections[s].name;
    const auto at = name.find('@');
    if (at == std::string::npos) {
      methods.push_back(&doc.sections[s]);
      continue;
    }
    const auto base = name.substr(0, at);
    const bool known = std::any_of(doc.sections.begin(), doc.sections.end(),
                                   [&](const ConfigSection& c) { return c.name == base; });
    if (!known) throw ConfigError(name, "override section for unknown method '" + base + "'");
    PhantomSource::parse(name.substr(at + 1));
  }
  if (methods.empty()) throw ConfigError("", "suite defines no method sections");

  auto find_section = [&](const std::string& name) -> const ConfigSection* {
    for (const auto& s : doc.sections) {
      if (s.name == name) return &s;
    }
    return nullptr;
  };

  std::vector<BenchCase> cases;
  for (const auto& phantom : phantoms) {
    for (unsigned L : looks) {
      for (const auto* method : methods) {
        ConfigSection merged;
        for (const auto& [k, v] : top.entries) {
          if (std::find(grid_keys.begin(), grid_keys.end(), k) == grid_keys.end()) merged.set(k, v);
        }
        for (const auto& [k, v] : method->entries) merged.set(k, v);
        if (const auto* o = find_section(method->name + "@" + phantom.name())) {
          for (const auto& [k, v] : o->entries) merged.set(k, v);
        }
        const auto run = parse_run_config(merged);
        for (auto seed : seeds) {
          cases.push_back(BenchCase{method->name, phantom, static_cast<std::size_t>(width),
                                    static_cast<std::size_t>(height), L, seed, run});
        }
      }
    }
  }
  return cases;
}

/// Synthesizes the noisy image for a case, despeckles it and scores it against
/// the clean scene. Errors are captured in the row rather than thrown.
inline BenchRow run_case(const BenchCase& c) {
  BenchRow row{c.label, c.phantom.name(), c.looks, c.seed, 0, 0, 0.0, {}, {}};
  const auto start = std::chrono::steady_clock::now();
  try {
    const auto clean = c.phantom.make(c.width, c.height);
    const auto noise = sample_speckle_field({c.looks, c.seed}, clean.width(), clean.height());
    const auto noisy = apply_speckle(clean, noise);
    const auto result = run(noisy, c.run.solver_with(&clean), c.run.diffusivity);
    row.steps = result.steps;
    row.best_step = result.best_step;
    row.metrics = evaluate(clean, noisy, result.restored, c.looks);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

/// Runs cases on up to `jobs` worker threads; each case is independent and
/// single-threaded, so rows do not depend on the job count.
inline std::vector<BenchRow> run_bench(const std::vector<BenchCase>& cases, unsigned jobs = 1) {
  std::vector<BenchRow> rows(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cases.size(); k = next++) rows[k] = run_case(cases[k]);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(cases.size())));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  return rows;
}

/// One CSV row per case. `with_timing = false` writes 0 for wall time so
/// reports are byte-identical across runs.
inline void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows, bool with_timing = true) {
  out << "label,phantom,looks,seed,steps,best_step,wall_s," << metrics_csv_header << ",status\n";
  for (const auto& r : rows) {
    std::string status = r.error.empty() ? "ok" : "error: " + r.error;
    std::replace(status.begin(), status.end(), '"', '\'');
    out << r.label << ',' << r.phantom << ',' << r.looks << ',' << r.seed << ',' << r.steps << ',' << r.best_step
        << ',' << format_number(with_timing ? r.wall_seconds : 0.0) << ',' << metrics_csv_row(r.metrics) << ",\""
        << status << "\"\n";
  }
}

}  // namespace tdm
