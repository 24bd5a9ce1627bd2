#pragma once

// Command-line front end for despeckle-tdm. Kept in a header so the test
// suite can drive commands in-process.

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tdm/tdm.hpp"

namespace tdm::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeFailure = 1, kUsageError = 2 };

struct SpeckleArgs {
  std::string in;
  std::string out;
  unsigned looks = 1;
  std::uint64_t seed = 0;
};

struct DespeckleArgs {
  std::string in;
  std::string out;
  std::string config;
  std::string reference;
  std::string history;
};

struct MetricsArgs {
  std::string clean;
  std::string noisy;
  std::string restored;
  std::size_t si_window = 3;
  unsigned looks = 0;
};

struct BenchArgs {
  std::string suite;
  std::string out;
  unsigned jobs = 1;
  bool no_timing = false;
};

inline int cmd_speckle(const SpeckleArgs& a, std::ostream& out) {
  if (a.looks == 0) throw ParameterError("--looks must be >= 1");
  const auto clean = load_pgm(a.in);
  const auto noise = sample_speckle_field({a.looks, a.seed}, clean.width(), clean.height());
  save_pgm(apply_speckle(clean, noise), a.out);
  const auto mv = mean_variance(noise.values());
  out << "noise_mor,noise_vor\n" << format_number(mv.mean) << ',' << format_number(mv.variance) << '\n';
  return kSuccess;
}

inline int cmd_despeckle(const DespeckleArgs& a, std::ostream& out) {
  const auto rc = parse_run_config(load_config(a.config).top());
  std::optional<ImageGrid> reference;
  if (!a.reference.empty()) reference = load_pgm(a.reference);
  const auto solver = rc.solver_with(reference ? &*reference : nullptr);
  const auto noisy = load_pgm(a.in);
  if (reference) require_same_shape(*reference, noisy, "despeckle (--reference)");

  const auto result = run(noisy, solver, rc.diffusivity);
  save_pgm(result.restored, a.out);

  const std::string history_path = a.history.empty() ? a.out + ".history.csv" : a.history;
  std::ofstream hist(history_path);
  if (!hist) throw Error("cannot open '" + history_path + "' for writing");
  write_history_csv(hist, result.history);

  out << "steps,best_step";
  if (reference) out << ",psnr_in,psnr_out";
  out << '\n' << result.steps << ',' << result.best_step;
  if (reference) out << ',' << format_number(psnr(*reference, noisy)) << ',' << format_number(psnr(*reference, result.restored));
  out << '\n';
  return kSuccess;
}

inline int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  const auto clean = load_pgm(a.clean);
  const auto noisy = load_pgm(a.noisy);
  const auto restored = load_pgm(a.restored);
  std::optional<unsigned> looks;
  if (a.looks > 0) looks = a.looks;
  const auto report = evaluate(clean, noisy, restored, looks, a.si_window);
  out << metrics_csv_header << '\n' << metrics_csv_row(report) << '\n';
  return kSuccess;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto cases = expand_suite(load_config(a.suite));
  const auto rows = run_bench(cases, a.jobs);
  std::ofstream file(a.out);
  if (!file) throw Error("cannot open '" + a.out + "' for writing");
  write_bench_csv(file, rows, !a.no_timing);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  out << "cases,failed\n" << rows.size() << ',' << failed << '\n';
  return failed == 0 ? kSuccess : kRuntimeFailure;
}

/// Parses argv-style arguments (without the program name) and dispatches.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speckle synthesis and variable-exponent diffusion / telegraph despeckling", "despeckle-tdm"};
  app.require_subcommand(1);

  SpeckleArgs sp;
  auto* speckle = app.add_subcommand("speckle", "Multiply a clean PGM by seeded Gamma(L, 1/L) speckle");
  speckle->add_option("--in", sp.in, "Clean input PGM")->required();
  speckle->add_option("--out", sp.out, "Speckled output PGM")->required();
  speckle->add_option("--looks", sp.looks, "Look number L")->check(CLI::PositiveNumber);
  speckle->add_option("--seed", sp.seed, "RNG seed");

  DespeckleArgs dp;
  auto* despeckle = app.add_subcommand("despeckle", "Run the PDE filter on a noisy PGM");
  despeckle->add_option("--in", dp.in, "Noisy input PGM")->required();
  despeckle->add_option("--out", dp.out, "Restored output PGM")->required();
  despeckle->add_option("--config", dp.config, "key=value run configuration")->required();
  despeckle->add_option("--reference", dp.reference, "Clean reference PGM (needed for stop=best_psnr)");
  despeckle->add_option("--history", dp.history, "History CSV path (default <out>.history.csv)");

  MetricsArgs mp;
  auto* metrics = app.add_subcommand("metrics", "Quality measures of a restored image");
  metrics->add_option("--clean", mp.clean, "Clean PGM")->required();
  metrics->add_option("--noisy", mp.noisy, "Noisy PGM")->required();
  metrics->add_option("--restored", mp.restored, "Restored PGM")->required();
  metrics->add_option("--si-window", mp.si_window, "Speckle index window (odd, >= 3)");
  metrics->add_option("--looks", mp.looks, "Look number, fills vor_norm = VoR * L");

  BenchArgs bp;
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite and write a CSV report");
  bench->add_option("--suite", bp.suite, "Suite file")->required();
  bench->add_option("--out", bp.out, "Report CSV")->required();
  bench->add_option("--jobs", bp.jobs, "Worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--no-timing", bp.no_timing, "Write 0 for wall time (byte-stable reports)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kUsageError;
  }

  try {
    if (speckle->parsed()) return cmd_speckle(sp, out);
    if (despeckle->parsed()) return cmd_despeckle(dp, out);
    if (metrics->parsed()) return cmd_metrics(mp, out);
    return cmd_bench(bp, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const CflError& e) {
    err << "error: " << e.what() << '\n' << "admissible tau: " << format_number(e.admissible_tau()) << '\n';
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace tdm::cli
