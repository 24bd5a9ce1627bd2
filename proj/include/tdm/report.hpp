#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>

#include "tdm/metrics.hpp"
#include "tdm/solver.hpp"

namespace tdm {

/// Fixed CSV number format: 6 significant digits, "inf" / "-inf" / "nan".
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline constexpr const char* metrics_csv_header = "psnr,mssim,mor,vor,vor_norm,dg,enl,enl_star,si,fom";

inline std::string metrics_csv_row(const MetricsReport& m) {
  std::string row;
  for (double v : {m.psnr, m.mssim, m.mor, m.vor, m.vor_normalized, m.dg, m.enl, m.enl_star, m.si, m.fom}) {
    if (!row.empty()) row += ',';
    row += format_number(v);
  }
  return row;
}

inline constexpr const char* history_csv_header = "step,rel_change,psnr,gs_sweeps,max_g";

inline void write_history_csv(std::ostream& out, std::span<const StepRecord> history) {
  out << history_csv_header << '\n';
  for (const auto& r : history) {
    out << r.step << ',' << format_number(r.rel_change) << ',' << format_number(r.psnr) << ',' << r.gs_sweeps
        << ',' << format_number(r.max_g) << '\n';
  }
}

}  // namespace tdm
