// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mtrx/diagnostics.hpp"
#include "mtrx/errors.hpp"

namespace mtrx {

/// 17 significant digits in scientific notation; round-trips every double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string format_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string{};
}

inline constexpr const char* kSeriesHeader =
    "time,dt_used,cfl_used,energy,dissipation,budget_residual,"
    "l2_u,l2_v,l2_T_e,l2_q_e,l4_u,l4_v,h1_u,h1_v,h1_T_e,h1_q_e,"
    "qplus_l2_sq_over_eps,max_qe,grad_u_linf";

inline std::string join_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

inline std::string series_row(const DiagnosticsRecord& r) {
  std::vector<std::string> cells;
  for (double v : {r.time, r.dt_used, r.cfl_used, r.energy, r.dissipation, r.budget_residual,
                   r.l2_u, r.l2_v, r.l2_T_e, r.l2_q_e, r.l4_u, r.l4_v, r.h1_u, r.h1_v, r.h1_T_e, r.h1_q_e})
    cells.push_back(format_number(v));
  cells.push_back(format_number(r.qplus_l2_sq_over_eps));
  cells.push_back(format_number(r.max_qe));
  cells.push_back(format_number(r.grad_u_linf));
  return join_row(cells);
}

/// Streams DiagnosticsRecord rows to a CSV file.
class SeriesWriter {
public:
  explicit SeriesWriter(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
    if (!out_) throw ConfigError("cannot open " + path.string() + " for writing");
    out_ << kSeriesHeader << '\n';
  }

  void write(const DiagnosticsRecord& r) {
    out_ << series_row(r) << '\n';
    if (!out_) throw ConfigError("write failed for series.csv");
  }

private:
  std::ofstream out_;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

} // namespace mtrx
