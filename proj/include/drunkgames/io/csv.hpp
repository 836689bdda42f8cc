#pragma once

// CSV writers. Numbers use the shortest representation that parses back to
// the same double.

#include <charconv>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "drunkgames/abm.hpp"
#include "drunkgames/basins.hpp"
#include "drunkgames/meanfield.hpp"

namespace drunk::io {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  CsvWriter& header(std::initializer_list<std::string_view> cols) {
    bool first = true;
    for (auto c : cols) {
      if (!first) os_ << ',';
      os_ << c;
      first = false;
    }
    os_ << '\n';
    return *this;
  }

  CsvWriter& cell(double v) { return raw(format_double(v)); }
  template <std::integral I>
  CsvWriter& cell(I v) {
    return raw(std::to_string(v));
  }
  CsvWriter& cell(std::string_view s) { return raw(std::string(s)); }

  void end_row() {
    os_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

inline void write_trajectory(std::ostream& os, const Trajectory& tr) {
  CsvWriter w(os);
  w.header({"t", "x", "alpha"});
  for (const auto& s : tr.samples) {
    w.cell(s.t).cell(s.state.x).cell(s.state.alpha).end_row();
  }
}

inline void write_field(std::ostream& os, std::span<const FieldSample> field) {
  CsvWriter w(os);
  w.header({"x", "alpha", "dx", "dalpha"});
  for (const auto& f : field) {
    w.cell(f.state.x).cell(f.state.alpha).cell(f.velocity.dx).cell(f.velocity.dalpha).end_row();
  }
}

inline void write_sweep(std::ostream& os, const SweepDataset& ds) {
  CsvWriter w(os);
  if (ds.axis_names.size() == 2) {
    w.header({"S2", "T2", "kappa", "attractiveness", "n_samples", "seed"});
  } else {
    w.header({"S1", "kappa", "attractiveness", "n_samples", "seed"});
  }
  for (const auto& c : ds.cells) {
    for (double p : c.params) w.cell(p);
    w.cell(c.kappa)
        .cell(c.result.attractiveness)
        .cell(c.result.n_samples)
        .cell(c.result.seed)
        .end_row();
  }
}

inline void write_abm_stats(std::ostream& os, std::span<const AbmStats> series) {
  CsvWriter w(os);
  w.header({"t", "x_mean", "alpha_mean", "alpha_g1", "alpha_g2", "coop_g1", "coop_g2",
            "delta_alpha", "dist_interior"});
  for (const auto& s : series) {
    w.cell(s.t)
        .cell(s.x_mean)
        .cell(s.alpha_mean)
        .cell(s.alpha_g1)
        .cell(s.alpha_g2)
        .cell(s.coop_g1)
        .cell(s.coop_g2)
        .cell(s.delta_alpha)
        .cell(s.dist_interior)
        .end_row();
  }
}

struct HeatmapCell {
  double s = 0.0;
  double delta0 = 0.0;
  double dist_interior_avg = 0.0;
  double delta_alpha_final = 0.0;
};

inline void write_heatmap(std::ostream& os, std::span<const HeatmapCell> cells) {
  CsvWriter w(os);
  w.header({"s", "delta0", "dist_interior_avg", "delta_alpha_final"});
  for (const auto& c : cells) {
    w.cell(c.s).cell(c.delta0).cell(c.dist_interior_avg).cell(c.delta_alpha_final).end_row();
  }
}

/// Minimal reader for the numeric CSVs written above: header names plus
/// rows of doubles.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  auto split = [](std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
      const auto p = line.find(',', start);
      out.push_back(line.substr(start, p == std::string_view::npos ? p : p - start));
      if (p == std::string_view::npos) break;
      start = p + 1;
    }
    return out;
  };
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (first) {
      for (auto c : split(line)) t.columns.emplace_back(c);
      first = false;
      continue;
    }
    std::vector<double> row;
    for (auto c : split(line)) {
      double v = std::nan("");
      if (c != "nan") std::from_chars(c.data(), c.data() + c.size(), v);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace drunk::io
