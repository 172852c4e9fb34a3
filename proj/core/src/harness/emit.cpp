// Copyright 2026 The snlse-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "snlse/errors.hpp"
#include "snlse/harness.hpp"

namespace snlse::harness {

namespace fs = std::filesystem;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void emit_csv(const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows, const fs::path& path) {
  if (rows.empty()) throw InvalidInput("emit_csv: no rows for " + path.string());
  auto out = open_output(path);
  auto write_row = [&](const std::vector<std::string>& row) {
    if (row.size() != header.size()) throw InvalidInput("emit_csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  };
  write_row(header);
  for (const auto& r : rows) write_row(r);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit_converge_csv(const std::vector<ErrorRecord>& records, const RunConfig& config,
                       const fs::path& path) {
  if (records.empty()) throw InvalidInput("emit_converge_csv: no records");
  std::vector<std::vector<std::string>> rows;
  const auto sigma = format_double(config.sigma);
  const auto p = std::to_string(config.p_moment);
  std::size_t start = 0;
  while (start < records.size()) {
    std::size_t stop = start;
    while (stop < records.size() && records[stop].scheme == records[start].scheme) ++stop;
    const std::span<const ErrorRecord> group(records.data() + start, stop - start);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const auto& r = group[i];
      std::string running;
      if (i > 0) {
        const double xs[2] = {group[i - 1].tau, r.tau};
        const double ys[2] = {group[i - 1].error_value, r.error_value};
        running = (ys[0] > 0 && ys[1] > 0) ? format_double(loglog_fit(xs, ys).slope) : "nan";
      }
      rows.push_back({std::string(to_string(r.scheme)), format_double(r.tau), sigma, p, std::to_string(r.num_paths_used),
                      format_double(r.error_value), format_double(r.error_sq), format_double(r.std_error),
                      running});
    }
    std::string slope = "nan";
    if (group.size() >= 3) {
      try {
        slope = format_double(order_fit(group).slope);
      } catch (const InvalidInput&) {
      }
    }
    rows.push_back({std::string(to_string(group.front().scheme)), "fit", sigma, p,
                    std::to_string(group.front().num_paths_used), "", "", "", slope});
    start = stop;
  }
  emit_csv({"scheme", "tau", "sigma", "p", "M", "error", "error_sq", "std_error", "slope_running"}, rows,
           path);
}

void emit_longterm_csv(const ErrorCurve& curve, const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& pt : curve.points) {
    rows.push_back({std::string(to_string(curve.scheme)), format_double(pt.time), format_double(pt.error_sq),
                    format_double(pt.std_error), std::to_string(pt.num_paths_used)});
  }
  emit_csv({"scheme", "t", "error_sq", "std_error", "M"}, rows, path);
}

void emit_eps_csv(const EpsilonScalingResult& result, double q, const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : result.rows) {
    rows.push_back({std::string(to_string(row.record.scheme)), format_double(row.epsilon), format_double(q),
                    format_double(row.horizon), format_double(row.record.error_value),
                    format_double(result.fitted_exponent)});
  }
  emit_csv({"scheme", "epsilon", "q", "horizon", "error", "fitted_exponent"}, rows, path);
}

void emit_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
              const std::string& y_label, bool log_x, bool log_y, const fs::path& path) {
  constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 50;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if ((log_x && s.xs[i] <= 0) || (log_y && s.ys[i] <= 0)) continue;
      x0 = std::min(x0, tx(s.xs[i]));
      x1 = std::max(x1, tx(s.xs[i]));
      y0 = std::min(y0, ty(s.ys[i]));
      y1 = std::max(y1, ty(s.ys[i]));
    }
  }
  if (!std::isfinite(x0)) throw InvalidInput("emit_svg: nothing to plot");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return kL + (tx(v) - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double v) { return kH - kB - (ty(v) - y0) / (y1 - y0) * (kH - kT - kB); };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  auto out = open_output(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << x_label << (log_x ? " (log10)" : "") << "</text>\n"
      << "<text x=\"16\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 16 " << kH / 2
      << ")\" text-anchor=\"middle\" font-size=\"12\">" << y_label << (log_y ? " (log10)" : "") << "</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double fx = x0 + (x1 - x0) * tick / 4, fy = y0 + (y1 - y0) * tick / 4;
    const double sx = kL + (kW - kL - kR) * tick / 4, sy = kH - kB - (kH - kT - kB) * tick / 4;
    out << "<text x=\"" << sx << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << fx << "</text>\n"
        << "<text x=\"" << kL - 6 << "\" y=\"" << sy + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << fy
        << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 5];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].xs.size() && i < series[s].ys.size(); ++i) {
      if ((log_x && series[s].xs[i] <= 0) || (log_y && series[s].ys[i] <= 0)) continue;
      out << px(series[s].xs[i]) << "," << py(series[s].ys[i]) << " ";
    }
    out << "\"/>\n<text x=\"" << kW - kR - 110 << "\" y=\"" << kT + 14 * (s + 1) << "\" font-size=\"11\" fill=\""
        << color << "\">" << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace snlse::harness
