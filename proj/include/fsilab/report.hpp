#pragma once

// Output files: CSV tables, SVG line charts and a JSON summary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsilab/analysis.hpp"
#include "fsilab/errors.hpp"

namespace fsilab {

/// Shortest text that round-trips: 17 significant digits.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }

  std::string csv() const {
    std::string s;
    for (std::size_t c = 0; c < header.size(); ++c) s += (c ? "," : "") + header[c];
    s += '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) s += ',';
        s += fmt17(r[c]);
      }
      s += '\n';
    }
    return s;
  }
};

inline Table energy_table(const EnergyTrace& tr) {
  Table t{{"t", "E_weighted", "E_standard", "mean_drift"}, {}};
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    t.rows.push_back({tr.t[k], tr.E_weighted[k], tr.E_standard[k], tr.mean_drift[k]});
  return t;
}

inline Table resolvent_table(const std::vector<ResolventRecord>& recs) {
  Table t{{"b", "a", "sample_id", "residual", "norm_weighted", "criterion_value"}, {}};
  for (const auto& r : recs)
    t.rows.push_back({r.b, r.a, static_cast<double>(r.sample_id), r.residual, r.norm_weighted, r.criterion_value});
  return t;
}

inline Table spectrum_table(const std::vector<Eigenpair>& eig) {
  Table t{{"index", "re", "im", "residual"}, {}};
  for (std::size_t k = 0; k < eig.size(); ++k)
    t.rows.push_back({static_cast<double>(k), eig[k].value.real(), eig[k].value.imag(), eig[k].residual});
  return t;
}

inline Table dissipativity_table(const DissipativityReport& rep) {
  Table t{{"sample_id", "q_over_norm2", "flow_budget", "pressure_plate_budget"}, {}};
  for (const auto& s : rep.samples)
    t.rows.push_back({static_cast<double>(s.sample_id), s.q_over_norm2, s.flow_budget, s.pressure_plate_budget});
  return t;
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

/// Minimal SVG line chart. Nonfinite points are skipped; log_y plots
/// log10 of positive values only.
inline std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series, bool log_x = false, bool log_y = false) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  auto tx = [&](double v) { return log_x ? (v > 0 ? std::log10(v) : std::nan("")) : v; };
  auto ty = [&](double v) { return log_y ? (v > 0 ? std::log10(v) : std::nan("")) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double a = tx(s.x[k]), b = ty(s.y[k]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double a) { return L + (a - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double b) { return H - B - (b - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << (log_x ? "log10 " : "") << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << H / 2 << ")\">" << (log_y ? "log10 " : "") << ylabel << "</text>\n";
  o << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"10\">" << fmt17(x0) << "</text>\n";
  o << "<text x=\"" << W - R << "\" y=\"" << H - B + 16 << "\" font-size=\"10\" text-anchor=\"end\">" << fmt17(x1)
    << "</text>\n";
  o << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" font-size=\"10\" text-anchor=\"end\">" << fmt17(y0)
    << "</text>\n";
  o << "<text x=\"" << L - 4 << "\" y=\"" << T + 8 << "\" font-size=\"10\" text-anchor=\"end\">" << fmt17(y1)
    << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* c = colors[s % 6];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) {
      const double a = tx(series[s].x[k]), b = ty(series[s].y[k]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      o << px(a) << ',' << py(b) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (s + 1) << "\" font-size=\"11\" text-anchor=\"end\" fill=\""
      << c << "\">" << series[s].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

using Json = nlohmann::ordered_json;

/// JSON number, with nonfinite values written as strings.
inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace fsilab
