// Copyright 2026 The Toolkin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "toolkin/cli.hpp"
#include "toolkin/error.hpp"

namespace toolkin::cli {
namespace {

constexpr double kWidth = 720, kHeight = 420, kMargin = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const std::size_t c = line.find(',');
    out.push_back(trim(line.substr(0, c)));
    if (c == std::string_view::npos) return out;
    line = line.substr(c + 1);
  }
}

bool to_double(std::string_view s, double& v) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Maps data ranges onto a pixel rectangle; degenerate ranges are padded.
struct Frame {
  double x0, y0, w, h;  // pixel rectangle
  double xmin, xmax, ymin, ymax;

  Frame(double px, double py, double pw, double ph, double lo_x, double hi_x, double lo_y, double hi_y)
      : x0(px), y0(py), w(pw), h(ph), xmin(lo_x), xmax(hi_x), ymin(lo_y), ymax(hi_y) {
    pad(xmin, xmax);
    pad(ymin, ymax);
  }
  static void pad(double& lo, double& hi) {
    if (hi - lo < 1e-12) {
      const double d = std::max(1e-3, std::abs(lo) * 0.05);
      lo -= d;
      hi += d;
    }
  }
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }

  std::string axes(std::string_view xlabel, std::string_view ylabel) const {
    std::string s;
    s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(w) + "\" height=\"" + fmt(h) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 + h + 16) + "\" font-size=\"11\">" + short_num(xmin) + "</text>\n";
    s += "<text x=\"" + fmt(x0 + w) + "\" y=\"" + fmt(y0 + h + 16) + "\" font-size=\"11\" text-anchor=\"end\">" +
         short_num(xmax) + "</text>\n";
    s += "<text x=\"" + fmt(x0 - 4) + "\" y=\"" + fmt(y0 + h) + "\" font-size=\"11\" text-anchor=\"end\">" +
         short_num(ymin) + "</text>\n";
    s += "<text x=\"" + fmt(x0 - 4) + "\" y=\"" + fmt(y0 + 10) + "\" font-size=\"11\" text-anchor=\"end\">" +
         short_num(ymax) + "</text>\n";
    s += "<text x=\"" + fmt(x0 + w / 2) + "\" y=\"" + fmt(y0 + h + 32) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
    s += "<text x=\"" + fmt(x0 - 36) + "\" y=\"" + fmt(y0 + h / 2) + "\" font-size=\"12\" text-anchor=\"middle\"" +
         " transform=\"rotate(-90 " + fmt(x0 - 36) + " " + fmt(y0 + h / 2) + ")\">" + escape(ylabel) + "</text>\n";
    return s;
  }
};

std::string header(std::string_view title) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + fmt(kWidth / 2) +
         "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">" + escape(title) + "</text>\n";
}

std::string polyline(const Frame& f, const std::vector<double>& x, const std::vector<double>& y, const char* color,
                     std::string_view name) {
  std::string pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) pts += ' ';
    pts += fmt(f.px(x[i])) + "," + fmt(f.py(y[i]));
  }
  return "<polyline class=\"series\" data-name=\"" + escape(name) + "\" fill=\"none\" stroke=\"" + color +
         "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
}

std::string legend(const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = 44 + 16 * static_cast<double>(i);
    s += "<text x=\"" + fmt(kWidth - kMargin) + "\" y=\"" + fmt(y) + "\" font-size=\"11\" text-anchor=\"end\" fill=\"" +
         kPalette[i % std::size(kPalette)] + "\">" + escape(names[i]) + "</text>\n";
  }
  return s;
}

}  // namespace

Table parse_table(std::string_view text) {
  Table t;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line);
    std::vector<double> vals(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && to_double(fields[i], vals[i]);
    if (t.columns.empty()) {
      t.columns.resize(fields.size());
      if (!numeric) {
        for (auto f : fields) t.names.emplace_back(f);
        continue;
      }
      for (std::size_t i = 0; i < fields.size(); ++i) t.names.push_back("col" + std::to_string(i + 1));
    }
    if (fields.size() != t.columns.size()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(t.columns.size()) + " fields");
    }
    if (!numeric) throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": non-numeric field");
    for (std::size_t i = 0; i < vals.size(); ++i) t.columns[i].push_back(vals[i]);
  }
  if (t.rows() == 0) throw Error(ErrorCode::kParseError, "table has no data rows");
  return t;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  if (s.empty()) throw Error(ErrorCode::kEmptyList, "quantile of an empty list");
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.size()) return s.back();
  return s[i] + (pos - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

BoxStats box_stats(std::vector<double> v) {
  if (v.empty()) throw Error(ErrorCode::kEmptyList, "box plot of an empty list");
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile_sorted(v, 0.25);
  b.median = quantile_sorted(v, 0.5);
  b.q3 = quantile_sorted(v, 0.75);
  const double iqr = b.q3 - b.q1;
  b.whisker_lo = b.q1;
  b.whisker_hi = b.q3;
  for (double x : v) {
    if (x < b.q1 - 1.5 * iqr || x > b.q3 + 1.5 * iqr) {
      b.outliers.push_back(x);
    } else {
      b.whisker_lo = std::min(b.whisker_lo, x);
      b.whisker_hi = std::max(b.whisker_hi, x);
    }
  }
  return b;
}

std::string svg_curves(const std::vector<Series>& series, std::string_view title) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const Series& s : series) {
    for (double x : s.x) xlo = std::min(xlo, x), xhi = std::max(xhi, x);
    for (double y : s.y) ylo = std::min(ylo, y), yhi = std::max(yhi, y);
  }
  if (!(xlo <= xhi)) throw Error(ErrorCode::kEmptyList, "no points to plot");
  const Frame f(kMargin + 20, kMargin, kWidth - 2 * kMargin - 20, kHeight - 2 * kMargin - 20, xlo, xhi, ylo, yhi);
  std::string s = header(title) + f.axes("environment steps", "mean episode return");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    s += polyline(f, series[i].x, series[i].y, kPalette[i % std::size(kPalette)], series[i].name);
    names.push_back(series[i].name);
  }
  return s + legend(names) + "</svg>\n";
}

std::string svg_trajectories(const std::vector<traj::Trajectory>& trajs, std::string_view title) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo, zlo = xlo, zhi = -xlo;
  for (const auto& t : trajs) {
    for (const auto& w : t.waypoints) {
      const auto& p = w.pose.position;
      xlo = std::min(xlo, p.x), xhi = std::max(xhi, p.x);
      ylo = std::min(ylo, p.y), yhi = std::max(yhi, p.y);
      zlo = std::min(zlo, p.z), zhi = std::max(zhi, p.z);
    }
  }
  if (!(xlo <= xhi)) throw Error(ErrorCode::kEmptyList, "no waypoints to plot");
  const double pw = (kWidth - 3 * kMargin - 40) / 2, ph = kHeight - 2 * kMargin - 20;
  // Horizontal axis is y (the push direction) in both panels.
  const Frame top(kMargin + 20, kMargin, pw, ph, ylo, yhi, xlo, xhi);
  const Frame side(2 * kMargin + 40 + pw, kMargin, pw, ph, ylo, yhi, zlo, zhi);
  std::string s = header(title) + top.axes("y (m)", "x (m)") + side.axes("y (m)", "z (m)");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    std::vector<double> x, y, z;
    for (const auto& w : trajs[i].waypoints) {
      x.push_back(w.pose.position.x);
      y.push_back(w.pose.position.y);
      z.push_back(w.pose.position.z);
    }
    const char* c = kPalette[i % std::size(kPalette)];
    const std::string name = "trajectory " + std::to_string(i + 1);
    s += polyline(top, y, x, c, name);
    s += polyline(side, y, z, c, name);
    names.push_back(name);
  }
  return s + legend(names) + "</svg>\n";
}

std::string svg_boxes(const std::vector<std::string>& names, const std::vector<BoxStats>& boxes,
                      std::string_view title) {
  if (boxes.empty()) throw Error(ErrorCode::kEmptyList, "no boxes to plot");
  double lo = boxes.front().min, hi = boxes.front().max;
  for (const BoxStats& b : boxes) lo = std::min(lo, b.min), hi = std::max(hi, b.max);
  const auto n = static_cast<double>(boxes.size());
  const Frame f(kMargin + 20, kMargin, kWidth - 2 * kMargin - 20, kHeight - 2 * kMargin - 20, 0, n, lo, hi);
  std::string s = header(title) + f.axes("", "value");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BoxStats& b = boxes[i];
    const double cx = f.px(static_cast<double>(i) + 0.5);
    const double half = std::min(40.0, f.w / n * 0.3);
    s += "<g class=\"box\" data-name=\"" + escape(names[i]) + "\" data-q1=\"" + exact(b.q1) + "\" data-median=\"" +
         exact(b.median) + "\" data-q3=\"" + exact(b.q3) + "\">\n";
    s += "<line class=\"whisker\" x1=\"" + fmt(cx) + "\" y1=\"" + fmt(f.py(b.whisker_lo)) + "\" x2=\"" + fmt(cx) +
         "\" y2=\"" + fmt(f.py(b.q1)) + "\" stroke=\"#333\"/>\n";
    s += "<line class=\"whisker\" x1=\"" + fmt(cx) + "\" y1=\"" + fmt(f.py(b.q3)) + "\" x2=\"" + fmt(cx) +
         "\" y2=\"" + fmt(f.py(b.whisker_hi)) + "\" stroke=\"#333\"/>\n";
    s += "<rect class=\"iqr\" x=\"" + fmt(cx - half) + "\" y=\"" + fmt(f.py(b.q3)) + "\" width=\"" + fmt(2 * half) +
         "\" height=\"" + fmt(f.py(b.q1) - f.py(b.q3)) + "\" fill=\"#9ecae1\" stroke=\"#333\"/>\n";
    s += "<line class=\"median\" x1=\"" + fmt(cx - half) + "\" y1=\"" + fmt(f.py(b.median)) + "\" x2=\"" +
         fmt(cx + half) + "\" y2=\"" + fmt(f.py(b.median)) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    for (double o : b.outliers) {
      s += "<circle class=\"outlier\" cx=\"" + fmt(cx) + "\" cy=\"" + fmt(f.py(o)) + "\" r=\"3\" fill=\"none\" stroke=\"#333\"/>\n";
    }
    s += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(f.y0 + f.h + 16) + "\" font-size=\"11\" text-anchor=\"middle\">" +
         escape(names[i]) + "</text>\n</g>\n";
  }
  return s + "</svg>\n";
}

}  // namespace toolkin::cli
