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

#include "toolkin/toolvision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "toolkin/error.hpp"

namespace toolkin::vision {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidSpec, "image dimensions must be >= 1");
  }
  pixels_.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

Rgb Image::at(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  pixels_[i] = c.r;
  pixels_[i + 1] = c.g;
  pixels_[i + 2] = c.b;
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> data) : data_(data) {}

  // Skips whitespace and '#' comments, then reads a decimal token.
  long next_int(const char* what) {
    skip_space_and_comments();
    long value = 0;
    int digits = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      value = value * 10 + (data_[pos_] - '0');
      if (value > 1'000'000'000L) throw Error(ErrorCode::kBadHeader, std::string(what) + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorCode::kBadHeader, std::string("expected ") + what);
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  void single_whitespace() {
    if (pos_ >= data_.size() || !std::isspace(data_[pos_])) {
      throw Error(ErrorCode::kBadHeader, "missing whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      if (std::isspace(data_[pos_])) {
        ++pos_;
      } else if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 2;
};

void check_marker(int width, int height, const Marker& m) {
  const int x0 = m.cx - m.width / 2;
  const int y0 = m.cy - m.height / 2;
  if (m.width < 1 || m.height < 1 || x0 < 0 || y0 < 0 || x0 + m.width > width ||
      y0 + m.height > height) {
    throw Error(ErrorCode::kOutOfBounds, "marker does not fit inside the image");
  }
}

void fill_rect(Image& img, const Marker& m, Rgb c) {
  const int x0 = m.cx - m.width / 2;
  const int y0 = m.cy - m.height / 2;
  for (int y = y0; y < y0 + m.height; ++y)
    for (int x = x0; x < x0 + m.width; ++x) img.set(x, y, c);
}

std::array<double, 2> rect_centroid(const Marker& m) {
  const int x0 = m.cx - m.width / 2;
  const int y0 = m.cy - m.height / 2;
  return {x0 + (m.width - 1) / 2.0, y0 + (m.height - 1) / 2.0};
}

bool rects_overlap(const Marker& a, const Marker& b) {
  const int ax0 = a.cx - a.width / 2, ay0 = a.cy - a.height / 2;
  const int bx0 = b.cx - b.width / 2, by0 = b.cy - b.height / 2;
  return ax0 < bx0 + b.width && bx0 < ax0 + a.width && ay0 < by0 + b.height &&
         by0 < ay0 + a.height;
}

// Half extent of a pixel box along unit direction (ux, uy).
double support(const ComponentBox& b, double ux, double uy) {
  const double hw = (b.x_max - b.x_min + 1) / 2.0;
  const double hh = (b.y_max - b.y_min + 1) / 2.0;
  return hw * std::abs(ux) + hh * std::abs(uy);
}

}  // namespace

Image parse_ppm(std::span<const std::uint8_t> data) {
  if (data.size() < 2 || data[0] != 'P' || data[1] != '6') {
    throw Error(ErrorCode::kBadMagic, "not a binary PPM (P6) file");
  }
  HeaderReader rd(data);
  const long w = rd.next_int("width");
  const long h = rd.next_int("height");
  const long maxval = rd.next_int("maxval");
  if (w < 1 || h < 1) throw Error(ErrorCode::kBadHeader, "width and height must be >= 1");
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedMaxval, "only maxval 255 is supported, got " +
                                                   std::to_string(maxval));
  }
  rd.single_whitespace();
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3;
  if (data.size() - rd.pos() < need) {
    throw Error(ErrorCode::kTruncatedData, "raster has " + std::to_string(data.size() - rd.pos()) +
                                               " bytes, expected " + std::to_string(need));
  }
  Image img(static_cast<int>(w), static_cast<int>(h));
  std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(rd.pos()), need, img.bytes().begin());
  return img;
}

std::vector<std::uint8_t> write_ppm(const Image& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.bytes().begin(), image.bytes().end());
  return out;
}

Image read_ppm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  return parse_ppm(data);
}

void write_ppm_file(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  const auto bytes = write_ppm(image);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double c = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? c / mx : 0.0;
  if (c > 0.0) {
    double h;
    if (mx == r) {
      h = std::fmod((g - b) / c, 6.0);
    } else if (mx == g) {
      h = (b - r) / c + 2.0;
    } else {
      h = (r - g) / c + 4.0;
    }
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    if (h >= 360.0) h -= 360.0;
    out.h = h;
  }
  return out;
}

void HsvThresholds::validate() const {
  if (!(sat_min >= 0.0 && sat_min <= 1.0 && val_min >= 0.0 && val_min <= 1.0)) {
    throw Error(ErrorCode::kInvalidSpec, "sat_min and val_min must lie in [0,1]");
  }
  if (!(hue_lo >= 0.0 && hue_lo < 360.0 && hue_hi >= 0.0 && hue_hi < 360.0)) {
    throw Error(ErrorCode::kInvalidSpec, "hue bounds must lie in [0,360)");
  }
}

bool HsvThresholds::accepts(const Hsv& c) const {
  const bool hue_ok =
      hue_lo <= hue_hi ? (c.h >= hue_lo && c.h <= hue_hi) : (c.h >= hue_lo || c.h <= hue_hi);
  return hue_ok && c.s >= sat_min && c.v >= val_min;
}

std::size_t BinaryGrid::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

BinaryGrid mask(const Image& image, const HsvThresholds& thresholds) {
  thresholds.validate();
  BinaryGrid grid{image.width(), image.height(),
                  std::vector<std::uint8_t>(static_cast<std::size_t>(image.width()) * image.height())};
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const Rgb p = image.at(x, y);
      grid.cells[static_cast<std::size_t>(y) * image.width() + x] =
          thresholds.accepts(rgb_to_hsv(p.r, p.g, p.b)) ? 1 : 0;
    }
  }
  return grid;
}

std::vector<ComponentBox> connected_components(const BinaryGrid& grid, long min_area) {
  const int w = grid.width, h = grid.height;
  std::vector<std::uint8_t> seen(grid.cells.size(), 0);
  std::vector<int> stack;
  std::vector<ComponentBox> boxes;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const int start = y0 * w + x0;
      if (!grid.cells[start] || seen[start]) continue;
      ComponentBox box{x0, y0, x0, y0, 0, 0.0, 0.0};
      double sx = 0.0, sy = 0.0;
      seen[start] = 1;
      stack.assign(1, start);
      while (!stack.empty()) {
        const int idx = stack.back();
        stack.pop_back();
        const int x = idx % w, y = idx / w;
        ++box.area;
        sx += x;
        sy += y;
        box.x_min = std::min(box.x_min, x);
        box.x_max = std::max(box.x_max, x);
        box.y_min = std::min(box.y_min, y);
        box.y_max = std::max(box.y_max, y);
        const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
        for (const auto& n : nbr) {
          if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
          const int j = n[1] * w + n[0];
          if (grid.cells[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
      }
      if (box.area >= min_area) {
        box.cx = sx / static_cast<double>(box.area);
        box.cy = sy / static_cast<double>(box.area);
        boxes.push_back(box);
      }
    }
  }
  // Scan order discovers components by their top-left pixel, so a stable
  // sort keeps ties deterministic.
  std::stable_sort(boxes.begin(), boxes.end(),
                   [](const ComponentBox& a, const ComponentBox& b) { return a.area > b.area; });
  return boxes;
}

double measure_pixels(const Image& image, const MeasureOptions& options) {
  const auto boxes = connected_components(mask(image, options.thresholds), options.min_area);
  if (boxes.size() < 2) {
    throw Error(ErrorCode::kFewerThanTwoMarkers,
                "found " + std::to_string(boxes.size()) + " marker blob(s), need 2");
  }
  const ComponentBox& a = boxes[0];
  const ComponentBox& b = boxes[1];
  const double dx = b.cx - a.cx, dy = b.cy - a.cy;
  const double d = std::hypot(dx, dy);
  if (options.edge_mode == EdgeMode::kCentroid || d == 0.0) return d;
  const double ux = dx / d, uy = dy / d;
  return d + support(a, ux, uy) + support(b, ux, uy);
}

double measure_length(const Image& image, const MeasureOptions& options,
                      double meters_per_pixel) {
  if (!(meters_per_pixel > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "meters_per_pixel must be positive");
  }
  return measure_pixels(image, options) * meters_per_pixel;
}

CalibratedMeasurement average_length(std::span<const double> lengths) {
  if (lengths.size() != 3) {
    throw Error(ErrorCode::kWrongCount,
                "exactly three measurements required, got " + std::to_string(lengths.size()));
  }
  CalibratedMeasurement m;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(lengths[i] > 0.0)) {
      throw Error(ErrorCode::kNonPositiveLength, "measurement " + std::to_string(i) + " is not positive");
    }
    m.per_image_lengths[i] = lengths[i];
  }
  m.length = (lengths[0] + lengths[1] + lengths[2]) / 3.0;
  return m;
}

SynthImage synth_tool_image(int width, int height, const Marker& a, const Marker& b,
                            const SynthOptions& options) {
  check_marker(width, height, a);
  check_marker(width, height, b);
  for (const Marker& d : options.distractors) check_marker(width, height, d);
  if (rects_overlap(a, b)) {
    throw Error(ErrorCode::kOverlappingMarkers, "markers must be disjoint");
  }

  SynthImage out{Image(width, height, options.background), 0.0};
  if (options.noise_seed) {
    std::mt19937_64 rng(*options.noise_seed);
    std::uniform_int_distribution<int> jitter(-options.noise_amplitude, options.noise_amplitude);
    auto bump = [&](std::uint8_t c) {
      return static_cast<std::uint8_t>(std::clamp(static_cast<int>(c) + jitter(rng), 0, 255));
    };
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        const Rgb p = out.image.at(x, y);
        out.image.set(x, y, {bump(p.r), bump(p.g), bump(p.b)});
      }
  }
  if (options.draw_shaft) {
    const auto ca = rect_centroid(a), cb = rect_centroid(b);
    const double len = std::hypot(cb[0] - ca[0], cb[1] - ca[1]);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(ca[0] + t * (cb[0] - ca[0])));
      const int y = static_cast<int>(std::lround(ca[1] + t * (cb[1] - ca[1])));
      for (int oy = -1; oy <= 1; ++oy)
        for (int ox = -1; ox <= 1; ++ox) {
          const int px = x + ox, py = y + oy;
          if (px >= 0 && px < width && py >= 0 && py < height) {
            out.image.set(px, py, options.shaft_color);
          }
        }
    }
  }
  for (const Marker& d : options.distractors) fill_rect(out.image, d, options.marker_color);
  fill_rect(out.image, a, options.marker_color);
  fill_rect(out.image, b, options.marker_color);
  const auto ca = rect_centroid(a), cb = rect_centroid(b);
  out.ground_truth_px = std::hypot(cb[0] - ca[0], cb[1] - ca[1]);
  return out;
}

}  // namespace toolkin::vision
