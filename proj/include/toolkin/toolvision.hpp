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

// Tool-length measurement from photographs of a tool whose gripped end and
// tip carry orange markers: HSV masking, 4-connected blob labeling, and the
// distance between the two largest blobs scaled to meters.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace toolkin::vision {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Row-major 8-bit RGB image.
class Image {
 public:
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  std::span<const std::uint8_t> bytes() const { return pixels_; }
  std::span<std::uint8_t> bytes() { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// Decodes binary PPM (P6, maxval 255). Header comments and arbitrary
/// whitespace are accepted.
Image parse_ppm(std::span<const std::uint8_t> data);
/// Canonical encoding: "P6\n<w> <h>\n255\n" followed by the pixel bytes.
std::vector<std::uint8_t> write_ppm(const Image& image);

Image read_ppm_file(const std::filesystem::path& path);
void write_ppm_file(const std::filesystem::path& path, const Image& image);

struct Hsv {
  double h = 0;  // degrees, [0, 360)
  double s = 0;  // [0, 1]
  double v = 0;  // [0, 1]
};

/// Hexcone conversion. Gray pixels report hue 0.
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

struct HsvThresholds {
  double hue_lo = 5.0;   // degrees; hue_lo > hue_hi wraps through 0
  double hue_hi = 45.0;
  double sat_min = 0.5;
  double val_min = 0.4;

  void validate() const;  // throws kInvalidSpec
  bool accepts(const Hsv& c) const;
};

struct BinaryGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // 0 or 1, row-major

  bool at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

BinaryGrid mask(const Image& image, const HsvThresholds& thresholds);

struct ComponentBox {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  long area = 0;
  double cx = 0, cy = 0;  // centroid of member pixels
};

/// 4-connected components with area >= min_area, largest first.
std::vector<ComponentBox> connected_components(const BinaryGrid& grid, long min_area);

enum class EdgeMode {
  kCentroid,  // centroid to centroid
  kOuter,     // outer box edges along the line joining the centroids
};

struct MeasureOptions {
  HsvThresholds thresholds;
  long min_area = 25;
  EdgeMode edge_mode = EdgeMode::kCentroid;
};

/// Pixel distance between the two largest marker blobs. Throws
/// kFewerThanTwoMarkers when fewer than two blobs survive the area filter.
double measure_pixels(const Image& image, const MeasureOptions& options);

/// measure_pixels scaled by meters_per_pixel (> 0).
double measure_length(const Image& image, const MeasureOptions& options,
                      double meters_per_pixel);

struct CalibratedMeasurement {
  double length = 0;
  std::array<double, 3> per_image_lengths{};
};

/// Mean of exactly three positive per-view lengths.
CalibratedMeasurement average_length(std::span<const double> lengths);

/// Axis-aligned rectangle centred on (cx, cy); covers width×height pixels.
struct Marker {
  int cx = 0;
  int cy = 0;
  int width = 10;
  int height = 10;
};

struct SynthOptions {
  Rgb background{70, 80, 90};
  Rgb marker_color{255, 140, 0};
  Rgb shaft_color{40, 40, 40};
  bool draw_shaft = true;
  std::optional<std::uint64_t> noise_seed;  // background jitter stays below the mask thresholds
  int noise_amplitude = 12;
  std::vector<Marker> distractors;  // extra orange blobs
};

struct SynthImage {
  Image image;
  double ground_truth_px = 0;  // distance between the two marker centroids
};

/// Throws kOutOfBounds / kOverlappingMarkers.
SynthImage synth_tool_image(int width, int height, const Marker& a, const Marker& b,
                            const SynthOptions& options = {});

}  // namespace toolkin::vision
