// Copyright 2026 The segkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace segkit {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed or inconsistent input data (files, shapes, pairings).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, eigensolver breakdown, degenerate systems.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline void require_data(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

}  // namespace detail

/// H x W x C raster with values in [0,1], row-major, channel-interleaved.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  static Image zeros(int h, int w, int c) {
    detail::require(h >= 1 && w >= 1 && (c == 1 || c == 3),
                    "Image: dims must be positive with 1 or 3 channels");
    Image img;
    img.height = h;
    img.width = w;
    img.channels = c;
    img.data.assign(static_cast<std::size_t>(h) * w * c, 0.0);
    return img;
  }

  double& at(int r, int c, int ch) {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  double at(int r, int c, int ch) const {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * width;
  }

  void validate() const {
    detail::require(channels == 1 || channels == 3,
                    "Image: channels must be 1 or 3");
    detail::require(data.size() == static_cast<std::size_t>(height) * width * channels,
                    "Image: data length mismatch");
    for (double v : data)
      detail::require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
                      "Image: values must be finite and within [0,1]");
  }
};

/// H x W real-valued map in [0,1], row-major.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  static Mask zeros(int h, int w) { return constant(h, w, 0.0); }

  static Mask constant(int h, int w, double v) {
    detail::require(h >= 1 && w >= 1, "Mask: dims must be positive");
    Mask m;
    m.height = h;
    m.width = w;
    m.data.assign(static_cast<std::size_t>(h) * w, v);
    return m;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }

  void validate() const {
    detail::require(data.size() == static_cast<std::size_t>(height) * width,
                    "Mask: data length mismatch");
    for (double v : data)
      detail::require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
                      "Mask: values must be finite and within [0,1]");
  }
};

/// Low-resolution mask living on the feature grid, values in [0,1].
struct CoarseMask {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<double> data;

  static CoarseMask constant(int h, int w, double v) {
    detail::require(h >= 1 && w >= 1, "CoarseMask: dims must be positive");
    CoarseMask m;
    m.grid_h = h;
    m.grid_w = w;
    m.data.assign(static_cast<std::size_t>(h) * w, v);
    return m;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * grid_w + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * grid_w + c]; }

  void validate() const {
    detail::require(data.size() == static_cast<std::size_t>(grid_h) * grid_w,
                    "CoarseMask: data length mismatch");
    for (double v : data)
      detail::require(std::isfinite(v) && v >= 0.0 && v <= 1.0,
                      "CoarseMask: values must be finite and within [0,1]");
  }
};

/// h' x w' x D per-patch feature grid, row-major, channel-interleaved.
struct FeatureMap {
  int grid_h = 0;
  int grid_w = 0;
  int dim = 0;
  std::vector<double> data;

  static FeatureMap zeros(int h, int w, int d) {
    detail::require(h >= 1 && w >= 1 && d >= 1,
                    "FeatureMap: dims must be positive");
    FeatureMap f;
    f.grid_h = h;
    f.grid_w = w;
    f.dim = d;
    f.data.assign(static_cast<std::size_t>(h) * w * d, 0.0);
    return f;
  }

  double& at(int r, int c, int d) {
    return data[(static_cast<std::size_t>(r) * grid_w + c) * dim + d];
  }
  double at(int r, int c, int d) const {
    return data[(static_cast<std::size_t>(r) * grid_w + c) * dim + d];
  }

  int node_count() const { return grid_h * grid_w; }

  void validate() const {
    detail::require(data.size() == static_cast<std::size_t>(grid_h) * grid_w * dim,
                    "FeatureMap: data length mismatch");
    for (double v : data)
      detail::require(std::isfinite(v), "FeatureMap: values must be finite");
  }
};

/// Integer crop rectangle; must lie fully inside its host raster.
struct CropRect {
  int top = 0;
  int left = 0;
  int height = 0;
  int width = 0;

  bool inside(int host_h, int host_w) const {
    return top >= 0 && left >= 0 && height >= 1 && width >= 1 &&
           top + height <= host_h && left + width <= host_w;
  }
  bool operator==(const CropRect&) const = default;
};

/// Plain 2-d array with no range invariant. Holds integral images,
/// gradients and other intermediate fields.
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  static Grid zeros(int h, int w) {
    Grid g;
    g.height = h;
    g.width = w;
    g.data.assign(static_cast<std::size_t>(h) * w, 0.0);
    return g;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

}  // namespace segkit
