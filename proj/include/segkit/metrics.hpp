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

#include <cstdint>
#include <optional>
#include <vector>

#include "segkit/types.hpp"

namespace segkit::metrics {

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  static BinaryMask zeros(int h, int w) {
    BinaryMask m;
    m.height = h;
    m.width = w;
    m.bits.assign(static_cast<std::size_t>(h) * w, 0);
    return m;
  }

  std::uint8_t& at(int r, int c) { return bits[static_cast<std::size_t>(r) * width + c]; }
  std::uint8_t at(int r, int c) const { return bits[static_cast<std::size_t>(r) * width + c]; }
};

/// Axis-aligned box with inclusive pixel coordinates.
struct BBox {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;

  long long area() const {
    return static_cast<long long>(bottom - top + 1) * (right - left + 1);
  }
  bool operator==(const BBox&) const = default;
};

/// 1 where m > t (strict).
BinaryMask binarize(const Mask& m, double t);

/// Fraction of matching pixels.
double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt);

/// Intersection over union; 1.0 when both masks are empty.
double iou(const BinaryMask& pred, const BinaryMask& gt);

struct FBetaResult {
  double max_f = 0.0;
  std::vector<double> curve;  // F at thresholds k/255, k = 0..254
  bool defined = true;        // false when gt is empty (recall undefined)
};

/// Max over 255 uniform thresholds of F_beta(precision, recall) against gt.
FBetaResult max_f_beta(const Mask& pred, const BinaryMask& gt,
                       double beta_sq = 0.3);

struct Components {
  int count = 0;
  /// Per-pixel label, -1 for background; labels are ordered by each
  /// component's first pixel in row-major order.
  std::vector<int> labels;
};

/// 8-connectivity labeling.
Components connected_components(const BinaryMask& m);

/// Bounding box of the component whose box area is largest; ties go to the
/// component appearing first in row-major order. Empty masks give nullopt.
std::optional<BBox> largest_bbox_component(const BinaryMask& m);

/// Rectangle IoU with inclusive coordinates.
double bbox_iou(const BBox& a, const BBox& b);

/// Fraction of images whose predicted box (from the largest-bbox component
/// of the thresholded mask) overlaps some ground-truth box with IoU >= 0.5.
/// Empty predictions count as failures.
double corloc(const std::vector<Mask>& preds,
              const std::vector<std::vector<BBox>>& gt_boxes, double t_bin = 0.5);

struct SaliencyReport {
  double acc = 0.0;
  double iou = 0.0;
  double max_f_beta = 0.0;
  std::vector<double> curve;
  bool f_beta_defined = true;
};

SaliencyReport saliency_report(const Mask& pred, const BinaryMask& gt,
                               double t_bin = 0.5, double beta_sq = 0.3);

}  // namespace segkit::metrics
