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

#include "segkit/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace segkit::metrics {

namespace {

void check_same_shape(const BinaryMask& a, const BinaryMask& b,
                      const char* what) {
  detail::require(a.height == b.height && a.width == b.width, what);
}

// Union-find over pixel indices for the two-pass labeling.
struct DisjointSet {
  std::vector<int> parent;

  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

BinaryMask binarize(const Mask& m, double t) {
  detail::require(t >= 0.0 && t <= 1.0, "binarize: threshold must be in [0,1]");
  BinaryMask out = BinaryMask::zeros(m.height, m.width);
  const std::int64_t n = static_cast<std::int64_t>(m.data.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i)
    out.bits[static_cast<std::size_t>(i)] =
        m.data[static_cast<std::size_t>(i)] > t ? 1 : 0;
  return out;
}

double pixel_accuracy(const BinaryMask& pred, const BinaryMask& gt) {
  check_same_shape(pred, gt, "pixel_accuracy: shape mismatch");
  std::int64_t match = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i)
    match += pred.bits[i] == gt.bits[i];
  return static_cast<double>(match) / static_cast<double>(pred.bits.size());
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  check_same_shape(pred, gt, "iou: shape mismatch");
  std::int64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.bits.size(); ++i) {
    inter += pred.bits[i] & gt.bits[i];
    uni += pred.bits[i] | gt.bits[i];
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

FBetaResult max_f_beta(const Mask& pred, const BinaryMask& gt, double beta_sq) {
  detail::require(pred.height == gt.height && pred.width == gt.width,
                  "max_f_beta: shape mismatch");
  FBetaResult out;
  out.curve.assign(255, 0.0);

  std::int64_t gt_pos = 0;
  for (std::uint8_t b : gt.bits) gt_pos += b;
  if (gt_pos == 0) {
    out.defined = false;
    return out;
  }

  const std::int64_t n = static_cast<std::int64_t>(pred.data.size());
#pragma omp parallel for schedule(static)
  for (int k = 0; k < 255; ++k) {
    const double t = k / 255.0;
    std::int64_t tp = 0, fp = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      if (pred.data[static_cast<std::size_t>(i)] > t) {
        if (gt.bits[static_cast<std::size_t>(i)])
          ++tp;
        else
          ++fp;
      }
    }
    double f = 0.0;
    if (tp + fp > 0) {
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      const double recall = static_cast<double>(tp) / static_cast<double>(gt_pos);
      const double denom = beta_sq * precision + recall;
      if (denom > 0.0)
        f = (1.0 + beta_sq) * precision * recall / denom;
    }
    out.curve[static_cast<std::size_t>(k)] = f;
  }
  out.max_f = *std::max_element(out.curve.begin(), out.curve.end());
  return out;
}

Components connected_components(const BinaryMask& m) {
  const int h = m.height;
  const int w = m.width;
  Components out;
  out.labels.assign(m.bits.size(), -1);
  if (m.bits.empty()) return out;

  DisjointSet ds(m.bits.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!m.at(r, c)) continue;
      const int i = r * w + c;
      // scan-order neighbors: W, NW, N, NE (8-connectivity)
      if (c > 0 && m.at(r, c - 1)) ds.unite(i, i - 1);
      if (r > 0) {
        if (c > 0 && m.at(r - 1, c - 1)) ds.unite(i, i - w - 1);
        if (m.at(r - 1, c)) ds.unite(i, i - w);
        if (c + 1 < w && m.at(r - 1, c + 1)) ds.unite(i, i - w + 1);
      }
    }
  }

  // assign labels in row-major order of each component's first pixel
  std::vector<int> root_label(m.bits.size(), -1);
  int next = 0;
  for (int i = 0; i < h * w; ++i) {
    if (!m.bits[static_cast<std::size_t>(i)]) continue;
    const int root = ds.find(i);
    if (root_label[static_cast<std::size_t>(root)] < 0)
      root_label[static_cast<std::size_t>(root)] = next++;
    out.labels[static_cast<std::size_t>(i)] = root_label[static_cast<std::size_t>(root)];
  }
  out.count = next;
  return out;
}

std::optional<BBox> largest_bbox_component(const BinaryMask& m) {
  const Components comps = connected_components(m);
  if (comps.count == 0) return std::nullopt;

  std::vector<BBox> boxes(static_cast<std::size_t>(comps.count),
                          BBox{m.height, m.width, -1, -1});
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const int label = comps.labels[static_cast<std::size_t>(r) * m.width + c];
      if (label < 0) continue;
      BBox& box = boxes[static_cast<std::size_t>(label)];
      box.top = std::min(box.top, r);
      box.left = std::min(box.left, c);
      box.bottom = std::max(box.bottom, r);
      box.right = std::max(box.right, c);
    }
  }
  // labels are already ordered by first row-major pixel, so "first wins"
  // tie-breaking is the strict > below
  std::size_t best = 0;
  for (std::size_t i = 1; i < boxes.size(); ++i)
    if (boxes[i].area() > boxes[best].area()) best = i;
  return boxes[best];
}

double bbox_iou(const BBox& a, const BBox& b) {
  const int it = std::max(a.top, b.top);
  const int il = std::max(a.left, b.left);
  const int ib = std::min(a.bottom, b.bottom);
  const int ir = std::min(a.right, b.right);
  const long long ih = ib - it + 1;
  const long long iw = ir - il + 1;
  if (ih <= 0 || iw <= 0) return 0.0;
  const long long inter = ih * iw;
  const long long uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double corloc(const std::vector<Mask>& preds,
              const std::vector<std::vector<BBox>>& gt_boxes, double t_bin) {
  detail::require(preds.size() == gt_boxes.size(),
                  "corloc: prediction/box lists must align");
  detail::require(!preds.empty(), "corloc: empty image list");
  int hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto box = largest_bbox_component(binarize(preds[i], t_bin));
    if (!box) continue;  // no prediction counts as a localization failure
    for (const BBox& gt : gt_boxes[i]) {
      if (bbox_iou(*box, gt) >= 0.5) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

SaliencyReport saliency_report(const Mask& pred, const BinaryMask& gt,
                               double t_bin, double beta_sq) {
  SaliencyReport report;
  const BinaryMask pred_bin = binarize(pred, t_bin);
  report.acc = pixel_accuracy(pred_bin, gt);
  report.iou = iou(pred_bin, gt);
  FBetaResult f = max_f_beta(pred, gt, beta_sq);
  report.max_f_beta = f.max_f;
  report.curve = std::move(f.curve);
  report.f_beta_defined = f.defined;
  return report;
}

}  // namespace segkit::metrics
