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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "segkit/metrics.hpp"
#include "segkit/ref.hpp"
#include "testutil.hpp"

using namespace segkit;
using metrics::BBox;
using metrics::BinaryMask;

namespace {

BinaryMask from_bits(int h, int w, std::initializer_list<int> bits) {
  BinaryMask m = BinaryMask::zeros(h, w);
  int i = 0;
  for (int b : bits) m.bits[static_cast<std::size_t>(i++)] = static_cast<std::uint8_t>(b);
  return m;
}

Mask from_values(int h, int w, std::initializer_list<double> values) {
  Mask m = Mask::zeros(h, w);
  int i = 0;
  for (double v : values) m.data[static_cast<std::size_t>(i++)] = v;
  return m;
}

// centered box mask used by the corloc fixture
Mask box_mask(int h, int w, const BBox& box) {
  Mask m = Mask::zeros(h, w);
  for (int r = box.top; r <= box.bottom; ++r)
    for (int c = box.left; c <= box.right; ++c) m.at(r, c) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("binarize: strict threshold semantics") {
  const Mask constant = Mask::constant(3, 3, 0.6);
  const BinaryMask over = metrics::binarize(constant, 0.5);
  for (auto b : over.bits) CHECK(b == 1);
  const BinaryMask at_one = metrics::binarize(Mask::constant(3, 3, 1.0), 1.0);
  for (auto b : at_one.bits) CHECK(b == 0);  // strict inequality
}

TEST_CASE("binarize: agrees with per-pixel comparison") {
  Rng rng(70);
  const Mask m = testutil::random_mask(6, 6, rng);
  const BinaryMask b = metrics::binarize(m, 0.37);
  for (std::size_t i = 0; i < m.data.size(); ++i)
    CHECK(b.bits[i] == (m.data[i] > 0.37 ? 1 : 0));
}

TEST_CASE("pixel_accuracy: identical, inverted, and mixed fixtures") {
  const BinaryMask gt = from_bits(4, 4, {1, 1, 0, 0,
                                         1, 1, 0, 0,
                                         0, 0, 1, 1,
                                         0, 0, 1, 1});
  CHECK(metrics::pixel_accuracy(gt, gt) == 1.0);

  BinaryMask inverted = gt;
  for (auto& b : inverted.bits) b = static_cast<std::uint8_t>(b == 0);
  CHECK(metrics::pixel_accuracy(inverted, gt) == 0.0);

  // exactly 3 mismatches -> 13/16
  BinaryMask pred = gt;
  pred.bits[0] ^= 1;
  pred.bits[5] ^= 1;
  pred.bits[10] ^= 1;
  CHECK(metrics::pixel_accuracy(pred, gt) == doctest::Approx(13.0 / 16.0));
  CHECK(metrics::pixel_accuracy(pred, gt) ==
        metrics::pixel_accuracy(gt, pred));
}

TEST_CASE("iou: identical, disjoint, and the 2/5 fixture") {
  const BinaryMask a = from_bits(2, 2, {1, 1, 0, 0});
  const BinaryMask b = from_bits(2, 2, {0, 0, 1, 1});
  CHECK(metrics::iou(a, a) == 1.0);
  CHECK(metrics::iou(a, b) == 0.0);

  // |intersection| = 2, |union| = 5
  const BinaryMask pred = from_bits(4, 4, {1, 1, 1, 0,
                                           0, 0, 0, 0,
                                           0, 0, 0, 0,
                                           0, 0, 0, 0});
  const BinaryMask gt = from_bits(4, 4, {0, 1, 1, 1,
                                         1, 0, 0, 0,
                                         0, 0, 0, 0,
                                         0, 0, 0, 0});
  CHECK(metrics::iou(pred, gt) == doctest::Approx(0.4));
  CHECK(metrics::iou(pred, gt) == metrics::iou(gt, pred));
}

TEST_CASE("iou: both empty masks define IoU = 1") {
  const BinaryMask e = BinaryMask::zeros(3, 3);
  CHECK(metrics::iou(e, e) == 1.0);
}

TEST_CASE("max_f_beta: binary prediction equal to gt scores 1") {
  const BinaryMask gt = from_bits(3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Mask pred = Mask::zeros(3, 3);
  for (std::size_t i = 0; i < gt.bits.size(); ++i)
    pred.data[i] = gt.bits[i] ? 1.0 : 0.0;
  const auto f = metrics::max_f_beta(pred, gt, 0.3);
  CHECK(f.max_f == doctest::Approx(1.0).epsilon(1e-12));
  // every threshold keeps the same positive set here, so the whole curve is 1
  for (double v : f.curve) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("max_f_beta: all-zero prediction scores 0") {
  const BinaryMask gt = from_bits(2, 2, {1, 0, 0, 1});
  const auto f = metrics::max_f_beta(Mask::zeros(2, 2), gt, 0.3);
  CHECK(f.max_f == 0.0);
}

TEST_CASE("max_f_beta: graded 4x4 fixture matches the exhaustive oracle") {
  const Mask pred = from_values(4, 4, {0.1, 0.4, 0.6, 0.9,
                                       0.2, 0.5, 0.7, 0.8,
                                       0.0, 0.3, 0.95, 0.85,
                                       0.05, 0.45, 0.65, 0.75});
  const BinaryMask gt = from_bits(4, 4, {0, 0, 1, 1,
                                         0, 0, 1, 1,
                                         0, 0, 1, 1,
                                         0, 1, 1, 1});
  const auto f = metrics::max_f_beta(pred, gt, 0.3);
  // frozen from the exhaustive threshold sweep: best split keeps the 8
  // pixels above 128/255, P = 1, R = 8/9, F = 1.3*(8/9)/(0.3 + 8/9) = 104/107
  CHECK(f.max_f == doctest::Approx(104.0 / 107.0).epsilon(1e-12));
  CHECK(f.max_f ==
        doctest::Approx(ref::max_f_beta_exhaustive(pred, gt, 0.3)).epsilon(1e-12));
  CHECK(f.curve.size() == 255);
  CHECK(f.max_f == *std::max_element(f.curve.begin(), f.curve.end()));
}

TEST_CASE("max_f_beta: empty gt reported as undefined") {
  Rng rng(71);
  const Mask pred = testutil::random_mask(4, 4, rng);
  const auto f = metrics::max_f_beta(pred, BinaryMask::zeros(4, 4), 0.3);
  CHECK_FALSE(f.defined);
}

TEST_CASE("max_f_beta: invariant under bin-preserving monotone rescale") {
  Rng rng(72);
  Mask pred = Mask::zeros(8, 8);
  for (int i = 0; i < 64; ++i) {
    const int k = static_cast<int>(rng.uniform_int(0, 254));
    pred.data[static_cast<std::size_t>(i)] = (k + 0.5) / 255.0;  // bin centers
  }
  const BinaryMask gt =
      metrics::binarize(testutil::random_mask(8, 8, rng), 0.5);
  if (std::count(gt.bits.begin(), gt.bits.end(), 1) == 0) return;

  Mask rescaled = pred;
  for (double& v : rescaled.data)
    v += 0.001 * std::sin(7.0 * v);  // monotone, stays inside each bin
  const auto a = metrics::max_f_beta(pred, gt, 0.3);
  const auto b = metrics::max_f_beta(rescaled, gt, 0.3);
  CHECK(a.curve == b.curve);
}

TEST_CASE("connected_components: diagonal pixels join under 8-connectivity") {
  const BinaryMask m = from_bits(2, 2, {1, 0, 0, 1});
  const auto comps = metrics::connected_components(m);
  CHECK(comps.count == 1);
}

TEST_CASE("connected_components: empty mask has zero components") {
  CHECK(metrics::connected_components(BinaryMask::zeros(4, 4)).count == 0);
}

TEST_CASE("connected_components: random masks equal the flood-fill oracle") {
  Rng rng(73);
  for (int trial = 0; trial < 10; ++trial) {
    const BinaryMask m =
        metrics::binarize(testutil::random_mask(16, 16, rng), 0.6);
    const auto fast = metrics::connected_components(m);
    const auto flood = ref::connected_components_flood(m);
    CHECK(fast.count == flood.count);
    // both order labels by first row-major pixel, so labels must agree
    CHECK(fast.labels == flood.labels);
  }
}

TEST_CASE("connected_components: labels cover exactly the foreground") {
  Rng rng(74);
  const BinaryMask m =
      metrics::binarize(testutil::random_mask(12, 12, rng), 0.5);
  const auto comps = metrics::connected_components(m);
  for (std::size_t i = 0; i < m.bits.size(); ++i) {
    if (m.bits[i])
      CHECK(comps.labels[i] >= 0);
    else
      CHECK(comps.labels[i] == -1);
  }
}

TEST_CASE("largest_bbox_component: single component tight box") {
  BinaryMask m = BinaryMask::zeros(6, 6);
  m.at(1, 2) = m.at(2, 2) = m.at(2, 3) = 1;
  const auto box = metrics::largest_bbox_component(m);
  REQUIRE(box.has_value());
  CHECK(*box == BBox{1, 2, 2, 3});
}

TEST_CASE("largest_bbox_component: strip beats square on box area") {
  BinaryMask m = BinaryMask::zeros(8, 8);
  for (int r = 0; r < 5; ++r) m.at(r, 0) = 1;  // 5x1 strip, box area 5
  m.at(6, 5) = m.at(6, 6) = m.at(7, 5) = m.at(7, 6) = 1;  // 2x2, box area 4
  const auto box = metrics::largest_bbox_component(m);
  REQUIRE(box.has_value());
  CHECK(*box == BBox{0, 0, 4, 0});
}

TEST_CASE("largest_bbox_component: ties go to the earlier row-major component") {
  BinaryMask m = BinaryMask::zeros(6, 10);
  m.at(2, 6) = m.at(2, 7) = m.at(3, 6) = m.at(3, 7) = 1;  // first in row-major
  m.at(4, 1) = m.at(4, 2) = m.at(5, 1) = m.at(5, 2) = 1;
  const auto box = metrics::largest_bbox_component(m);
  REQUIRE(box.has_value());
  CHECK(*box == BBox{2, 6, 3, 7});
}

TEST_CASE("largest_bbox_component: empty mask yields no prediction") {
  CHECK_FALSE(metrics::largest_bbox_component(BinaryMask::zeros(4, 4)).has_value());
}

TEST_CASE("bbox_iou: identity, disjoint, and the 1/7 fixture") {
  const BBox a{0, 0, 1, 1};
  CHECK(metrics::bbox_iou(a, a) == 1.0);
  CHECK(metrics::bbox_iou(a, BBox{5, 5, 6, 6}) == 0.0);
  CHECK(metrics::bbox_iou(a, BBox{1, 1, 2, 2}) == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("corloc: exact box predictions give 1, empty predictions give 0") {
  std::vector<Mask> preds;
  std::vector<std::vector<BBox>> gt;
  for (int i = 0; i < 4; ++i) {
    const BBox box{2, 3, 8, 9};
    preds.push_back(box_mask(16, 16, box));
    gt.push_back({box});
  }
  CHECK(metrics::corloc(preds, gt, 0.5) == 1.0);

  std::vector<Mask> empty(4, Mask::zeros(16, 16));
  CHECK(metrics::corloc(empty, gt, 0.5) == 0.0);
}

TEST_CASE("corloc: crafted 10-image fixture scores 0.7") {
  // 7 hits: exact or near-exact boxes; 3 misses: offset or empty predictions
  std::vector<Mask> preds;
  std::vector<std::vector<BBox>> gt;
  const BBox target{4, 4, 11, 11};  // 8x8 box
  for (int i = 0; i < 7; ++i) {
    preds.push_back(box_mask(24, 24, target));
    gt.push_back({target});
  }
  // miss: box shifted far away
  preds.push_back(box_mask(24, 24, BBox{16, 16, 19, 19}));
  gt.push_back({target});
  // miss: empty prediction
  preds.push_back(Mask::zeros(24, 24));
  gt.push_back({target});
  // miss: sliver overlap, IoU below 0.5
  preds.push_back(box_mask(24, 24, BBox{10, 10, 17, 17}));
  gt.push_back({target});
  CHECK(metrics::corloc(preds, gt, 0.5) == doctest::Approx(0.7));
}

TEST_CASE("corloc: multi-box images hit if any gt box matches") {
  std::vector<Mask> preds{box_mask(16, 16, BBox{0, 0, 7, 7})};
  std::vector<std::vector<BBox>> gt{{BBox{9, 9, 15, 15}, BBox{0, 0, 7, 7}}};
  CHECK(metrics::corloc(preds, gt, 0.5) == 1.0);
}

TEST_CASE("corloc: invariant to permuting the image order") {
  Rng rng(75);
  std::vector<Mask> preds;
  std::vector<std::vector<BBox>> gt;
  for (int i = 0; i < 6; ++i) {
    const int off = static_cast<int>(rng.uniform_int(0, 6));
    preds.push_back(box_mask(20, 20, BBox{off, off, off + 6, off + 6}));
    gt.push_back({BBox{2, 2, 9, 9}});
  }
  const double base = metrics::corloc(preds, gt, 0.5);
  std::reverse(preds.begin(), preds.end());
  std::reverse(gt.begin(), gt.end());
  CHECK(metrics::corloc(preds, gt, 0.5) == base);
}

TEST_CASE("saliency_report: metrics stay within [0,1]") {
  Rng rng(76);
  for (int trial = 0; trial < 5; ++trial) {
    const Mask pred = testutil::random_mask(10, 10, rng);
    const BinaryMask gt =
        metrics::binarize(testutil::random_mask(10, 10, rng), 0.4);
    const auto report = metrics::saliency_report(pred, gt);
    CHECK(report.acc >= 0.0);
    CHECK(report.acc <= 1.0);
    CHECK(report.iou >= 0.0);
    CHECK(report.iou <= 1.0);
    if (report.f_beta_defined) {
      CHECK(report.max_f_beta >= 0.0);
      CHECK(report.max_f_beta <= 1.0);
    }
  }
}
