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

#include "segkit/filtering.hpp"
#include "segkit/metrics.hpp"
#include "segkit/ref.hpp"
#include "segkit/tensor.hpp"
#include "testutil.hpp"

using namespace segkit;
using filtering::GuidedFilterParams;

namespace {

// two-region fixture: vertical color edge at `split`, clean mask = right side
struct TwoRegion {
  Image image;
  Mask clean;
};

TwoRegion make_two_region(int h, int w, int split, Rng& rng) {
  TwoRegion out;
  out.image = Image::zeros(h, w, 3);
  out.clean = Mask::zeros(h, w);
  const double left[3] = {0.2, 0.25, 0.3};
  const double right[3] = {0.75, 0.7, 0.8};
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const bool fg = c >= split;
      for (int ch = 0; ch < 3; ++ch) {
        double v = (fg ? right[ch] : left[ch]) + 0.03 * rng.normal();
        out.image.at(r, c, ch) = std::clamp(v, 0.0, 1.0);
      }
      out.clean.at(r, c) = fg ? 1.0 : 0.0;
    }
  return out;
}

// blur + spatially jitter the boundary of a mask
Mask jitter_mask(const Mask& clean, Rng& rng) {
  const int h = clean.height, w = clean.width;
  Mask out = Mask::zeros(h, w);
  const double phase = rng.uniform(0.0, 6.283185307179586);
  const double amp = rng.uniform(1.0, 2.5);
  for (int r = 0; r < h; ++r) {
    const int shift =
        static_cast<int>(std::lround(amp * std::sin(phase + 6.0 * r / h)));
    for (int c = 0; c < w; ++c) {
      const int cc = std::clamp(c + shift, 0, w - 1);
      out.at(r, c) = clean.at(r, cc);
    }
  }
  // separable 5-tap blur to soften the boundary
  Mask blurred = out;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double sum = 0.0;
      int count = 0;
      for (int d = -2; d <= 2; ++d) {
        const int cc = c + d;
        if (cc < 0 || cc >= w) continue;
        sum += out.at(r, cc);
        ++count;
      }
      blurred.at(r, c) = sum / count;
    }
  return blurred;
}

}  // namespace

TEST_CASE("integral_image: all-ones 3x3 has bottom-right 9") {
  const Grid s = filtering::integral_image(Mask::constant(3, 3, 1.0));
  CHECK(s.at(2, 2) == 9.0);
  CHECK(s.at(0, 0) == 1.0);
  CHECK(s.at(0, 2) == 3.0);
}

TEST_CASE("integral_image: zeros stay zeros") {
  const Grid s = filtering::integral_image(Mask::zeros(4, 5));
  for (double v : s.data) CHECK(v == 0.0);
}

TEST_CASE("integral_image: random 8x8 equals brute-force summation") {
  Rng rng(21);
  const Mask m = testutil::random_mask(8, 8, rng);
  const Grid fast = filtering::integral_image(m);
  const Grid naive = ref::integral_image_naive(m);
  for (std::size_t i = 0; i < fast.data.size(); ++i)
    CHECK(fast.data[i] == doctest::Approx(naive.data[i]).epsilon(1e-12));
}

TEST_CASE("box_filter: constant input gives constant output") {
  // power-of-two constants survive the integral-image route exactly
  for (const double c : {0.0, 0.25, 0.5, 1.0}) {
    const Mask out = filtering::box_filter(Mask::constant(6, 7, c), 2);
    for (double v : out.data) CHECK(v == c);
  }
  // arbitrary constants within floating-point rounding
  const Mask out = filtering::box_filter(Mask::constant(6, 7, 0.3), 2);
  for (double v : out.data) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("box_filter: centered impulse spreads as window means") {
  Mask m = Mask::zeros(5, 5);
  m.at(2, 2) = 1.0;
  const Mask out = filtering::box_filter(m, 1);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) {
      const bool near = std::abs(r - 2) <= 1 && std::abs(c - 2) <= 1;
      // all windows containing the impulse are interior 3x3 windows here
      CHECK(out.at(r, c) == doctest::Approx(near ? 1.0 / 9.0 : 0.0).epsilon(1e-15));
    }
}

TEST_CASE("box_filter: equals naive sliding windows on random inputs") {
  Rng rng(22);
  for (const int size : {16, 33, 64}) {
    for (const int radius : {1, 3, 7}) {
      const Mask m = testutil::random_mask(size, size, rng);
      const Mask fast = filtering::box_filter(m, radius);
      const Mask naive = ref::box_filter_naive(m, radius);
      CHECK(testutil::max_abs_diff(fast.data, naive.data) <= 1e-10);
    }
  }
}

TEST_CASE("guided_filter: constant guide reduces to a double box filter") {
  Rng rng(23);
  const Mask p = testutil::random_mask(10, 10, rng);
  Image guide = Image::zeros(10, 10, 1);
  for (double& v : guide.data) v = 0.5;
  GuidedFilterParams params{2, 1e-4};
  const Mask out = filtering::guided_filter(p, guide, params);
  const Mask twice = filtering::box_filter(filtering::box_filter(p, 2), 2);
  CHECK(testutil::max_abs_diff(out.data, twice.data) <= 1e-12);
}

TEST_CASE("guided_filter: self-guidance with tiny eps is near-identity") {
  Rng rng(24);
  const Image guide = testutil::random_image(12, 12, 1, rng);
  Mask p = Mask::zeros(12, 12);
  p.data = guide.data;
  GuidedFilterParams params{2, 1e-12};
  const Mask out = filtering::guided_filter(p, guide, params);
  double worst = 0.0;
  for (int r = 2; r < 10; ++r)
    for (int c = 2; c < 10; ++c)
      worst = std::max(worst, std::abs(out.at(r, c) - p.at(r, c)));
  CHECK(worst <= 1e-3);
}

TEST_CASE("guided_filter: matches the per-window brute-force oracle") {
  Rng rng(25);
  for (const int radius : {1, 2, 4}) {
    for (const double eps : {1e-4, 1e-2}) {
      const Mask p = testutil::random_mask(16, 16, rng);
      const Image guide = testutil::random_image(16, 16, 1, rng);
      const Mask fast =
          filtering::guided_filter(p, guide, GuidedFilterParams{radius, eps});
      const Mask naive = ref::guided_filter_naive(p, guide, radius, eps);
      CHECK(testutil::max_abs_diff(fast.data, naive.data) <= 1e-6);
    }
  }
}

TEST_CASE("guided_filter: preserves power-of-two constants exactly") {
  Rng rng(26);
  const Image guide = testutil::random_image(9, 9, 1, rng);
  for (const double c : {0.0, 0.25, 0.5, 1.0}) {
    const Mask out = filtering::guided_filter(Mask::constant(9, 9, c), guide,
                                              GuidedFilterParams{2, 1e-4});
    for (double v : out.data) CHECK(v == c);
  }
}

TEST_CASE("guided_filter: affine guide rescaling with matched eps is invariant") {
  Rng rng(27);
  const Mask p = testutil::random_mask(14, 14, rng);
  const Image guide = testutil::random_image(14, 14, 1, rng);
  const double alpha = 0.5, beta = 0.2;
  Image scaled = guide;
  for (double& v : scaled.data) v = alpha * v + beta;
  const double eps = 1e-3;
  const Mask a =
      filtering::guided_filter(p, guide, GuidedFilterParams{3, eps});
  const Mask b = filtering::guided_filter(
      p, scaled, GuidedFilterParams{3, alpha * alpha * eps});
  CHECK(testutil::max_abs_diff(a.data, b.data) <= 1e-8);
}

TEST_CASE("guided_filter: shape mismatch rejected") {
  const Mask p = Mask::zeros(4, 4);
  const Image guide = Image::zeros(4, 5, 1);
  CHECK_THROWS_AS(filtering::guided_filter(p, guide, GuidedFilterParams{}),
                  std::invalid_argument);
}

TEST_CASE("refine_mask: output stays within [0,1]") {
  Rng rng(28);
  const Mask p = testutil::random_mask(16, 16, rng);
  const Image rgb = testutil::random_image(16, 16, 3, rng);
  const Mask out = filtering::refine_mask(p, rgb, GuidedFilterParams{4, 1e-4});
  for (double v : out.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("refine_mask: constant image and mask stay constant") {
  Image rgb = Image::zeros(8, 8, 3);
  for (double& v : rgb.data) v = 0.5;
  const Mask out = filtering::refine_mask(Mask::constant(8, 8, 0.25), rgb,
                                          GuidedFilterParams{2, 1e-4});
  for (double v : out.data) CHECK(v == 0.25);
}

TEST_CASE("refine_mask: sharpens a blurred step against a step-edge guide") {
  const int h = 16, w = 32, split = 16;
  Image rgb = Image::zeros(h, w, 3);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch)
        rgb.at(r, c, ch) = c >= split ? 0.8 : 0.2;
  Mask blurred = Mask::zeros(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      blurred.at(r, c) =
          std::clamp(0.5 + (c - split + 0.5) / 8.0, 0.0, 1.0);  // wide ramp

  const Mask refined =
      filtering::refine_mask(blurred, rgb, GuidedFilterParams{4, 1e-4});

  auto max_adjacent_diff = [](const Mask& m) {
    double worst = 0.0;
    for (int r = 0; r < m.height; ++r)
      for (int c = 0; c + 1 < m.width; ++c)
        worst = std::max(worst, std::abs(m.at(r, c + 1) - m.at(r, c)));
    return worst;
  };
  CHECK(max_adjacent_diff(refined) > max_adjacent_diff(blurred));
}

TEST_CASE("refine_mask: improves IoU of a jittered-boundary mask") {
  Rng rng(29);
  const TwoRegion fixture = make_two_region(32, 32, 16, rng);
  const Mask jittered = jitter_mask(fixture.clean, rng);

  const Mask refined =
      filtering::refine_mask(jittered, fixture.image, GuidedFilterParams{4, 1e-4});

  const auto gt = metrics::binarize(fixture.clean, 0.5);
  const double before = metrics::iou(metrics::binarize(jittered, 0.5), gt);
  const double after = metrics::iou(metrics::binarize(refined, 0.5), gt);
  CHECK(after > before);
}
