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

#include "segkit/filtering.hpp"

#include <algorithm>
#include <cmath>

#include "segkit/tensor.hpp"

namespace segkit::filtering {

namespace {

// Summed-area table with a zero top row / left column of padding, so window
// sums need no branching.
Grid padded_integral(const double* x, int h, int w) {
  Grid s = Grid::zeros(h + 1, w + 1);
  // row prefix sums, independent rows
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    double acc = 0.0;
    for (int c = 0; c < w; ++c) {
      acc += x[static_cast<std::size_t>(r) * w + c];
      s.at(r + 1, c + 1) = acc;
    }
  }
  // column prefix sums, independent columns
#pragma omp parallel for schedule(static)
  for (int c = 1; c <= w; ++c) {
    double acc = 0.0;
    for (int r = 1; r <= h; ++r) {
      acc += s.at(r, c);
      s.at(r, c) = acc;
    }
  }
  return s;
}

inline double window_sum(const Grid& s, int r0, int c0, int r1, int c1) {
  // inclusive [r0,r1] x [c0,c1] on the unpadded grid
  return s.at(r1 + 1, c1 + 1) - s.at(r0, c1 + 1) - s.at(r1 + 1, c0) +
         s.at(r0, c0);
}

// Window means of an arbitrary field, border-clipped.
Grid box_mean(const double* x, int h, int w, int radius) {
  const Grid s = padded_integral(x, h, w);
  Grid out = Grid::zeros(h, w);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    const int r0 = std::max(0, r - radius);
    const int r1 = std::min(h - 1, r + radius);
    for (int c = 0; c < w; ++c) {
      const int c0 = std::max(0, c - radius);
      const int c1 = std::min(w - 1, c + radius);
      const double area = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
      out.at(r, c) = window_sum(s, r0, c0, r1, c1) / area;
    }
  }
  return out;
}

}  // namespace

Grid integral_image(const Mask& x) {
  const Grid s = padded_integral(x.data.data(), x.height, x.width);
  Grid out = Grid::zeros(x.height, x.width);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c) out.at(r, c) = s.at(r + 1, c + 1);
  return out;
}

Mask box_filter(const Mask& x, int radius) {
  detail::require(radius >= 1, "box_filter: radius must be >= 1");
  Grid means = box_mean(x.data.data(), x.height, x.width, radius);
  Mask out;
  out.height = x.height;
  out.width = x.width;
  out.data = std::move(means.data);
  return out;
}

Mask guided_filter(const Mask& p, const Image& guide,
                   const GuidedFilterParams& params) {
  params.validate();
  detail::require(guide.channels == 1, "guided_filter: guide must be 1-channel");
  detail::require(p.height == guide.height && p.width == guide.width,
                  "guided_filter: mask/guide shape mismatch");

  const int h = p.height;
  const int w = p.width;
  const std::int64_t n = static_cast<std::int64_t>(h) * w;
  const int r = params.radius;

  std::vector<double> gg(static_cast<std::size_t>(n));
  std::vector<double> gp(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double g = guide.data[static_cast<std::size_t>(i)];
    gg[static_cast<std::size_t>(i)] = g * g;
    gp[static_cast<std::size_t>(i)] = g * p.data[static_cast<std::size_t>(i)];
  }

  const Grid mean_g = box_mean(guide.data.data(), h, w, r);
  const Grid mean_p = box_mean(p.data.data(), h, w, r);
  const Grid corr_gg = box_mean(gg.data(), h, w, r);
  const Grid corr_gp = box_mean(gp.data(), h, w, r);

  std::vector<double> a(static_cast<std::size_t>(n));
  std::vector<double> b(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double var_g = corr_gg.data[k] - mean_g.data[k] * mean_g.data[k];
    const double cov_gp = corr_gp.data[k] - mean_g.data[k] * mean_p.data[k];
    a[k] = cov_gp / (var_g + params.eps);
    b[k] = mean_p.data[k] - a[k] * mean_g.data[k];
  }

  const Grid mean_a = box_mean(a.data(), h, w, r);
  const Grid mean_b = box_mean(b.data(), h, w, r);

  Mask out = Mask::zeros(h, w);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double q = mean_a.data[k] * guide.data[k] + mean_b.data[k];
    out.data[k] = q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
  }
  return out;
}

Mask refine_mask(const Mask& p, const Image& rgb,
                 const GuidedFilterParams& params) {
  detail::require(p.height == rgb.height && p.width == rgb.width,
                  "refine_mask: mask/image shape mismatch");
  return guided_filter(p, tensor::to_grayscale(rgb), params);
}

}  // namespace segkit::filtering
