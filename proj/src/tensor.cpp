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

#include "segkit/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace segkit::tensor {

namespace {

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Linear interpolation clamped to the operand range, so resampled values can
// never leave [min(a,b), max(a,b)] even under rounding.
inline double lerp(double a, double b, double t) {
  const double v = a + t * (b - a);
  const double lo = a < b ? a : b;
  const double hi = a < b ? b : a;
  return v < lo ? lo : (v > hi ? hi : v);
}

struct Tap {
  int i0, i1;
  double t;
};

inline Tap bilinear_tap(int out_i, int out_n, int in_n) {
  const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
  const double s = (out_i + 0.5) * scale - 0.5;
  const double f = std::floor(s);
  Tap tap;
  tap.i0 = clamp_index(static_cast<int>(f), in_n);
  tap.i1 = clamp_index(static_cast<int>(f) + 1, in_n);
  tap.t = s - f;
  return tap;
}

inline int nearest_tap(int out_i, int out_n, int in_n) {
  const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
  const int i = static_cast<int>(std::floor((out_i + 0.5) * scale));
  return clamp_index(i, in_n);
}

template <class GetT>
void resize_bilinear_plane(int in_h, int in_w, int out_h, int out_w,
                           const GetT& get, double* out, std::int64_t stride) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < out_h; ++r) {
    const Tap ty = bilinear_tap(r, out_h, in_h);
    for (int c = 0; c < out_w; ++c) {
      const Tap tx = bilinear_tap(c, out_w, in_w);
      const double top = lerp(get(ty.i0, tx.i0), get(ty.i0, tx.i1), tx.t);
      const double bot = lerp(get(ty.i1, tx.i0), get(ty.i1, tx.i1), tx.t);
      out[(static_cast<std::int64_t>(r) * out_w + c) * stride] = lerp(top, bot, ty.t);
    }
  }
}

void check_target(int out_h, int out_w) {
  detail::require(out_h >= 1 && out_w >= 1, "resize: zero-sized target rejected");
}

}  // namespace

Image to_grayscale(const Image& img) {
  detail::require(img.channels == 1 || img.channels == 3,
                  "to_grayscale: channels must be 1 or 3");
  if (img.channels == 1) return img;
  Image out = Image::zeros(img.height, img.width, 1);
  const std::int64_t n = static_cast<std::int64_t>(img.pixel_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) {
    const double* px = &img.data[static_cast<std::size_t>(p) * 3];
    out.data[static_cast<std::size_t>(p)] =
        0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
  check_target(out_h, out_w);
  Image out = Image::zeros(out_h, out_w, src.channels);
  for (int ch = 0; ch < src.channels; ++ch) {
    resize_bilinear_plane(
        src.height, src.width, out_h, out_w,
        [&](int r, int c) { return src.at(r, c, ch); },
        out.data.data() + ch, src.channels);
  }
  return out;
}

Mask resize_bilinear(const Mask& src, int out_h, int out_w) {
  check_target(out_h, out_w);
  Mask out = Mask::zeros(out_h, out_w);
  resize_bilinear_plane(
      src.height, src.width, out_h, out_w,
      [&](int r, int c) { return src.at(r, c); }, out.data.data(), 1);
  return out;
}

FeatureMap resize_bilinear(const FeatureMap& src, int out_h, int out_w) {
  check_target(out_h, out_w);
  FeatureMap out = FeatureMap::zeros(out_h, out_w, src.dim);
  for (int d = 0; d < src.dim; ++d) {
    resize_bilinear_plane(
        src.grid_h, src.grid_w, out_h, out_w,
        [&](int r, int c) { return src.at(r, c, d); },
        out.data.data() + d, src.dim);
  }
  return out;
}

Image resize_nearest(const Image& src, int out_h, int out_w) {
  check_target(out_h, out_w);
  Image out = Image::zeros(out_h, out_w, src.channels);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < out_h; ++r) {
    const int sr = nearest_tap(r, out_h, src.height);
    for (int c = 0; c < out_w; ++c) {
      const int sc = nearest_tap(c, out_w, src.width);
      for (int ch = 0; ch < src.channels; ++ch)
        out.at(r, c, ch) = src.at(sr, sc, ch);
    }
  }
  return out;
}

Mask resize_nearest(const Mask& src, int out_h, int out_w) {
  check_target(out_h, out_w);
  Mask out = Mask::zeros(out_h, out_w);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < out_h; ++r) {
    const int sr = nearest_tap(r, out_h, src.height);
    for (int c = 0; c < out_w; ++c)
      out.at(r, c) = src.at(sr, nearest_tap(c, out_w, src.width));
  }
  return out;
}

Image crop(const Image& src, const CropRect& rect) {
  detail::require(rect.inside(src.height, src.width),
                  "crop: rect out of bounds");
  Image out = Image::zeros(rect.height, rect.width, src.channels);
  for (int r = 0; r < rect.height; ++r)
    for (int c = 0; c < rect.width; ++c)
      for (int ch = 0; ch < src.channels; ++ch)
        out.at(r, c, ch) = src.at(rect.top + r, rect.left + c, ch);
  return out;
}

Mask crop(const Mask& src, const CropRect& rect) {
  detail::require(rect.inside(src.height, src.width),
                  "crop: rect out of bounds");
  Mask out = Mask::zeros(rect.height, rect.width);
  for (int r = 0; r < rect.height; ++r)
    for (int c = 0; c < rect.width; ++c)
      out.at(r, c) = src.at(rect.top + r, rect.left + c);
  return out;
}

std::pair<Image, Mask> crop_zoom(const Image& img, const Mask& mask,
                                 const CropRect& rect, Resample mode) {
  detail::require(img.height == mask.height && img.width == mask.width,
                  "crop_zoom: image and mask shapes must match");
  Image ic = crop(img, rect);
  Mask mc = crop(mask, rect);
  if (mode == Resample::kBilinear)
    return {resize_bilinear(ic, img.height, img.width),
            resize_bilinear(mc, mask.height, mask.width)};
  return {resize_nearest(ic, img.height, img.width),
          resize_nearest(mc, mask.height, mask.width)};
}

Mask crop_zoom_mask(const Mask& mask, const CropRect& rect, Resample mode) {
  Mask mc = crop(mask, rect);
  return mode == Resample::kBilinear
             ? resize_bilinear(mc, mask.height, mask.width)
             : resize_nearest(mc, mask.height, mask.width);
}

FeatureMap crop_zoom_features(const FeatureMap& src, const CropRect& rect,
                              int img_h, int img_w) {
  detail::require(rect.inside(img_h, img_w),
                  "crop_zoom_features: rect out of bounds");
  FeatureMap out = FeatureMap::zeros(src.grid_h, src.grid_w, src.dim);
  const double sy = static_cast<double>(rect.height) / src.grid_h;
  const double sx = static_cast<double>(rect.width) / src.grid_w;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < src.grid_h; ++r) {
    // sample center in image pixels, then in continuous grid coordinates
    const double py = rect.top + (r + 0.5) * sy;
    const double gy = py * src.grid_h / img_h - 0.5;
    const double fy = std::floor(gy);
    const int y0 = clamp_index(static_cast<int>(fy), src.grid_h);
    const int y1 = clamp_index(static_cast<int>(fy) + 1, src.grid_h);
    const double ty = gy - fy;
    for (int c = 0; c < src.grid_w; ++c) {
      const double px = rect.left + (c + 0.5) * sx;
      const double gx = px * src.grid_w / img_w - 0.5;
      const double fx = std::floor(gx);
      const int x0 = clamp_index(static_cast<int>(fx), src.grid_w);
      const int x1 = clamp_index(static_cast<int>(fx) + 1, src.grid_w);
      const double tx = gx - fx;
      for (int d = 0; d < src.dim; ++d) {
        const double top = lerp(src.at(y0, x0, d), src.at(y0, x1, d), tx);
        const double bot = lerp(src.at(y1, x0, d), src.at(y1, x1, d), tx);
        out.at(r, c, d) = lerp(top, bot, ty);
      }
    }
  }
  return out;
}

Grid crop_zoom_adjoint(const Grid& upstream, const CropRect& rect, int in_h,
                       int in_w, Resample mode) {
  detail::require(rect.inside(in_h, in_w), "crop_zoom_adjoint: rect out of bounds");
  Grid grad = Grid::zeros(in_h, in_w);
  const int out_h = upstream.height;
  const int out_w = upstream.width;
  // Scatter is serial: overlapping taps would race under a naive parallel
  // loop, and the zoomed grids here are small.
  for (int r = 0; r < out_h; ++r) {
    for (int c = 0; c < out_w; ++c) {
      const double g = upstream.at(r, c);
      if (g == 0.0) continue;
      if (mode == Resample::kNearest) {
        const int sr = rect.top + nearest_tap(r, out_h, rect.height);
        const int sc = rect.left + nearest_tap(c, out_w, rect.width);
        grad.at(sr, sc) += g;
      } else {
        const Tap ty = bilinear_tap(r, out_h, rect.height);
        const Tap tx = bilinear_tap(c, out_w, rect.width);
        const double wy1 = ty.t, wy0 = 1.0 - ty.t;
        const double wx1 = tx.t, wx0 = 1.0 - tx.t;
        grad.at(rect.top + ty.i0, rect.left + tx.i0) += g * wy0 * wx0;
        grad.at(rect.top + ty.i0, rect.left + tx.i1) += g * wy0 * wx1;
        grad.at(rect.top + ty.i1, rect.left + tx.i0) += g * wy1 * wx0;
        grad.at(rect.top + ty.i1, rect.left + tx.i1) += g * wy1 * wx1;
      }
    }
  }
  return grad;
}

}  // namespace segkit::tensor
