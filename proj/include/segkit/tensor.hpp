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

#include <utility>

#include "segkit/types.hpp"

namespace segkit::tensor {

enum class Resample { kBilinear, kNearest };

/// Rec.601 luma (0.299 R + 0.587 G + 0.114 B). 1-channel input passes through.
Image to_grayscale(const Image& img);

/// Bilinear resampling with half-pixel-center alignment. Identity sizes
/// reproduce the input exactly and outputs never leave the input value range.
Image resize_bilinear(const Image& src, int out_h, int out_w);
Mask resize_bilinear(const Mask& src, int out_h, int out_w);
FeatureMap resize_bilinear(const FeatureMap& src, int out_h, int out_w);

/// Nearest-neighbor resampling with half-pixel centers.
Image resize_nearest(const Image& src, int out_h, int out_w);
Mask resize_nearest(const Mask& src, int out_h, int out_w);

Image crop(const Image& src, const CropRect& rect);
Mask crop(const Mask& src, const CropRect& rect);

/// Crop both rasters to the same rect, then resize back to the host size.
std::pair<Image, Mask> crop_zoom(const Image& img, const Mask& mask,
                                 const CropRect& rect,
                                 Resample mode = Resample::kBilinear);

Mask crop_zoom_mask(const Mask& mask, const CropRect& rect,
                    Resample mode = Resample::kBilinear);

/// Resamples a feature grid over a pixel-space rect (fractional in grid
/// coordinates), producing a same-shape grid. Forward-only: features carry
/// no gradient.
FeatureMap crop_zoom_features(const FeatureMap& src, const CropRect& rect,
                              int img_h, int img_w);

/// Adjoint of crop_zoom_mask as a linear map: scatters an upstream gradient
/// (shaped like the zoomed output) back onto the full input grid.
Grid crop_zoom_adjoint(const Grid& upstream, const CropRect& rect, int in_h,
                       int in_w, Resample mode = Resample::kBilinear);

}  // namespace segkit::tensor
