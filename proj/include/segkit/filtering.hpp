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

#include "segkit/types.hpp"

namespace segkit::filtering {

/// Guided filter window radius and regularization. The window is
/// (2r+1) x (2r+1), clipped at raster borders.
struct GuidedFilterParams {
  int radius = 4;
  double eps = 1e-4;

  void validate() const {
    detail::require(radius >= 1, "GuidedFilterParams: radius must be >= 1");
    detail::require(eps > 0.0, "GuidedFilterParams: eps must be > 0");
  }
};

/// Summed-area table: S[i,j] = sum of x over rows <= i, cols <= j.
/// Accumulation is in double precision.
Grid integral_image(const Mask& x);

/// Per-pixel window mean with border-clipped windows (divide by the actual
/// window area).
Mask box_filter(const Mask& x, int radius);

/// Edge-preserving guided filter: per window k,
///   a_k = cov_k(guide, p) / (var_k(guide) + eps)
///   b_k = mean_k(p) - a_k * mean_k(guide)
/// and q_i averages a*guide_i + b over the windows containing i. Output is
/// clamped to [0,1].
Mask guided_filter(const Mask& p, const Image& guide,
                   const GuidedFilterParams& params);

/// Grayscale-converts rgb, then guided-filters p with it.
Mask refine_mask(const Mask& p, const Image& rgb,
                 const GuidedFilterParams& params);

}  // namespace segkit::filtering
