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

#include <functional>
#include <vector>

#include "segkit/filtering.hpp"
#include "segkit/rng.hpp"
#include "segkit/tensor.hpp"
#include "segkit/types.hpp"

namespace segkit::consistency {

/// Random-crop distribution: area fraction and aspect ratio bounds.
struct CropPolicy {
  double min_area_fraction = 0.3;
  double max_area_fraction = 1.0;
  double min_aspect = 0.75;     // width / height
  double max_aspect = 4.0 / 3.0;

  void validate() const {
    detail::require(min_area_fraction > 0.0 &&
                        min_area_fraction <= max_area_fraction &&
                        max_area_fraction <= 1.0,
                    "CropPolicy: need 0 < min_area <= max_area <= 1");
    detail::require(min_aspect > 0.0 && min_aspect <= max_aspect,
                    "CropPolicy: need 0 < min_aspect <= max_aspect");
  }
};

/// Samples a rect whose area fraction lies strictly within the policy bounds
/// (rejection sampling, up to 100 tries). Deterministic given the rng state.
CropRect sample_crop(const CropPolicy& policy, int height, int width, Rng& rng);

struct EqLossValue {
  double value = 0.0;
  /// Gradient w.r.t. the student mask s_c. The target side is a constant by
  /// the stop-gradient contract, so its gradient is identically zero and is
  /// not materialized.
  std::vector<double> grad_student;
};

/// Mean squared error (1/hw) |s_c - s_target|^2.
EqLossValue equivariance_loss(const Mask& s_c, const Mask& s_target);

struct ConsistencyOptions {
  CropPolicy policy;
  filtering::GuidedFilterParams gf;
  bool apply_gf = true;  // refine the teacher prediction before freezing it
  tensor::Resample resample = tensor::Resample::kBilinear;
};

struct ConsistencyBatchResult {
  double l_eq = 0.0;
  Mask s_c;       // student: crop-zoomed full-image prediction
  Mask s_target;  // teacher: (optionally refined) prediction on the crop, frozen
  CropRect rect;
};

using MaskPredictor = std::function<Mask(const Image&)>;

/// Runs one consistency step: crop-zoom image and prediction with a shared
/// rect, predict on the zoomed image, optionally guided-filter that
/// prediction with the zoomed image as guidance, freeze it as the target,
/// and score the student against it. Gradients, when a caller differentiates
/// this pipeline, flow only through s_c.
ConsistencyBatchResult consistency_step(const MaskPredictor& f, const Image& image,
                                        const Mask& s_hat,
                                        const ConsistencyOptions& options,
                                        Rng& rng);

}  // namespace segkit::consistency
