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

#include "segkit/consistency.hpp"

#include <cmath>

namespace segkit::consistency {

CropRect sample_crop(const CropPolicy& policy, int height, int width, Rng& rng) {
  policy.validate();
  detail::require(height >= 8 && width >= 8,
                  "sample_crop: raster must be at least 8x8");
  const double total = static_cast<double>(height) * width;
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double frac = rng.uniform(policy.min_area_fraction,
                                    policy.max_area_fraction);
    const double aspect = rng.uniform(policy.min_aspect, policy.max_aspect);
    const double area = frac * total;
    int rh = static_cast<int>(std::lround(std::sqrt(area / aspect)));
    rh = rh < 1 ? 1 : (rh > height ? height : rh);
    int rw = static_cast<int>(std::lround(area / rh));
    rw = rw < 1 ? 1 : (rw > width ? width : rw);
    const double actual = static_cast<double>(rh) * rw / total;
    if (actual < policy.min_area_fraction || actual > policy.max_area_fraction)
      continue;
    CropRect rect;
    rect.height = rh;
    rect.width = rw;
    rect.top = static_cast<int>(rng.uniform_int(0, height - rh));
    rect.left = static_cast<int>(rng.uniform_int(0, width - rw));
    return rect;
  }
  throw NumericalError(
      "sample_crop: no feasible rect after 100 tries (policy too tight for "
      "this raster)");
}

EqLossValue equivariance_loss(const Mask& s_c, const Mask& s_target) {
  detail::require(s_c.height == s_target.height && s_c.width == s_target.width,
                  "equivariance_loss: shape mismatch");
  const std::size_t n = s_c.data.size();
  const double inv_hw = 1.0 / static_cast<double>(n);
  EqLossValue out;
  out.grad_student.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = s_c.data[i] - s_target.data[i];
    sum += diff * diff;
    out.grad_student[i] = 2.0 * diff * inv_hw;
  }
  out.value = sum * inv_hw;
  return out;
}

ConsistencyBatchResult consistency_step(const MaskPredictor& f, const Image& image,
                                        const Mask& s_hat,
                                        const ConsistencyOptions& options,
                                        Rng& rng) {
  detail::require(image.height == s_hat.height && image.width == s_hat.width,
                  "consistency_step: image/mask shape mismatch");
  ConsistencyBatchResult out;
  out.rect = sample_crop(options.policy, image.height, image.width, rng);

  auto [image_c, s_c] = tensor::crop_zoom(image, s_hat, out.rect, options.resample);
  Mask teacher = f(image_c);
  detail::require(teacher.height == image.height && teacher.width == image.width,
                  "consistency_step: predictor output shape mismatch");
  if (options.apply_gf)
    teacher = filtering::refine_mask(teacher, image_c, options.gf);

  out.l_eq = equivariance_loss(s_c, teacher).value;
  out.s_c = std::move(s_c);
  out.s_target = std::move(teacher);
  return out;
}

}  // namespace segkit::consistency
