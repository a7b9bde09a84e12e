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
#include <vector>

#include "segkit/consistency.hpp"
#include "segkit/filtering.hpp"
#include "segkit/graph.hpp"
#include "segkit/rng.hpp"
#include "segkit/tensor.hpp"
#include "segkit/types.hpp"

namespace segkit::model {

/// Minimal differentiable segmentation head: a per-cell affine map over
/// feature channels plus two normalized coordinate channels (coarse branch),
/// and over upsampled features, coordinates and the three image channels
/// (fine branch), squashed through a logistic.
struct ToyHead {
  int feat_dim = 0;
  std::vector<double> w_coarse;  // feat_dim + 2
  double b_coarse = 0.0;
  std::vector<double> w_fine;    // feat_dim + 5
  double b_fine = 0.0;

  static ToyHead zeros(int feat_dim);
  static ToyHead random(int feat_dim, double scale, Rng& rng);
  /// Small random init; breaks the symmetry of the all-0.5 saddle that the
  /// zero head sits on.
  static ToyHead seeded(int feat_dim, std::uint64_t seed, double scale = 0.1);

  int param_count() const { return 2 * feat_dim + 9; }
  std::vector<double> pack() const;
  void unpack(const std::vector<double>& params);
};

enum class Optimizer { kGradientDescent, kAdam };

struct TrainConfig {
  int step_count = 500;
  double learning_rate = 0.05;
  Optimizer optimizer = Optimizer::kGradientDescent;
  std::uint64_t seed = 0;
  graph::LossWeights weights;
  consistency::CropPolicy crop_policy;
  filtering::GuidedFilterParams gf;
  int patch_factor = 8;
  // the two tricks, independently ablatable
  bool crop_trick = true;  // consistency loss (and crop-branch training)
  bool gf_trick = true;    // guided filtering of teacher targets and outputs
  bool crop_trains_net = true;  // feed the cropped view through the main loss
  tensor::Resample crop_resample = tensor::Resample::kBilinear;

  void validate() const {
    detail::require(step_count >= 1 && learning_rate >= 0.0,
                    "TrainConfig: positive step_count, non-negative rate");
    detail::require(patch_factor >= 1, "TrainConfig: patch_factor must be >= 1");
    weights.validate();
    crop_policy.validate();
    gf.validate();
  }
};

struct Forward {
  CoarseMask s_coarse;
  Mask s_fine;
};

/// Coarse prediction on the feature grid and fine prediction at pixel
/// resolution (bilinearly upsampled features concatenated with the image).
Forward forward(const ToyHead& head, const FeatureMap& features,
                const Image& image);

/// Fine branch only; used for teacher predictions on cropped views.
Mask fine_forward(const ToyHead& head, const FeatureMap& features,
                  const Image& image);

/// Per-term values before weighting. The sempart terms include the
/// crop-branch contribution when crop training is active; eq is the
/// consistency term.
struct Breakdown {
  double ncut = 0.0;
  double gtv_coarse = 0.0;
  double gtv_fine = 0.0;
  double sr = 0.0;
  double eq = 0.0;
  double total = 0.0;
};

/// Frozen per-step state: the sampled crop rect and the stop-gradient
/// teacher target. Holding these fixed makes the objective a plain
/// deterministic function of the parameters, which is what both the trainer
/// and the finite-difference oracles differentiate.
struct StepPlan {
  bool crop_active = false;
  CropRect rect;
  Mask teacher;
};

StepPlan make_step_plan(const ToyHead& head, const FeatureMap& features,
                        const Image& image, const TrainConfig& config,
                        Rng& rng);

Breakdown objective_under_plan(const ToyHead& head, const FeatureMap& features,
                               const Image& image, const TrainConfig& config,
                               const StepPlan& plan);

struct Evaluation {
  Breakdown breakdown;
  std::vector<double> grad;  // packed like ToyHead::pack()
};

Evaluation evaluate_under_plan(const ToyHead& head, const FeatureMap& features,
                               const Image& image, const TrainConfig& config,
                               const StepPlan& plan);

/// Negative control for the stop-gradient contract: also differentiates the
/// teacher path (teacher recomputed from the current parameters, no guided
/// filtering). Only valid for plans built without GF in the teacher.
Evaluation evaluate_without_stop_gradient(const ToyHead& head,
                                          const FeatureMap& features,
                                          const Image& image,
                                          const TrainConfig& config,
                                          const StepPlan& plan);

/// One-call forms that sample the plan internally.
Breakdown total_objective(const ToyHead& head, const FeatureMap& features,
                          const Image& image, const TrainConfig& config,
                          Rng& rng);
std::vector<double> backward(const ToyHead& head, const FeatureMap& features,
                             const Image& image, const TrainConfig& config,
                             Rng& rng);

struct StopGradientReport {
  /// |trainer grad - grad with the target replaced by a constant copy|_inf.
  double max_abs_deviation = 0.0;
  /// |trainer grad - grad with the teacher path differentiated|_inf.
  double negative_control_deviation = 0.0;
};

StopGradientReport stop_gradient_check(const ToyHead& head,
                                       const FeatureMap& features,
                                       const Image& image,
                                       const TrainConfig& config, Rng& rng);

struct Sample {
  Image image;
  FeatureMap features;
  Mask gt;  // evaluation only, never consumed by training
};
using Dataset = std::vector<Sample>;

struct SyntheticParams {
  int patch_factor = 8;
  int feat_dim = 6;
  double min_area_fraction = 0.30;
  double max_area_fraction = 0.45;
  double two_blob_prob = 0.4;
  double feature_noise = 0.08;
  double texture_amp = 0.05;
  double pixel_noise = 0.02;
  double min_luma_gap = 0.25;
};

/// Images with 1-2 smooth blobs on textured backgrounds; features are a
/// blurred foreground indicator mixed between two near-orthogonal prototype
/// directions plus noise, so the Ncut signal exists by construction.
Dataset make_synthetic_dataset(int n, int height, int width,
                               std::uint64_t seed,
                               const SyntheticParams& params = {});

struct TrainResult {
  ToyHead head;
  std::vector<Breakdown> trace;  // one entry per step
};

/// Plain gradient descent (or Adam) over single-image batches, cycling the
/// dataset in order. Deterministic given config.seed.
TrainResult train(const ToyHead& init, const Dataset& dataset,
                  const TrainConfig& config);

/// Fine prediction with the configured post-processing: guided-filter
/// refinement when the GF trick is on, then orientation-normalized so the
/// foreground is the minority side (mean <= 0.5).
Mask predict_saliency(const ToyHead& head, const FeatureMap& features,
                      const Image& image, const TrainConfig& config);

/// Mean IoU of predictions against ground truth at threshold 0.5.
double evaluate_mean_iou(const ToyHead& head, const Dataset& dataset,
                         const TrainConfig& config);

}  // namespace segkit::model
