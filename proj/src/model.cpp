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

#include "segkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segkit/metrics.hpp"

namespace segkit::model {

namespace {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ParamGrad {
  std::vector<double> w_coarse;
  double b_coarse = 0.0;
  std::vector<double> w_fine;
  double b_fine = 0.0;

  explicit ParamGrad(int feat_dim)
      : w_coarse(static_cast<std::size_t>(feat_dim) + 2, 0.0),
        w_fine(static_cast<std::size_t>(feat_dim) + 5, 0.0) {}

  std::vector<double> pack() const {
    std::vector<double> out;
    out.reserve(w_coarse.size() + w_fine.size() + 2);
    out.insert(out.end(), w_coarse.begin(), w_coarse.end());
    out.push_back(b_coarse);
    out.insert(out.end(), w_fine.begin(), w_fine.end());
    out.push_back(b_fine);
    return out;
  }
};

// All per-branch state shared by the value and gradient paths. The crop
// branch is just another instance built from the cropped view.
struct BranchData {
  FeatureMap features;     // on the coarse grid
  FeatureMap features_up;  // upsampled to pixel resolution
  Image image;
  graph::AffinityMatrix affinity;
  std::vector<graph::Edge> coarse_edges;
  std::vector<graph::Edge> fine_edges;
  Forward fw;
};

void coarse_forward_into(const ToyHead& head, const FeatureMap& features,
                         CoarseMask& out) {
  const int gh = features.grid_h;
  const int gw = features.grid_w;
  const int d = features.dim;
  out = CoarseMask::constant(gh, gw, 0.0);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < gh; ++r) {
    const double yn = (r + 0.5) / gh;
    for (int c = 0; c < gw; ++c) {
      const double xn = (c + 0.5) / gw;
      double z = head.b_coarse;
      for (int k = 0; k < d; ++k)
        z += head.w_coarse[static_cast<std::size_t>(k)] * features.at(r, c, k);
      z += head.w_coarse[static_cast<std::size_t>(d)] * yn;
      z += head.w_coarse[static_cast<std::size_t>(d) + 1] * xn;
      out.at(r, c) = logistic(z);
    }
  }
}

void fine_forward_into(const ToyHead& head, const FeatureMap& features_up,
                       const Image& image, Mask& out) {
  const int h = image.height;
  const int w = image.width;
  const int d = features_up.dim;
  out = Mask::zeros(h, w);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) {
    const double yn = (r + 0.5) / h;
    for (int c = 0; c < w; ++c) {
      const double xn = (c + 0.5) / w;
      double z = head.b_fine;
      for (int k = 0; k < d; ++k)
        z += head.w_fine[static_cast<std::size_t>(k)] * features_up.at(r, c, k);
      z += head.w_fine[static_cast<std::size_t>(d)] * yn;
      z += head.w_fine[static_cast<std::size_t>(d) + 1] * xn;
      for (int ch = 0; ch < 3; ++ch)
        z += head.w_fine[static_cast<std::size_t>(d) + 2 + ch] * image.at(r, c, ch);
      out.at(r, c) = logistic(z);
    }
  }
}

void check_inputs(const FeatureMap& features, const Image& image,
                  const TrainConfig& config) {
  detail::require(image.channels == 3, "model: image must have 3 channels");
  detail::require(
      image.height == features.grid_h * config.patch_factor &&
          image.width == features.grid_w * config.patch_factor,
      "model: image dims must equal feature grid times patch factor");
}

BranchData build_branch(const ToyHead& head, FeatureMap features, Image image,
                        const TrainConfig& config) {
  BranchData b;
  b.features = std::move(features);
  b.image = std::move(image);
  b.features_up =
      tensor::resize_bilinear(b.features, b.image.height, b.image.width);
  b.affinity = graph::tokencut_affinity(b.features, config.weights.tau,
                                        config.weights.epsilon_aff);
  b.coarse_edges = graph::gtv_coarse_weights(b.affinity, b.features.grid_h,
                                             b.features.grid_w);
  b.fine_edges = graph::gtv_fine_weights(b.image, config.weights.sigma);
  coarse_forward_into(head, b.features, b.fw.s_coarse);
  fine_forward_into(head, b.features_up, b.image, b.fw.s_fine);
  return b;
}

// dL/dz = dL/dS * S(1-S); accumulate the affine-map gradient.
void backprop_coarse(const BranchData& b, const std::vector<double>& dl_ds,
                     const ToyHead& head, ParamGrad& grad) {
  const int gh = b.features.grid_h;
  const int gw = b.features.grid_w;
  const int d = head.feat_dim;
  for (int r = 0; r < gh; ++r) {
    const double yn = (r + 0.5) / gh;
    for (int c = 0; c < gw; ++c) {
      const double s = b.fw.s_coarse.at(r, c);
      const double dz = dl_ds[static_cast<std::size_t>(r) * gw + c] * s * (1.0 - s);
      if (dz == 0.0) continue;
      for (int k = 0; k < d; ++k)
        grad.w_coarse[static_cast<std::size_t>(k)] += dz * b.features.at(r, c, k);
      grad.w_coarse[static_cast<std::size_t>(d)] += dz * yn;
      grad.w_coarse[static_cast<std::size_t>(d) + 1] += dz * ((c + 0.5) / gw);
      grad.b_coarse += dz;
    }
  }
}

void backprop_fine(const BranchData& b, const std::vector<double>& dl_ds,
                   const ToyHead& head, ParamGrad& grad) {
  const int h = b.image.height;
  const int w = b.image.width;
  const int d = head.feat_dim;
  for (int r = 0; r < h; ++r) {
    const double yn = (r + 0.5) / h;
    for (int c = 0; c < w; ++c) {
      const double s = b.fw.s_fine.at(r, c);
      const double dz = dl_ds[static_cast<std::size_t>(r) * w + c] * s * (1.0 - s);
      if (dz == 0.0) continue;
      for (int k = 0; k < d; ++k)
        grad.w_fine[static_cast<std::size_t>(k)] += dz * b.features_up.at(r, c, k);
      grad.w_fine[static_cast<std::size_t>(d)] += dz * yn;
      grad.w_fine[static_cast<std::size_t>(d) + 1] += dz * ((c + 0.5) / w);
      for (int ch = 0; ch < 3; ++ch)
        grad.w_fine[static_cast<std::size_t>(d) + 2 + ch] +=
            dz * b.image.at(r, c, ch);
      grad.b_fine += dz;
    }
  }
}

// Adds the four combined-loss terms of one branch to the breakdown and, when
// grad != nullptr, their parameter gradients.
void accumulate_sempart(const BranchData& b, const ToyHead& head,
                        const TrainConfig& config, Breakdown& breakdown,
                        ParamGrad* grad) {
  const auto& weights = config.weights;
  const auto ncut =
      graph::soft_ncut_loss(b.affinity, b.fw.s_coarse.data, weights.eps_div);
  const double gtv_c = graph::gtv_loss(b.coarse_edges, b.fw.s_coarse.data);
  const double gtv_f = graph::gtv_loss(b.fine_edges, b.fw.s_fine.data);
  const graph::SrLoss sr =
      graph::sr_loss(b.fw.s_fine, b.fw.s_coarse, config.patch_factor);

  breakdown.ncut += ncut.value;
  breakdown.gtv_coarse += gtv_c;
  breakdown.gtv_fine += gtv_f;
  breakdown.sr += sr.value;

  if (!grad) return;

  const auto g_ncut =
      graph::soft_ncut_grad(b.affinity, b.fw.s_coarse.data, weights.eps_div);
  const auto g_gtv_c = graph::gtv_grad(b.coarse_edges, b.fw.s_coarse.data);
  const auto g_gtv_f = graph::gtv_grad(b.fine_edges, b.fw.s_fine.data);

  std::vector<double> dl_dcoarse(b.fw.s_coarse.data.size());
  for (std::size_t i = 0; i < dl_dcoarse.size(); ++i)
    dl_dcoarse[i] = g_ncut[i] + weights.lambda_gtv_coarse * g_gtv_c[i] +
                    weights.lambda_sr * sr.grad_coarse[i];

  std::vector<double> dl_dfine(b.fw.s_fine.data.size());
  for (std::size_t i = 0; i < dl_dfine.size(); ++i)
    dl_dfine[i] = weights.lambda_gtv_fine * g_gtv_f[i] +
                  weights.lambda_sr * sr.grad_fine[i];

  backprop_coarse(b, dl_dcoarse, head, *grad);
  backprop_fine(b, dl_dfine, head, *grad);
}

Breakdown finalize(Breakdown breakdown, const graph::LossWeights& weights) {
  breakdown.total = breakdown.ncut +
                    weights.lambda_gtv_coarse * breakdown.gtv_coarse +
                    weights.lambda_gtv_fine * breakdown.gtv_fine +
                    weights.lambda_sr * breakdown.sr +
                    weights.lambda_eq * breakdown.eq;
  return breakdown;
}

// Shared by the value-only, gradient, and no-stop-gradient paths.
Evaluation evaluate_impl(const ToyHead& head, const FeatureMap& features,
                         const Image& image, const TrainConfig& config,
                         const StepPlan& plan, bool want_grad,
                         bool differentiate_teacher) {
  config.validate();
  check_inputs(features, image, config);
  detail::require(head.feat_dim == features.dim,
                  "model: head/feature dim mismatch");

  ParamGrad grad(head.feat_dim);
  Breakdown breakdown;

  BranchData main = build_branch(head, features, image, config);
  accumulate_sempart(main, head, config, breakdown, want_grad ? &grad : nullptr);

  if (plan.crop_active) {
    BranchData crop_branch;
    const bool need_crop_branch = config.crop_trains_net || differentiate_teacher;
    if (need_crop_branch) {
      FeatureMap crop_features = tensor::crop_zoom_features(
          features, plan.rect, image.height, image.width);
      Image crop_image =
          config.crop_resample == tensor::Resample::kBilinear
              ? tensor::resize_bilinear(tensor::crop(image, plan.rect),
                                        image.height, image.width)
              : tensor::resize_nearest(tensor::crop(image, plan.rect),
                                       image.height, image.width);
      crop_branch = build_branch(head, std::move(crop_features),
                                 std::move(crop_image), config);
      if (config.crop_trains_net)
        accumulate_sempart(crop_branch, head, config, breakdown,
                           want_grad ? &grad : nullptr);
    }

    // consistency: student = crop-zoomed main fine prediction vs the frozen
    // teacher; only the student path carries gradient
    Mask student = tensor::crop_zoom_mask(main.fw.s_fine, plan.rect,
                                          config.crop_resample);
    const consistency::EqLossValue eq =
        consistency::equivariance_loss(student, plan.teacher);
    breakdown.eq += eq.value;

    if (want_grad && config.weights.lambda_eq > 0.0) {
      Grid upstream = Grid::zeros(student.height, student.width);
      for (std::size_t i = 0; i < eq.grad_student.size(); ++i)
        upstream.data[i] = config.weights.lambda_eq * eq.grad_student[i];
      const Grid dl_dfine_grid = tensor::crop_zoom_adjoint(
          upstream, plan.rect, image.height, image.width, config.crop_resample);
      backprop_fine(main, dl_dfine_grid.data, head, grad);

      if (differentiate_teacher) {
        // deliberately broken variant: let gradient flow through the teacher
        detail::require(need_crop_branch,
                        "evaluate_without_stop_gradient: internal state");
        std::vector<double> dl_dteacher(eq.grad_student.size());
        for (std::size_t i = 0; i < dl_dteacher.size(); ++i)
          dl_dteacher[i] = -config.weights.lambda_eq * eq.grad_student[i];
        backprop_fine(crop_branch, dl_dteacher, head, grad);
      }
    }
  }

  Evaluation out;
  out.breakdown = finalize(breakdown, config.weights);
  if (want_grad) out.grad = grad.pack();
  return out;
}

}  // namespace

ToyHead ToyHead::zeros(int feat_dim) {
  detail::require(feat_dim >= 1, "ToyHead: feat_dim must be positive");
  ToyHead head;
  head.feat_dim = feat_dim;
  head.w_coarse.assign(static_cast<std::size_t>(feat_dim) + 2, 0.0);
  head.w_fine.assign(static_cast<std::size_t>(feat_dim) + 5, 0.0);
  return head;
}

ToyHead ToyHead::random(int feat_dim, double scale, Rng& rng) {
  ToyHead head = zeros(feat_dim);
  for (double& w : head.w_coarse) w = scale * rng.normal();
  head.b_coarse = scale * rng.normal();
  for (double& w : head.w_fine) w = scale * rng.normal();
  head.b_fine = scale * rng.normal();
  return head;
}

ToyHead ToyHead::seeded(int feat_dim, std::uint64_t seed, double scale) {
  Rng rng(seed ^ 0xA24BAED4963EE407ULL);
  return random(feat_dim, scale, rng);
}

std::vector<double> ToyHead::pack() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(param_count()));
  out.insert(out.end(), w_coarse.begin(), w_coarse.end());
  out.push_back(b_coarse);
  out.insert(out.end(), w_fine.begin(), w_fine.end());
  out.push_back(b_fine);
  return out;
}

void ToyHead::unpack(const std::vector<double>& params) {
  detail::require(static_cast<int>(params.size()) == param_count(),
                  "ToyHead::unpack: parameter count mismatch");
  std::size_t idx = 0;
  for (double& w : w_coarse) w = params[idx++];
  b_coarse = params[idx++];
  for (double& w : w_fine) w = params[idx++];
  b_fine = params[idx++];
}

Forward forward(const ToyHead& head, const FeatureMap& features,
                const Image& image) {
  detail::require(head.feat_dim == features.dim,
                  "forward: feature dim mismatch");
  detail::require(image.channels == 3, "forward: image must have 3 channels");
  Forward fw;
  coarse_forward_into(head, features, fw.s_coarse);
  const FeatureMap up =
      tensor::resize_bilinear(features, image.height, image.width);
  fine_forward_into(head, up, image, fw.s_fine);
  return fw;
}

Mask fine_forward(const ToyHead& head, const FeatureMap& features,
                  const Image& image) {
  detail::require(head.feat_dim == features.dim,
                  "fine_forward: feature dim mismatch");
  const FeatureMap up =
      tensor::resize_bilinear(features, image.height, image.width);
  Mask out;
  fine_forward_into(head, up, image, out);
  return out;
}

StepPlan make_step_plan(const ToyHead& head, const FeatureMap& features,
                        const Image& image, const TrainConfig& config,
                        Rng& rng) {
  StepPlan plan;
  if (!config.crop_trick) return plan;
  plan.crop_active = true;
  plan.rect =
      consistency::sample_crop(config.crop_policy, image.height, image.width, rng);

  FeatureMap crop_features = tensor::crop_zoom_features(
      features, plan.rect, image.height, image.width);
  Image crop_image =
      config.crop_resample == tensor::Resample::kBilinear
          ? tensor::resize_bilinear(tensor::crop(image, plan.rect),
                                    image.height, image.width)
          : tensor::resize_nearest(tensor::crop(image, plan.rect),
                                   image.height, image.width);
  Mask teacher = fine_forward(head, crop_features, crop_image);
  if (config.gf_trick)
    teacher = filtering::refine_mask(teacher, crop_image, config.gf);
  plan.teacher = std::move(teacher);
  return plan;
}

Breakdown objective_under_plan(const ToyHead& head, const FeatureMap& features,
                               const Image& image, const TrainConfig& config,
                               const StepPlan& plan) {
  return evaluate_impl(head, features, image, config, plan, false, false)
      .breakdown;
}

Evaluation evaluate_under_plan(const ToyHead& head, const FeatureMap& features,
                               const Image& image, const TrainConfig& config,
                               const StepPlan& plan) {
  return evaluate_impl(head, features, image, config, plan, true, false);
}

Evaluation evaluate_without_stop_gradient(const ToyHead& head,
                                          const FeatureMap& features,
                                          const Image& image,
                                          const TrainConfig& config,
                                          const StepPlan& plan) {
  detail::require(!config.gf_trick,
                  "evaluate_without_stop_gradient: teacher GF path is not "
                  "differentiated; disable the GF trick for this control");
  return evaluate_impl(head, features, image, config, plan, true, true);
}

Breakdown total_objective(const ToyHead& head, const FeatureMap& features,
                          const Image& image, const TrainConfig& config,
                          Rng& rng) {
  const StepPlan plan = make_step_plan(head, features, image, config, rng);
  return objective_under_plan(head, features, image, config, plan);
}

std::vector<double> backward(const ToyHead& head, const FeatureMap& features,
                             const Image& image, const TrainConfig& config,
                             Rng& rng) {
  const StepPlan plan = make_step_plan(head, features, image, config, rng);
  return evaluate_under_plan(head, features, image, config, plan).grad;
}

StopGradientReport stop_gradient_check(const ToyHead& head,
                                       const FeatureMap& features,
                                       const Image& image,
                                       const TrainConfig& config, Rng& rng) {
  StopGradientReport report;

  const StepPlan plan = make_step_plan(head, features, image, config, rng);
  const Evaluation trainer =
      evaluate_under_plan(head, features, image, config, plan);

  // constant-copy target: byte-identical teacher data in a fresh plan
  StepPlan constant_plan = plan;
  constant_plan.teacher = Mask{plan.teacher.height, plan.teacher.width,
                               plan.teacher.data};
  const Evaluation frozen =
      evaluate_under_plan(head, features, image, config, constant_plan);
  for (std::size_t i = 0; i < trainer.grad.size(); ++i)
    report.max_abs_deviation =
        std::max(report.max_abs_deviation,
                 std::abs(trainer.grad[i] - frozen.grad[i]));

  // negative control on the same fixture, teacher GF off so the teacher path
  // has an analytic derivative
  TrainConfig control_config = config;
  control_config.gf_trick = false;
  StepPlan control_plan = plan;
  if (plan.crop_active) {
    FeatureMap crop_features = tensor::crop_zoom_features(
        features, plan.rect, image.height, image.width);
    Image crop_image =
        config.crop_resample == tensor::Resample::kBilinear
            ? tensor::resize_bilinear(tensor::crop(image, plan.rect),
                                      image.height, image.width)
            : tensor::resize_nearest(tensor::crop(image, plan.rect),
                                     image.height, image.width);
    control_plan.teacher = fine_forward(head, crop_features, crop_image);
  }
  const Evaluation with_sg = evaluate_under_plan(head, features, image,
                                                 control_config, control_plan);
  const Evaluation without_sg = evaluate_without_stop_gradient(
      head, features, image, control_config, control_plan);
  for (std::size_t i = 0; i < with_sg.grad.size(); ++i)
    report.negative_control_deviation =
        std::max(report.negative_control_deviation,
                 std::abs(with_sg.grad[i] - without_sg.grad[i]));
  return report;
}

Dataset make_synthetic_dataset(int n, int height, int width,
                               std::uint64_t seed,
                               const SyntheticParams& params) {
  detail::require(n >= 1, "make_synthetic_dataset: n must be positive");
  detail::require(height % params.patch_factor == 0 &&
                      width % params.patch_factor == 0,
                  "make_synthetic_dataset: dims must be divisible by the "
                  "patch factor");
  const int gh = height / params.patch_factor;
  const int gw = width / params.patch_factor;
  const int d = params.feat_dim;
  detail::require(d >= 2, "make_synthetic_dataset: feat_dim must be >= 2");

  Dataset dataset(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(idx + 1));
    Sample& sample = dataset[static_cast<std::size_t>(idx)];

    // ground truth: 1-2 rotated ellipses, total area within bounds
    Mask gt = Mask::zeros(height, width);
    for (int attempt = 0;; ++attempt) {
      detail::require(attempt < 200,
                      "make_synthetic_dataset: area bounds unreachable");
      std::fill(gt.data.begin(), gt.data.end(), 0.0);
      const int blobs = rng.uniform01() < params.two_blob_prob ? 2 : 1;
      const double shrink = blobs == 2 ? 0.7 : 1.0;
      for (int bi = 0; bi < blobs; ++bi) {
        const double cy = rng.uniform(0.3, 0.7) * height;
        const double cx = rng.uniform(0.3, 0.7) * width;
        const double ry = rng.uniform(0.28, 0.42) * shrink * height;
        const double rx = rng.uniform(0.28, 0.42) * shrink * width;
        const double theta = rng.uniform(0.0, 3.14159265358979323846);
        const double ct = std::cos(theta), st = std::sin(theta);
        for (int r = 0; r < height; ++r) {
          for (int c = 0; c < width; ++c) {
            const double dy = r + 0.5 - cy;
            const double dx = c + 0.5 - cx;
            const double a = (dx * ct + dy * st) / rx;
            const double b = (-dx * st + dy * ct) / ry;
            if (a * a + b * b <= 1.0) gt.at(r, c) = 1.0;
          }
        }
      }
      double area = 0.0;
      for (double v : gt.data) area += v;
      const double frac = area / static_cast<double>(height * width);
      if (frac >= params.min_area_fraction && frac <= params.max_area_fraction)
        break;
    }

    // image: two base colors with a guaranteed luma gap, smooth sinusoidal
    // texture, mild pixel noise
    double fg[3], bg[3];
    for (;;) {
      for (int ch = 0; ch < 3; ++ch) {
        fg[ch] = rng.uniform(0.15, 0.85);
        bg[ch] = rng.uniform(0.15, 0.85);
      }
      const double luma_fg = 0.299 * fg[0] + 0.587 * fg[1] + 0.114 * fg[2];
      const double luma_bg = 0.299 * bg[0] + 0.587 * bg[1] + 0.114 * bg[2];
      if (std::abs(luma_fg - luma_bg) >= params.min_luma_gap) break;
    }
    struct Wave {
      double fy, fx, phase, amp;
    };
    Wave waves[3][2];
    for (int ch = 0; ch < 3; ++ch)
      for (int k = 0; k < 2; ++k)
        waves[ch][k] = {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0),
                        rng.uniform(0.0, 6.28318530717958648),
                        params.texture_amp * rng.uniform(0.5, 1.0)};
    Image img = Image::zeros(height, width, 3);
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        const double y = (r + 0.5) / height;
        const double x = (c + 0.5) / width;
        const bool fg_px = gt.at(r, c) > 0.5;
        for (int ch = 0; ch < 3; ++ch) {
          double v = fg_px ? fg[ch] : bg[ch];
          for (int k = 0; k < 2; ++k) {
            const Wave& wv = waves[ch][k];
            v += wv.amp * std::sin(6.28318530717958648 * (wv.fy * y + wv.fx * x) +
                                   wv.phase);
          }
          v += params.pixel_noise * rng.normal();
          img.at(r, c, ch) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        }
      }
    }

    // features: blurred foreground indicator mixed between two prototype
    // directions u (foreground, dominated by channel 0) and v (background,
    // orthogonal to u), plus isotropic noise
    std::vector<double> u(static_cast<std::size_t>(d)), v(static_cast<std::size_t>(d));
    u[0] = 1.0;
    for (int k = 1; k < d; ++k) u[static_cast<std::size_t>(k)] = 0.15 * rng.normal();
    double norm_u = 0.0;
    for (double w : u) norm_u += w * w;
    norm_u = std::sqrt(norm_u);
    for (double& w : u) w /= norm_u;
    for (;;) {
      v[0] = 0.0;
      for (int k = 1; k < d; ++k) v[static_cast<std::size_t>(k)] = rng.normal();
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += v[static_cast<std::size_t>(k)] * u[static_cast<std::size_t>(k)];
      double norm_v = 0.0;
      for (int k = 0; k < d; ++k) {
        v[static_cast<std::size_t>(k)] -= dot * u[static_cast<std::size_t>(k)];
        norm_v += v[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)];
      }
      norm_v = std::sqrt(norm_v);
      if (norm_v > 1e-6) {
        for (double& w : v) w /= norm_v;
        break;
      }
    }

    // block means of gt on the grid, then one 3x3 smoothing pass
    CoarseMask indicator = graph::downsample_mean(gt, params.patch_factor);
    CoarseMask blurred = indicator;
    for (int r = 0; r < gh; ++r) {
      for (int c = 0; c < gw; ++c) {
        double sum = 0.0;
        int cnt = 0;
        for (int dr = -1; dr <= 1; ++dr)
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = r + dr, cc = c + dc;
            if (rr < 0 || cc < 0 || rr >= gh || cc >= gw) continue;
            sum += indicator.at(rr, cc);
            ++cnt;
          }
        blurred.at(r, c) = sum / cnt;
      }
    }

    FeatureMap features = FeatureMap::zeros(gh, gw, d);
    for (int r = 0; r < gh; ++r)
      for (int c = 0; c < gw; ++c) {
        const double b = blurred.at(r, c);
        for (int k = 0; k < d; ++k)
          features.at(r, c, k) = b * u[static_cast<std::size_t>(k)] +
                                 (1.0 - b) * v[static_cast<std::size_t>(k)] +
                                 params.feature_noise * rng.normal();
      }

    sample.image = std::move(img);
    sample.features = std::move(features);
    sample.gt = std::move(gt);
  }
  return dataset;
}

TrainResult train(const ToyHead& init, const Dataset& dataset,
                  const TrainConfig& config) {
  config.validate();
  detail::require(!dataset.empty(), "train: dataset must be non-empty");

  TrainResult result;
  result.head = init;
  result.trace.reserve(static_cast<std::size_t>(config.step_count));

  Rng rng(config.seed);
  std::vector<double> params = result.head.pack();
  std::vector<double> adam_m(params.size(), 0.0);
  std::vector<double> adam_v(params.size(), 0.0);

  for (int step = 0; step < config.step_count; ++step) {
    const Sample& sample =
        dataset[static_cast<std::size_t>(step) % dataset.size()];
    const StepPlan plan = make_step_plan(result.head, sample.features,
                                         sample.image, config, rng);
    const Evaluation eval = evaluate_under_plan(
        result.head, sample.features, sample.image, config, plan);
    if (!std::isfinite(eval.breakdown.total))
      throw NumericalError("train: non-finite loss at step " +
                           std::to_string(step));
    result.trace.push_back(eval.breakdown);

    if (config.optimizer == Optimizer::kGradientDescent) {
      for (std::size_t i = 0; i < params.size(); ++i)
        params[i] -= config.learning_rate * eval.grad[i];
    } else {
      const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
      const double t = static_cast<double>(step + 1);
      for (std::size_t i = 0; i < params.size(); ++i) {
        adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * eval.grad[i];
        adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * eval.grad[i] * eval.grad[i];
        const double mhat = adam_m[i] / (1.0 - std::pow(beta1, t));
        const double vhat = adam_v[i] / (1.0 - std::pow(beta2, t));
        params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + adam_eps);
      }
    }
    result.head.unpack(params);
  }
  return result;
}

Mask predict_saliency(const ToyHead& head, const FeatureMap& features,
                      const Image& image, const TrainConfig& config) {
  Mask pred = fine_forward(head, features, image);
  if (config.gf_trick) pred = filtering::refine_mask(pred, image, config.gf);
  double mean = 0.0;
  for (double v : pred.data) mean += v;
  mean /= static_cast<double>(pred.data.size());
  if (mean > 0.5) {
    // salient objects are the minority side; normalize the orientation
    for (double& v : pred.data) v = 1.0 - v;
  }
  return pred;
}

double evaluate_mean_iou(const ToyHead& head, const Dataset& dataset,
                         const TrainConfig& config) {
  detail::require(!dataset.empty(), "evaluate_mean_iou: empty dataset");
  double sum = 0.0;
  for (const Sample& sample : dataset) {
    const Mask pred =
        predict_saliency(head, sample.features, sample.image, config);
    sum += metrics::iou(metrics::binarize(pred, 0.5),
                        metrics::binarize(sample.gt, 0.5));
  }
  return sum / static_cast<double>(dataset.size());
}

}  // namespace segkit::model
