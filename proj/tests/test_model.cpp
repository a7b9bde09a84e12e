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

#include <cmath>
#include <numeric>

#include "segkit/manifest.hpp"
#include "segkit/model.hpp"
#include "segkit/ref.hpp"
#include "testutil.hpp"

using namespace segkit;
using model::ToyHead;
using model::TrainConfig;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.patch_factor = 8;
  cfg.crop_policy.min_area_fraction = 0.4;
  cfg.crop_policy.max_area_fraction = 0.9;
  return cfg;
}

std::string dataset_digest(const model::Dataset& dataset) {
  std::string all;
  for (const auto& sample : dataset) {
    auto append = [&all](const std::vector<double>& v) {
      all.append(reinterpret_cast<const char*>(v.data()),
                 v.size() * sizeof(double));
    };
    append(sample.image.data);
    append(sample.features.data);
    append(sample.gt.data);
  }
  return manifest::fnv1a64(all.data(), all.size());
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("forward: zero head predicts 0.5 everywhere") {
  Rng rng(80);
  const FeatureMap f = testutil::random_features(2, 2, 4, rng);
  const Image img = testutil::random_image(16, 16, 3, rng);
  const auto fw = model::forward(ToyHead::zeros(4), f, img);
  for (double v : fw.s_coarse.data) CHECK(v == 0.5);
  for (double v : fw.s_fine.data) CHECK(v == 0.5);
}

TEST_CASE("forward: large positive bias saturates toward 1") {
  Rng rng(81);
  const FeatureMap f = testutil::random_features(2, 2, 4, rng);
  const Image img = testutil::random_image(16, 16, 3, rng);
  ToyHead head = ToyHead::zeros(4);
  head.b_coarse = 50.0;
  head.b_fine = 50.0;
  const auto fw = model::forward(head, f, img);
  for (double v : fw.s_coarse.data) CHECK(v > 1.0 - 1e-12);
  for (double v : fw.s_fine.data) CHECK(v > 1.0 - 1e-12);
}

TEST_CASE("forward: random head on a 2x2 grid matches scalar recomputation") {
  Rng rng(82);
  const FeatureMap f = testutil::random_features(2, 2, 3, rng);
  const Image img = testutil::random_image(8, 8, 3, rng);
  const ToyHead head = ToyHead::random(3, 0.7, rng);
  const auto fw = model::forward(head, f, img);

  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      double z = head.b_coarse;
      for (int k = 0; k < 3; ++k) z += head.w_coarse[static_cast<std::size_t>(k)] * f.at(r, c, k);
      z += head.w_coarse[3] * ((r + 0.5) / 2.0);
      z += head.w_coarse[4] * ((c + 0.5) / 2.0);
      CHECK(fw.s_coarse.at(r, c) == doctest::Approx(logistic(z)).epsilon(1e-14));
    }

  const FeatureMap up = tensor::resize_bilinear(f, 8, 8);
  for (const auto& [r, c] : {std::pair{0, 0}, {3, 5}, {7, 7}}) {
    double z = head.b_fine;
    for (int k = 0; k < 3; ++k) z += head.w_fine[static_cast<std::size_t>(k)] * up.at(r, c, k);
    z += head.w_fine[3] * ((r + 0.5) / 8.0);
    z += head.w_fine[4] * ((c + 0.5) / 8.0);
    for (int ch = 0; ch < 3; ++ch)
      z += head.w_fine[static_cast<std::size_t>(5 + ch)] * img.at(r, c, ch);
    CHECK(fw.s_fine.at(r, c) == doctest::Approx(logistic(z)).epsilon(1e-14));
  }
}

TEST_CASE("total_objective: lambda_eq = 0 with crop off equals sempart alone") {
  Rng rng(83);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 9);
  const model::Sample& s = dataset[0];
  const ToyHead head = ToyHead::random(6, 0.5, rng);

  TrainConfig cfg = small_config();
  cfg.crop_trick = false;

  Rng step_rng(1);
  const auto breakdown =
      model::total_objective(head, s.features, s.image, cfg, step_rng);

  const auto fw = model::forward(head, s.features, s.image);
  const auto w = graph::tokencut_affinity(s.features, cfg.weights.tau,
                                          cfg.weights.epsilon_aff);
  const auto fine_edges = graph::gtv_fine_weights(s.image, cfg.weights.sigma);
  const auto sempart = graph::evaluate_sempart(w, fw.s_coarse, fine_edges,
                                               fw.s_fine, 8, cfg.weights);
  CHECK(breakdown.eq == 0.0);
  CHECK(breakdown.total == doctest::Approx(sempart.total).epsilon(1e-12));
}

TEST_CASE("total_objective: all lambdas zero leaves the soft ncut term") {
  Rng rng(84);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 10);
  const model::Sample& s = dataset[0];
  const ToyHead head = ToyHead::random(6, 0.5, rng);

  TrainConfig cfg = small_config();
  cfg.crop_trick = false;
  cfg.weights.lambda_sr = 0.0;
  cfg.weights.lambda_gtv_fine = 0.0;
  cfg.weights.lambda_gtv_coarse = 0.0;
  cfg.weights.lambda_eq = 0.0;

  Rng step_rng(1);
  const auto breakdown =
      model::total_objective(head, s.features, s.image, cfg, step_rng);
  const auto fw = model::forward(head, s.features, s.image);
  const auto w = graph::tokencut_affinity(s.features, cfg.weights.tau,
                                          cfg.weights.epsilon_aff);
  CHECK(breakdown.total ==
        doctest::Approx(
            graph::soft_ncut_loss(w, fw.s_coarse.data, cfg.weights.eps_div).value)
            .epsilon(1e-12));
}

TEST_CASE("objective_under_plan: matches term-by-term oracle recomposition") {
  Rng rng(85);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 11);
  const model::Sample& s = dataset[0];
  const ToyHead head = ToyHead::random(6, 0.5, rng);

  TrainConfig cfg = small_config();
  cfg.weights.lambda_sr = 0.6;
  cfg.weights.lambda_gtv_fine = 1.4;
  cfg.weights.lambda_gtv_coarse = 0.3;
  cfg.weights.lambda_eq = 0.8;

  Rng plan_rng(17);
  const auto plan = model::make_step_plan(head, s.features, s.image, cfg, plan_rng);
  const auto breakdown =
      model::objective_under_plan(head, s.features, s.image, cfg, plan);

  // main branch terms via the reference loops
  const auto fw = model::forward(head, s.features, s.image);
  const auto w = graph::tokencut_affinity(s.features, cfg.weights.tau,
                                          cfg.weights.epsilon_aff);
  double ncut = ref::soft_ncut_naive(w, fw.s_coarse.data, cfg.weights.eps_div);
  double gtv_c = ref::gtv_loss_naive(graph::gtv_coarse_weights(w, 4, 4),
                                     fw.s_coarse.data);
  double gtv_f = ref::gtv_loss_naive(
      graph::gtv_fine_weights(s.image, cfg.weights.sigma), fw.s_fine.data);
  double sr = ref::sr_loss_naive(fw.s_fine, fw.s_coarse, 8);

  // crop branch terms
  const FeatureMap fc =
      tensor::crop_zoom_features(s.features, plan.rect, 32, 32);
  const Image ic =
      tensor::resize_bilinear(tensor::crop(s.image, plan.rect), 32, 32);
  const auto fwc = model::forward(head, fc, ic);
  const auto wc = graph::tokencut_affinity(fc, cfg.weights.tau,
                                           cfg.weights.epsilon_aff);
  ncut += ref::soft_ncut_naive(wc, fwc.s_coarse.data, cfg.weights.eps_div);
  gtv_c += ref::gtv_loss_naive(graph::gtv_coarse_weights(wc, 4, 4),
                               fwc.s_coarse.data);
  gtv_f += ref::gtv_loss_naive(
      graph::gtv_fine_weights(ic, cfg.weights.sigma), fwc.s_fine.data);
  sr += ref::sr_loss_naive(fwc.s_fine, fwc.s_coarse, 8);

  // consistency term against the frozen teacher
  const Mask student = tensor::crop_zoom_mask(fw.s_fine, plan.rect);
  const double eq = ref::mse_naive(student, plan.teacher);

  CHECK(breakdown.ncut == doctest::Approx(ncut).epsilon(1e-10));
  CHECK(breakdown.gtv_coarse == doctest::Approx(gtv_c).epsilon(1e-10));
  CHECK(breakdown.gtv_fine == doctest::Approx(gtv_f).epsilon(1e-10));
  CHECK(breakdown.sr == doctest::Approx(sr).epsilon(1e-10));
  CHECK(breakdown.eq == doctest::Approx(eq).epsilon(1e-10));
  const double total = ncut + 0.3 * gtv_c + 1.4 * gtv_f + 0.6 * sr + 0.8 * eq;
  CHECK(breakdown.total == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("backward: matches finite differences, tricks active") {
  Rng rng(86);
  const auto dataset = model::make_synthetic_dataset(2, 32, 32, 12);

  for (int trial = 0; trial < 4; ++trial) {
    const model::Sample& s = dataset[static_cast<std::size_t>(trial % 2)];
    ToyHead head = ToyHead::random(6, 0.4, rng);

    TrainConfig cfg = small_config();
    cfg.weights.lambda_eq = 0.5 + 0.5 * trial;
    cfg.weights.lambda_sr = 0.8;
    cfg.weights.lambda_gtv_fine = 1.2;
    cfg.weights.lambda_gtv_coarse = 0.4;
    cfg.crop_trick = true;
    cfg.gf_trick = (trial % 2) == 0;

    Rng plan_rng(100 + trial);
    const auto plan =
        model::make_step_plan(head, s.features, s.image, cfg, plan_rng);
    const auto eval =
        model::evaluate_under_plan(head, s.features, s.image, cfg, plan);

    const auto numeric = ref::finite_difference(
        [&](const std::vector<double>& params) {
          ToyHead probe = head;
          probe.unpack(params);
          return model::objective_under_plan(probe, s.features, s.image, cfg,
                                             plan)
              .total;
        },
        head.pack(), 1e-5);
    CHECK(testutil::grad_close(eval.grad, numeric, 1e-4));
  }
}

TEST_CASE("backward: zero gradient at the symmetric stationary point") {
  Rng rng(87);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 13);
  const model::Sample& s = dataset[0];
  // the zero head outputs exactly 0.5 everywhere: every loss term sits at a
  // symmetric saddle and the analytic gradient vanishes identically
  TrainConfig cfg = small_config();
  Rng step_rng(5);
  const auto grad =
      model::backward(ToyHead::zeros(6), s.features, s.image, cfg, step_rng);
  double norm = 0.0;
  for (double g : grad) norm += g * g;
  CHECK(std::sqrt(norm) <= 1e-8);
}

TEST_CASE("stop_gradient_check: zero deviation, measurable negative control") {
  Rng rng(88);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 14);
  const model::Sample& s = dataset[0];
  const ToyHead head = ToyHead::random(6, 0.5, rng);

  TrainConfig cfg = small_config();
  Rng check_rng(21);
  const auto report =
      model::stop_gradient_check(head, s.features, s.image, cfg, check_rng);
  CHECK(report.max_abs_deviation == 0.0);
  CHECK(report.negative_control_deviation > 1e-9);
}

TEST_CASE("stop_gradient_check: lambda_eq = 0 silences both deviations") {
  Rng rng(89);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 15);
  const model::Sample& s = dataset[0];
  const ToyHead head = ToyHead::random(6, 0.5, rng);

  TrainConfig cfg = small_config();
  cfg.weights.lambda_eq = 0.0;
  Rng check_rng(22);
  const auto report =
      model::stop_gradient_check(head, s.features, s.image, cfg, check_rng);
  CHECK(report.max_abs_deviation == 0.0);
  CHECK(report.negative_control_deviation == 0.0);
}

TEST_CASE("make_synthetic_dataset: reproducible for a fixed seed") {
  const auto a = model::make_synthetic_dataset(4, 32, 32, 77);
  const auto b = model::make_synthetic_dataset(4, 32, 32, 77);
  CHECK(dataset_digest(a) == dataset_digest(b));
  const auto c = model::make_synthetic_dataset(4, 32, 32, 78);
  CHECK(dataset_digest(a) != dataset_digest(c));
}

TEST_CASE("make_synthetic_dataset: blob area fractions within bounds") {
  model::SyntheticParams params;
  const auto dataset = model::make_synthetic_dataset(12, 64, 64, 5, params);
  for (const auto& sample : dataset) {
    double area = 0.0;
    for (double v : sample.gt.data) area += v;
    const double frac = area / (64.0 * 64.0);
    CHECK(frac >= params.min_area_fraction);
    CHECK(frac <= params.max_area_fraction);
  }
}

TEST_CASE("make_synthetic_dataset: feature channel 0 carries the blob") {
  const auto dataset = model::make_synthetic_dataset(6, 64, 64, 6);
  for (const auto& sample : dataset) {
    // threshold channel 0 at its median, upsample, compare against gt
    const int gh = sample.features.grid_h;
    const int gw = sample.features.grid_w;
    std::vector<double> ch0;
    for (int r = 0; r < gh; ++r)
      for (int c = 0; c < gw; ++c) ch0.push_back(sample.features.at(r, c, 0));
    std::vector<double> sorted = ch0;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double median = sorted[sorted.size() / 2];

    Mask coarse = Mask::zeros(gh, gw);
    for (std::size_t i = 0; i < ch0.size(); ++i)
      coarse.data[i] = ch0[i] > median ? 1.0 : 0.0;
    const Mask up = tensor::resize_nearest(coarse, 64, 64);
    const double iou = metrics::iou(metrics::binarize(up, 0.5),
                                    metrics::binarize(sample.gt, 0.5));
    CHECK(iou >= 0.5);
  }
}

TEST_CASE("train: zero learning rate leaves parameters unchanged") {
  Rng rng(90);
  const auto dataset = model::make_synthetic_dataset(2, 32, 32, 16);
  ToyHead init = ToyHead::random(6, 0.3, rng);
  TrainConfig cfg = small_config();
  cfg.crop_trick = false;  // per-sample terms are then rect-independent
  cfg.step_count = 6;
  cfg.learning_rate = 0.0;
  const auto result = model::train(init, dataset, cfg);
  CHECK(result.head.pack() == init.pack());
  for (std::size_t i = 2; i < result.trace.size(); ++i)
    CHECK(result.trace[i].total == result.trace[i - 2].total);
}

TEST_CASE("train: identical seeds give bit-identical traces") {
  const auto dataset = model::make_synthetic_dataset(3, 32, 32, 17);
  TrainConfig cfg = small_config();
  cfg.step_count = 25;
  cfg.seed = 42;
  const auto a = model::train(ToyHead::seeded(6, cfg.seed), dataset, cfg);
  const auto b = model::train(ToyHead::seeded(6, cfg.seed), dataset, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i)
    CHECK(a.trace[i].total == b.trace[i].total);
  CHECK(a.head.pack() == b.head.pack());
}

TEST_CASE("train: two-blob synthetic reaches IoU >= 0.9 within 500 steps") {
  model::SyntheticParams params;
  params.two_blob_prob = 1.0;
  const auto dataset = model::make_synthetic_dataset(6, 64, 64, 19, params);
  TrainConfig cfg;  // library defaults: both tricks on
  cfg.step_count = 500;
  cfg.seed = 3;
  const auto result =
      model::train(ToyHead::seeded(params.feat_dim, cfg.seed), dataset, cfg);
  const double iou = model::evaluate_mean_iou(result.head, dataset, cfg);
  CHECK(iou >= 0.9);
}

TEST_CASE("train: smoothed loss trace is non-increasing on the fixture") {
  // dataset of 10 so the window-10 moving average is epoch-aligned
  const auto dataset = model::make_synthetic_dataset(10, 64, 64, 20);
  TrainConfig cfg;  // default configuration
  cfg.step_count = 300;
  cfg.seed = 4;
  const auto result = model::train(ToyHead::seeded(6, cfg.seed), dataset, cfg);

  std::vector<double> ma;
  double window = 0.0;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    window += result.trace[i].total;
    if (i >= 10) window -= result.trace[i - 10].total;
    if (i >= 9) ma.push_back(window / 10.0);
  }
  for (std::size_t i = 1; i < ma.size(); ++i)
    CHECK(ma[i] <= ma[i - 1] + 1e-6);
}

TEST_CASE("train: Adam optimizer also drives the loss down") {
  const auto dataset = model::make_synthetic_dataset(4, 32, 32, 21);
  TrainConfig cfg = small_config();
  cfg.optimizer = model::Optimizer::kAdam;
  cfg.learning_rate = 0.02;
  cfg.step_count = 120;
  cfg.seed = 9;
  const auto result = model::train(ToyHead::seeded(6, cfg.seed), dataset, cfg);
  const double first = result.trace.front().total;
  const double last = result.trace.back().total;
  CHECK(last < first);
}

TEST_CASE("train: divergence aborts with the offending step index") {
  Rng rng(91);
  const auto dataset = model::make_synthetic_dataset(1, 32, 32, 22);
  TrainConfig cfg = small_config();
  cfg.learning_rate = 1e300;  // parameter overflow produces non-finite loss
  cfg.step_count = 10;
  try {
    const auto result = model::train(ToyHead::random(6, 0.5, rng), dataset, cfg);
    // overflow can also saturate the logistic without producing NaN;
    // if training survived, every recorded loss must still be finite
    for (const auto& b : result.trace) CHECK(std::isfinite(b.total));
  } catch (const NumericalError& e) {
    CHECK(doctest::Contains("step").checkWith(e.what()));
  }
}
