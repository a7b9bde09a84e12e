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

#include "commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "segkit/filtering.hpp"
#include "segkit/graph.hpp"
#include "segkit/io.hpp"
#include "segkit/manifest.hpp"
#include "segkit/metrics.hpp"
#include "segkit/model.hpp"
#include "segkit/tensor.hpp"
#include "segkit/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace segkit::cli {

namespace {

std::vector<std::string> png_stems(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir + ": not a directory");
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().extension() == ".png")
      stems.push_back(entry.path().stem().string());
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

// stems present in both directories, in sorted order; mismatches reported
struct Pairing {
  std::vector<std::string> paired;
  std::vector<std::string> unpaired;
};

Pairing pair_stems(const std::string& dir_a, const std::string& dir_b) {
  const auto a = png_stems(dir_a);
  const auto b = png_stems(dir_b);
  Pairing out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out.paired));
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(out.unpaired));
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << text;
}

void write_json_file(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

manifest::RunManifest make_manifest(const std::string& command,
                                    const json& params, std::uint64_t seed) {
  manifest::RunManifest m;
  m.command = command;
  m.parameters = params;
  m.seed = seed;
  m.tool_version = kVersion;
  m.timestamp = manifest::iso8601_now();
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Image overlay_mask(const Image& img, const Mask& mask) {
  Image out = img;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const double alpha = 0.5 * mask.at(r, c);
      const double tint[3] = {1.0, 0.1, 0.1};
      for (int ch = 0; ch < 3; ++ch)
        out.at(r, c, ch) = (1.0 - alpha) * img.at(r, c, ch) + alpha * tint[ch];
    }
  return out;
}

graph::LossWeights weights_from_json(const json& j) {
  graph::LossWeights w;
  w.lambda_sr = j.value("lambda_sr", w.lambda_sr);
  w.lambda_gtv_fine = j.value("lambda_gtv_fine", w.lambda_gtv_fine);
  w.lambda_gtv_coarse = j.value("lambda_gtv_coarse", w.lambda_gtv_coarse);
  w.lambda_eq = j.value("lambda_eq", w.lambda_eq);
  w.sigma = j.value("sigma", w.sigma);
  w.tau = j.value("tau", w.tau);
  w.epsilon_aff = j.value("epsilon_aff", w.epsilon_aff);
  w.eps_div = j.value("eps_div", w.eps_div);
  return w;
}

json weights_to_json(const graph::LossWeights& w) {
  return {{"lambda_sr", w.lambda_sr},
          {"lambda_gtv_fine", w.lambda_gtv_fine},
          {"lambda_gtv_coarse", w.lambda_gtv_coarse},
          {"lambda_eq", w.lambda_eq},
          {"sigma", w.sigma},
          {"tau", w.tau},
          {"epsilon_aff", w.epsilon_aff},
          {"eps_div", w.eps_div}};
}

model::TrainConfig train_config_from_json(const json& j) {
  model::TrainConfig cfg;
  cfg.step_count = j.value("steps", cfg.step_count);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  const std::string opt = j.value("optimizer", std::string("gd"));
  if (opt == "gd")
    cfg.optimizer = model::Optimizer::kGradientDescent;
  else if (opt == "adam")
    cfg.optimizer = model::Optimizer::kAdam;
  else
    throw DataError("train config: unknown optimizer '" + opt + "'");
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("weights")) cfg.weights = weights_from_json(j.at("weights"));
  if (j.contains("crop_policy")) {
    const json& p = j.at("crop_policy");
    cfg.crop_policy.min_area_fraction =
        p.value("min_area_fraction", cfg.crop_policy.min_area_fraction);
    cfg.crop_policy.max_area_fraction =
        p.value("max_area_fraction", cfg.crop_policy.max_area_fraction);
    cfg.crop_policy.min_aspect = p.value("min_aspect", cfg.crop_policy.min_aspect);
    cfg.crop_policy.max_aspect = p.value("max_aspect", cfg.crop_policy.max_aspect);
  }
  if (j.contains("gf")) {
    cfg.gf.radius = j.at("gf").value("radius", cfg.gf.radius);
    cfg.gf.eps = j.at("gf").value("eps", cfg.gf.eps);
  }
  cfg.patch_factor = j.value("patch_factor", cfg.patch_factor);
  cfg.crop_trick = j.value("crop_trick", cfg.crop_trick);
  cfg.gf_trick = j.value("gf_trick", cfg.gf_trick);
  cfg.crop_trains_net = j.value("crop_trains_net", cfg.crop_trains_net);
  return cfg;
}

json train_config_to_json(const model::TrainConfig& cfg) {
  return {{"steps", cfg.step_count},
          {"learning_rate", cfg.learning_rate},
          {"optimizer",
           cfg.optimizer == model::Optimizer::kGradientDescent ? "gd" : "adam"},
          {"seed", cfg.seed},
          {"weights", weights_to_json(cfg.weights)},
          {"crop_policy",
           {{"min_area_fraction", cfg.crop_policy.min_area_fraction},
            {"max_area_fraction", cfg.crop_policy.max_area_fraction},
            {"min_aspect", cfg.crop_policy.min_aspect},
            {"max_aspect", cfg.crop_policy.max_aspect}}},
          {"gf", {{"radius", cfg.gf.radius}, {"eps", cfg.gf.eps}}},
          {"patch_factor", cfg.patch_factor},
          {"crop_trick", cfg.crop_trick},
          {"gf_trick", cfg.gf_trick},
          {"crop_trains_net", cfg.crop_trains_net}};
}

void ensure_out_dir(const std::string& out) {
  fs::create_directories(out);
  if (!fs::is_directory(out)) throw DataError(out + ": cannot create directory");
}

}  // namespace

int run_refine(const json& params) {
  const std::string masks = params.at("masks").get<std::string>();
  const std::string images = params.at("images").get<std::string>();
  const std::string out = params.at("out").get<std::string>();
  filtering::GuidedFilterParams gf;
  gf.radius = params.value("radius", 4);
  gf.eps = params.value("eps", 1e-4);
  const bool overlay = params.value("overlay", false);
  const int jobs = params.value("jobs", omp_get_max_threads());

  const Pairing pairing = pair_stems(masks, images);
  for (const auto& stem : pairing.unpaired)
    std::cerr << "warning: unpaired stem '" << stem << "' skipped\n";
  if (pairing.paired.empty()) throw DataError("no pairs found");

  ensure_out_dir(out);

  manifest::RunManifest mf = make_manifest("refine", params, 0);
  for (const auto& stem : pairing.paired) {
    mf.input_digests["masks/" + stem + ".png"] =
        manifest::fnv1a64_file(masks + "/" + stem + ".png");
    mf.input_digests["images/" + stem + ".png"] =
        manifest::fnv1a64_file(images + "/" + stem + ".png");
  }

  const int n = static_cast<int>(pairing.paired.size());
  std::vector<std::string> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int i = 0; i < n; ++i) {
    const std::string& stem = pairing.paired[static_cast<std::size_t>(i)];
    try {
      const Mask mask = io::read_png_mask(masks + "/" + stem + ".png");
      const Image image = io::read_png_image(images + "/" + stem + ".png");
      const Mask refined = filtering::refine_mask(mask, image, gf);
      io::write_png(out + "/" + stem + ".png", refined);
      if (overlay)
        io::write_png(out + "/" + stem + "_overlay.png",
                      overlay_mask(image.channels == 3
                                       ? image
                                       : tensor::to_grayscale(image),
                                   refined));
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }

  int failures = 0;
  for (int i = 0; i < n; ++i) {
    if (!errors[static_cast<std::size_t>(i)].empty()) {
      std::cerr << "error: " << pairing.paired[static_cast<std::size_t>(i)]
                << ": " << errors[static_cast<std::size_t>(i)] << "\n";
      ++failures;
    }
  }
  mf.save(out + "/manifest.json");
  if (failures == n) throw DataError("all pairs failed");
  std::cout << "refined " << (n - failures) << " mask(s) -> " << out << "\n";
  return kExitOk;
}

int run_eval_saliency(const json& params) {
  const std::string pred_dir = params.at("pred").get<std::string>();
  const std::string gt_dir = params.at("gt").get<std::string>();
  const std::string out_path = params.at("out").get<std::string>();
  const std::string csv_path = params.value("csv", std::string());
  const double threshold = params.value("threshold", 0.5);
  const double beta_sq = params.value("beta_sq", 0.3);
  const int jobs = params.value("jobs", omp_get_max_threads());

  const Pairing pairing = pair_stems(pred_dir, gt_dir);
  if (pairing.paired.empty()) throw DataError("no pairs found");

  manifest::RunManifest mf = make_manifest("eval-saliency", params, 0);
  for (const auto& stem : pairing.paired) {
    mf.input_digests["pred/" + stem + ".png"] =
        manifest::fnv1a64_file(pred_dir + "/" + stem + ".png");
    mf.input_digests["gt/" + stem + ".png"] =
        manifest::fnv1a64_file(gt_dir + "/" + stem + ".png");
  }

  const int n = static_cast<int>(pairing.paired.size());
  struct Row {
    bool ok = false;
    std::string error;
    metrics::SaliencyReport report;
  };
  std::vector<Row> rows(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (int i = 0; i < n; ++i) {
    Row& row = rows[static_cast<std::size_t>(i)];
    const std::string& stem = pairing.paired[static_cast<std::size_t>(i)];
    try {
      const Mask pred = io::read_png_mask(pred_dir + "/" + stem + ".png");
      const Mask gt_soft = io::read_png_mask(gt_dir + "/" + stem + ".png");
      row.report = metrics::saliency_report(
          pred, metrics::binarize(gt_soft, 0.5), threshold, beta_sq);
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  json images = json::array();
  json errors = json::array();
  double sum_acc = 0.0, sum_iou = 0.0, sum_f = 0.0;
  int counted = 0, f_counted = 0;
  for (int i = 0; i < n; ++i) {
    const Row& row = rows[static_cast<std::size_t>(i)];
    const std::string& stem = pairing.paired[static_cast<std::size_t>(i)];
    if (!row.ok) {
      errors.push_back({{"id", stem}, {"error", row.error}});
      continue;
    }
    json entry = {{"id", stem},
                  {"acc", row.report.acc},
                  {"iou", row.report.iou}};
    if (row.report.f_beta_defined) {
      entry["max_f_beta"] = row.report.max_f_beta;
      sum_f += row.report.max_f_beta;
      ++f_counted;
    } else {
      entry["max_f_beta"] = nullptr;
      std::cerr << "warning: " << stem
                << ": empty ground truth, max F_beta undefined; excluded from "
                   "the aggregate\n";
    }
    images.push_back(entry);
    sum_acc += row.report.acc;
    sum_iou += row.report.iou;
    ++counted;
  }
  for (const auto& stem : pairing.unpaired)
    errors.push_back({{"id", stem}, {"error", "unpaired file"}});

  json report;
  report["images"] = images;
  report["errors"] = errors;
  if (counted > 0) {
    report["aggregate"] = {
        {"count", counted},
        {"acc", sum_acc / counted},
        {"iou", sum_iou / counted},
        {"max_f_beta", f_counted > 0 ? json(sum_f / f_counted) : json(nullptr)},
    };
  }
  write_json_file(out_path, report);

  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << "id,acc,iou,max_f_beta\n";
    for (const auto& entry : images) {
      csv << entry.at("id").get<std::string>() << ","
          << fmt(entry.at("acc").get<double>()) << ","
          << fmt(entry.at("iou").get<double>()) << ",";
      if (entry.at("max_f_beta").is_null())
        csv << "undefined";
      else
        csv << fmt(entry.at("max_f_beta").get<double>());
      csv << "\n";
    }
    if (counted > 0) {
      csv << "__aggregate__," << fmt(sum_acc / counted) << ","
          << fmt(sum_iou / counted) << ",";
      if (f_counted > 0)
        csv << fmt(sum_f / f_counted);
      else
        csv << "undefined";
      csv << "\n";
    }
    write_text(csv_path, csv.str());
  }

  const fs::path manifest_path = fs::path(out_path).parent_path() / "manifest.json";
  mf.save(manifest_path.string());
  if (counted == 0) throw DataError("all pairs failed");
  std::cout << "evaluated " << counted << " image(s); mean IoU "
            << fmt(sum_iou / counted) << "\n";
  return kExitOk;
}

int run_eval_detect(const json& params) {
  const std::string pred_dir = params.at("pred").get<std::string>();
  const std::string boxes_path = params.at("boxes").get<std::string>();
  const std::string out_path = params.at("out").get<std::string>();
  const double t_bin = params.value("threshold", 0.5);

  std::ifstream boxes_file(boxes_path);
  if (!boxes_file) throw DataError(boxes_path + ": cannot open");

  struct Entry {
    std::string stem;
    std::vector<metrics::BBox> boxes;
  };
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(boxes_file, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Entry entry;
    if (!(ss >> entry.stem))
      throw DataError(boxes_path + ":" + std::to_string(line_no) +
                      ": cannot parse stem");
    std::vector<long long> nums;
    long long v;
    while (ss >> v) nums.push_back(v);
    if (!ss.eof())
      throw DataError(boxes_path + ":" + std::to_string(line_no) +
                      ": non-integer box coordinate");
    if (nums.empty() || nums.size() % 4 != 0)
      throw DataError(boxes_path + ":" + std::to_string(line_no) +
                      ": expected stem followed by 4k integers");
    for (std::size_t k = 0; k + 3 < nums.size(); k += 4) {
      metrics::BBox box;
      box.top = static_cast<int>(nums[k]);
      box.left = static_cast<int>(nums[k + 1]);
      box.bottom = static_cast<int>(nums[k + 2]);
      box.right = static_cast<int>(nums[k + 3]);
      if (box.bottom < box.top || box.right < box.left)
        throw DataError(boxes_path + ":" + std::to_string(line_no) +
                        ": degenerate box");
      entry.boxes.push_back(box);
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty()) throw DataError(boxes_path + ": no box entries");

  manifest::RunManifest mf = make_manifest("eval-detect", params, 0);
  mf.input_digests["boxes"] = manifest::fnv1a64_file(boxes_path);

  json images = json::array();
  int hits = 0;
  for (const Entry& entry : entries) {
    const std::string pred_path = pred_dir + "/" + entry.stem + ".png";
    json row = {{"id", entry.stem}, {"hit", false}};
    if (!fs::exists(pred_path)) {
      std::cerr << "warning: missing prediction for '" << entry.stem
                << "', counted as failure\n";
      row["error"] = "missing prediction";
      images.push_back(row);
      continue;
    }
    mf.input_digests["pred/" + entry.stem + ".png"] =
        manifest::fnv1a64_file(pred_path);
    const Mask pred = io::read_png_mask(pred_path);
    const auto box = metrics::largest_bbox_component(metrics::binarize(pred, t_bin));
    if (box) {
      double best_iou = 0.0;
      for (const metrics::BBox& gt : entry.boxes)
        best_iou = std::max(best_iou, metrics::bbox_iou(*box, gt));
      row["iou"] = best_iou;
      row["box"] = {box->top, box->left, box->bottom, box->right};
      if (best_iou >= 0.5) {
        row["hit"] = true;
        ++hits;
      }
    } else {
      row["iou"] = 0.0;
    }
    images.push_back(row);
  }

  json report;
  report["images"] = images;
  report["corloc"] = static_cast<double>(hits) / static_cast<double>(entries.size());
  write_json_file(out_path, report);

  const fs::path manifest_path = fs::path(out_path).parent_path() / "manifest.json";
  mf.save(manifest_path.string());
  std::cout << "corloc " << fmt(report["corloc"].get<double>()) << " over "
            << entries.size() << " image(s)\n";
  return kExitOk;
}

int run_train_toy(const json& params) {
  const std::string out = params.at("out").get<std::string>();
  json config = params.value("config", json::object());

  // dataset block
  const json dataset_cfg = config.value("dataset", json::object());
  const int n = dataset_cfg.value("n", 20);
  const int height = dataset_cfg.value("height", 64);
  const int width = dataset_cfg.value("width", 64);
  const std::uint64_t data_seed = dataset_cfg.value("seed", 7ULL);

  model::TrainConfig cfg = train_config_from_json(config.value("train", json::object()));

  // ablation switch string like "crop=off,gf=on"
  const std::string ablate = params.value("ablate", std::string());
  if (!ablate.empty()) {
    std::istringstream ss(ablate);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw DataError("--ablate: expected key=on|off, got '" + item + "'");
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      const bool on = value == "on";
      if (!on && value != "off")
        throw DataError("--ablate: expected on or off, got '" + value + "'");
      if (key == "crop")
        cfg.crop_trick = on;
      else if (key == "gf")
        cfg.gf_trick = on;
      else
        throw DataError("--ablate: unknown trick '" + key + "'");
    }
  }

  model::SyntheticParams synth;
  synth.patch_factor = cfg.patch_factor;
  synth.feat_dim = dataset_cfg.value("feat_dim", synth.feat_dim);

  ensure_out_dir(out);

  const model::Dataset dataset =
      model::make_synthetic_dataset(n, height, width, data_seed, synth);
  const model::ToyHead init = model::ToyHead::seeded(synth.feat_dim, cfg.seed);
  const model::TrainResult result = model::train(init, dataset, cfg);

  // per-step loss trace
  std::ostringstream trace;
  trace << "step,ncut,gtv_coarse,gtv_fine,sr,eq,total\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const model::Breakdown& b = result.trace[i];
    trace << i << "," << fmt(b.ncut) << "," << fmt(b.gtv_coarse) << ","
          << fmt(b.gtv_fine) << "," << fmt(b.sr) << "," << fmt(b.eq) << ","
          << fmt(b.total) << "\n";
  }
  write_text(out + "/trace.csv", trace.str());

  // final predictions and per-image evaluation
  json eval_images = json::array();
  double sum_iou = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const model::Sample& sample = dataset[i];
    const Mask pred =
        model::predict_saliency(result.head, sample.features, sample.image, cfg);
    char name[32];
    std::snprintf(name, sizeof(name), "pred_%03zu.png", i);
    io::write_png(out + "/" + name, pred);
    const double iou_i = metrics::iou(metrics::binarize(pred, 0.5),
                                      metrics::binarize(sample.gt, 0.5));
    sum_iou += iou_i;
    eval_images.push_back({{"id", i}, {"iou", iou_i}});
  }
  const double mean_iou = sum_iou / static_cast<double>(dataset.size());

  json head_json = {{"feat_dim", result.head.feat_dim},
                    {"w_coarse", result.head.w_coarse},
                    {"b_coarse", result.head.b_coarse},
                    {"w_fine", result.head.w_fine},
                    {"b_fine", result.head.b_fine}};
  write_json_file(out + "/head.json", head_json);
  write_json_file(out + "/eval.json",
                  {{"images", eval_images}, {"mean_iou", mean_iou}});

  // the manifest records the fully resolved configuration
  json resolved = params;
  resolved["config"] = {{"dataset",
                         {{"n", n},
                          {"height", height},
                          {"width", width},
                          {"seed", data_seed},
                          {"feat_dim", synth.feat_dim}}},
                        {"train", train_config_to_json(cfg)}};
  resolved.erase("ablate");  // already folded into the train block
  manifest::RunManifest mf = make_manifest("train-toy", resolved, cfg.seed);
  mf.save(out + "/manifest.json");

  std::cout << "final mean IoU " << fmt(mean_iou) << " over " << dataset.size()
            << " image(s)\n";
  return kExitOk;
}

int run_losses(const json& params) {
  const std::string fine_path = params.value("fine", std::string());
  const std::string coarse_path = params.value("coarse", std::string());
  const std::string features_path = params.value("features", std::string());
  const std::string image_path = params.value("image", std::string());
  const std::string weights_path = params.value("weights", std::string());
  const std::string out = params.value("out", std::string());

  graph::LossWeights weights;
  if (!weights_path.empty()) {
    std::ifstream in(weights_path);
    if (!in) throw DataError(weights_path + ": cannot open");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError(weights_path + ": malformed JSON: " + e.what());
    }
    weights = weights_from_json(j);
  }

  std::vector<std::string> terms =
      params.value("terms", std::vector<std::string>{"ncut", "gtv_coarse",
                                                     "gtv_fine", "sr"});

  const bool want_ncut = std::count(terms.begin(), terms.end(), "ncut") > 0;
  const bool want_gtv_coarse =
      std::count(terms.begin(), terms.end(), "gtv_coarse") > 0;
  const bool want_gtv_fine =
      std::count(terms.begin(), terms.end(), "gtv_fine") > 0;
  const bool want_sr = std::count(terms.begin(), terms.end(), "sr") > 0;

  if ((want_ncut || want_gtv_coarse) && features_path.empty())
    throw DataError("coarse terms requested but --features not given");
  if ((want_ncut || want_gtv_coarse || want_sr) && coarse_path.empty())
    throw DataError("coarse terms requested but --coarse not given");
  if (want_gtv_fine && image_path.empty())
    throw DataError("gtv_fine requested but --image not given");
  if ((want_gtv_fine || want_sr) && fine_path.empty())
    throw DataError("fine terms requested but --fine not given");

  manifest::RunManifest mf = make_manifest("losses", params, 0);
  json breakdown;
  double total = 0.0;

  std::optional<graph::AffinityMatrix> affinity;
  std::optional<CoarseMask> coarse;
  std::optional<Mask> fine;
  FeatureMap features;

  if (!features_path.empty()) {
    features = io::read_feature_map(features_path);
    mf.input_digests["features"] = manifest::fnv1a64_file(features_path);
    affinity = graph::tokencut_affinity(features, weights.tau, weights.epsilon_aff);
  }
  if (!coarse_path.empty()) {
    const Mask m = io::read_mask_tensor(coarse_path);
    CoarseMask cm;
    cm.grid_h = m.height;
    cm.grid_w = m.width;
    cm.data = m.data;
    coarse = std::move(cm);
    mf.input_digests["coarse"] = manifest::fnv1a64_file(coarse_path);
  }
  if (!fine_path.empty()) {
    fine = io::read_png_mask(fine_path);
    mf.input_digests["fine"] = manifest::fnv1a64_file(fine_path);
  }

  if (want_ncut) {
    detail::require_data(affinity.has_value() && coarse.has_value(),
                         "ncut needs --features and --coarse");
    detail::require_data(affinity->n == coarse->grid_h * coarse->grid_w,
                         "feature grid and coarse mask sizes differ");
    const auto v = graph::soft_ncut_loss(*affinity, coarse->data, weights.eps_div);
    breakdown["ncut"] = {{"value", v.value},
                         {"weight", 1.0},
                         {"degenerate", v.degenerate}};
    total += v.value;
  }
  if (want_gtv_coarse) {
    const auto edges =
        graph::gtv_coarse_weights(*affinity, coarse->grid_h, coarse->grid_w);
    const double v = graph::gtv_loss(edges, coarse->data);
    breakdown["gtv_coarse"] = {{"value", v},
                               {"weight", weights.lambda_gtv_coarse}};
    total += weights.lambda_gtv_coarse * v;
  }
  if (want_gtv_fine) {
    const Image image = io::read_png_image(image_path);
    mf.input_digests["image"] = manifest::fnv1a64_file(image_path);
    detail::require_data(image.height == fine->height && image.width == fine->width,
                         "image and fine mask sizes differ");
    const auto edges = graph::gtv_fine_weights(image, weights.sigma);
    const double v = graph::gtv_loss(edges, fine->data);
    breakdown["gtv_fine"] = {{"value", v}, {"weight", weights.lambda_gtv_fine}};
    total += weights.lambda_gtv_fine * v;
  }
  if (want_sr) {
    detail::require_data(fine->height % coarse->grid_h == 0 &&
                             fine->width % coarse->grid_w == 0 &&
                             fine->height / coarse->grid_h ==
                                 fine->width / coarse->grid_w,
                         "fine/coarse dims incompatible with a uniform factor");
    const int factor = fine->height / coarse->grid_h;
    const double v = graph::sr_loss(*fine, *coarse, factor).value;
    breakdown["sr"] = {{"value", v}, {"weight", weights.lambda_sr}};
    total += weights.lambda_sr * v;
  }

  json report = {{"terms", breakdown},
                 {"weighted_total", total},
                 {"weights", weights_to_json(weights)}};
  std::cout << report.dump(2) << "\n";
  if (!out.empty()) {
    ensure_out_dir(out);
    write_json_file(out + "/losses.json", report);
    mf.save(out + "/manifest.json");
  }
  return kExitOk;
}

int run_rerun(const std::string& manifest_path, const std::string& out_override) {
  const manifest::RunManifest mf = manifest::RunManifest::load(manifest_path);
  json params = mf.parameters;
  if (!out_override.empty()) {
    if (params.contains("out")) params["out"] = out_override;
    // report-style commands write next to the named output file
    if (mf.command == "eval-saliency" || mf.command == "eval-detect") {
      ensure_out_dir(out_override);
      params["out"] = out_override + "/" +
                      fs::path(params.at("out").get<std::string>())
                          .filename()
                          .string();
      if (params.contains("csv") && !params.at("csv").get<std::string>().empty())
        params["csv"] = out_override + "/" +
                        fs::path(params.at("csv").get<std::string>())
                            .filename()
                            .string();
    }
  }
  return dispatch(mf.command, params);
}

int dispatch(const std::string& command, const json& params) {
  if (command == "refine") return run_refine(params);
  if (command == "eval-saliency") return run_eval_saliency(params);
  if (command == "eval-detect") return run_eval_detect(params);
  if (command == "train-toy") return run_train_toy(params);
  if (command == "losses") return run_losses(params);
  throw DataError("unknown command in manifest: '" + command + "'");
}

}  // namespace segkit::cli
