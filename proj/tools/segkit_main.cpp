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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

#include "commands.hpp"
#include "segkit/types.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"segkit: saliency mask refinement, losses, training and "
               "evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(segkit::kVersion));

  std::string command;
  json params;

  // refine
  {
    auto* sub = app.add_subcommand(
        "refine", "Guided-filter refinement of predicted masks");
    auto masks = std::make_shared<std::string>();
    auto images = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto radius = std::make_shared<int>(4);
    auto eps = std::make_shared<double>(1e-4);
    auto jobs = std::make_shared<int>(0);
    auto overlay = std::make_shared<bool>(false);
    sub->add_option("--masks", *masks, "Directory of mask PNGs")->required();
    sub->add_option("--images", *images, "Directory of image PNGs")->required();
    sub->add_option("--out", *out, "Output directory")->required();
    sub->add_option("--radius", *radius, "Guided filter radius");
    sub->add_option("--eps", *eps, "Guided filter regularization");
    sub->add_option("--jobs", *jobs, "Worker threads (default: processors)");
    sub->add_flag("--overlay", *overlay, "Also write mask/image overlays");
    sub->callback([&, masks, images, out, radius, eps, jobs, overlay] {
      command = "refine";
      params = {{"masks", *masks}, {"images", *images}, {"out", *out},
                {"radius", *radius}, {"eps", *eps}, {"overlay", *overlay}};
      if (*jobs > 0) params["jobs"] = *jobs;
    });
  }

  // eval-saliency
  {
    auto* sub = app.add_subcommand("eval-saliency",
                                   "Acc / IoU / max F_beta over a dataset");
    auto pred = std::make_shared<std::string>();
    auto gt = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto csv = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.5);
    auto beta_sq = std::make_shared<double>(0.3);
    auto jobs = std::make_shared<int>(0);
    sub->add_option("--pred", *pred, "Directory of predicted mask PNGs")->required();
    sub->add_option("--gt", *gt, "Directory of ground-truth mask PNGs")->required();
    sub->add_option("--out", *out, "Output JSON report path")->required();
    sub->add_option("--csv", *csv, "Optional CSV report path");
    sub->add_option("--threshold", *threshold, "Binarization threshold");
    sub->add_option("--beta-sq", *beta_sq, "beta^2 for F_beta");
    sub->add_option("--jobs", *jobs, "Worker threads");
    sub->callback([&, pred, gt, out, csv, threshold, beta_sq, jobs] {
      command = "eval-saliency";
      params = {{"pred", *pred}, {"gt", *gt}, {"out", *out},
                {"threshold", *threshold}, {"beta_sq", *beta_sq}};
      if (!csv->empty()) params["csv"] = *csv;
      if (*jobs > 0) params["jobs"] = *jobs;
    });
  }

  // eval-detect
  {
    auto* sub = app.add_subcommand("eval-detect",
                                   "CorLoc single-object detection protocol");
    auto pred = std::make_shared<std::string>();
    auto boxes = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.5);
    sub->add_option("--pred", *pred, "Directory of predicted mask PNGs")->required();
    sub->add_option("--boxes", *boxes,
                    "Ground-truth boxes file: stem t l b r [t l b r ...]")
        ->required();
    sub->add_option("--out", *out, "Output JSON report path")->required();
    sub->add_option("--threshold", *threshold, "Binarization threshold");
    sub->callback([&, pred, boxes, out, threshold] {
      command = "eval-detect";
      params = {{"pred", *pred}, {"boxes", *boxes}, {"out", *out},
                {"threshold", *threshold}};
    });
  }

  // train-toy
  {
    auto* sub = app.add_subcommand(
        "train-toy", "Train the toy head on a synthetic dataset");
    auto config_path = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto ablate = std::make_shared<std::string>();
    sub->add_option("--config", *config_path, "JSON config file");
    sub->add_option("--out", *out, "Output directory")->required();
    sub->add_option("--ablate", *ablate, "Trick switches, e.g. crop=off,gf=on");
    sub->callback([&, config_path, out, ablate] {
      command = "train-toy";
      json config = json::object();
      if (!config_path->empty()) {
        std::ifstream in(*config_path);
        if (!in) throw CLI::ValidationError("--config", "cannot open file");
        try {
          in >> config;
        } catch (const json::exception& e) {
          throw segkit::DataError(*config_path + ": malformed JSON: " + e.what());
        }
      }
      params = {{"out", *out}, {"config", config}};
      if (!ablate->empty()) params["ablate"] = *ablate;
    });
  }

  // losses
  {
    auto* sub = app.add_subcommand(
        "losses", "Evaluate loss terms on mask/feature/image files");
    auto fine = std::make_shared<std::string>();
    auto coarse = std::make_shared<std::string>();
    auto features = std::make_shared<std::string>();
    auto image = std::make_shared<std::string>();
    auto weights = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto terms = std::make_shared<std::vector<std::string>>();
    sub->add_option("--fine", *fine, "Fine mask PNG");
    sub->add_option("--coarse", *coarse, "Coarse mask tensor (.tns, 2-d)");
    sub->add_option("--features", *features, "Feature map tensor (.tns, 3-d)");
    sub->add_option("--image", *image, "Input image PNG");
    sub->add_option("--weights", *weights, "Loss weights JSON file");
    sub->add_option("--out", *out, "Optional output directory");
    sub->add_option("--terms", *terms,
                    "Terms to evaluate (default: ncut gtv_coarse gtv_fine sr)");
    sub->callback([&, fine, coarse, features, image, weights, out, terms] {
      command = "losses";
      params = json::object();
      if (!fine->empty()) params["fine"] = *fine;
      if (!coarse->empty()) params["coarse"] = *coarse;
      if (!features->empty()) params["features"] = *features;
      if (!image->empty()) params["image"] = *image;
      if (!weights->empty()) params["weights"] = *weights;
      if (!out->empty()) params["out"] = *out;
      if (!terms->empty()) params["terms"] = *terms;
    });
  }

  // rerun
  std::string rerun_manifest;
  std::string rerun_out;
  {
    auto* sub = app.add_subcommand("rerun",
                                   "Re-execute a command from its manifest");
    sub->add_option("manifest", rerun_manifest, "Path to manifest.json")->required();
    sub->add_option("--out", rerun_out, "Override the output location");
    sub->callback([&] { command = "rerun"; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? segkit::cli::kExitOk : segkit::cli::kExitUsage;
  } catch (const segkit::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return segkit::cli::kExitData;
  }

  try {
    if (command == "rerun")
      return segkit::cli::run_rerun(rerun_manifest, rerun_out);
    return segkit::cli::dispatch(command, params);
  } catch (const segkit::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return segkit::cli::kExitNumerical;
  } catch (const segkit::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return segkit::cli::kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return segkit::cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return segkit::cli::kExitData;
  }
}
