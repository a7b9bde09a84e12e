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

#include <string>

#include <json.hpp>

namespace segkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Each command consumes a flat JSON parameter object (the exact object that
// lands in the run manifest) and returns an exit code. `rerun` re-dispatches
// a stored manifest, which is why parameters are JSON rather than structs.
int run_refine(const nlohmann::json& params);
int run_eval_saliency(const nlohmann::json& params);
int run_eval_detect(const nlohmann::json& params);
int run_train_toy(const nlohmann::json& params);
int run_losses(const nlohmann::json& params);
int run_rerun(const std::string& manifest_path, const std::string& out_override);

int dispatch(const std::string& command, const nlohmann::json& params);

}  // namespace segkit::cli
