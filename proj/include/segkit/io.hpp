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
#include <string>
#include <vector>

#include "segkit/types.hpp"

namespace segkit::io {

/// Reads an 8-bit grayscale or RGB PNG; values map v/255. Palette images are
/// expanded to RGB and alpha is stripped; 16-bit depth is rejected.
Image read_png_image(const std::string& path);

/// Reads a PNG as a mask; RGB inputs are grayscale-converted (Rec.601).
Mask read_png_mask(const std::string& path);

/// Writes an 8-bit PNG; values map round(v*255) with clamping.
void write_png(const std::string& path, const Image& img);
void write_png(const std::string& path, const Mask& mask);

/// Raw contents of an "STNS" tensor container:
///   magic "STNS" | u32le ndim | ndim x u32le dims | row-major f32le payload.
/// Round-trips are bit-exact.
struct TensorData {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

TensorData read_tensor(const std::string& path);
void write_tensor(const std::string& path, const TensorData& tensor);

FeatureMap tensor_to_feature_map(const TensorData& tensor);  // ndim == 3
Mask tensor_to_mask(const TensorData& tensor);               // ndim == 2
TensorData to_tensor(const FeatureMap& features);
TensorData to_tensor(const Mask& mask);

FeatureMap read_feature_map(const std::string& path);
Mask read_mask_tensor(const std::string& path);

}  // namespace segkit::io
