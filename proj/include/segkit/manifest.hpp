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
#include <map>
#include <string>

#include <json.hpp>

namespace segkit::manifest {

/// Record of one CLI run: the command, every resolved parameter, the seed,
/// digests of the inputs, the tool version, and a timestamp. Re-running a
/// command from its manifest reproduces the outputs byte-for-byte
/// (timestamp excluded).
struct RunManifest {
  std::string command;
  nlohmann::json parameters;  // flat key -> value map of resolved flags
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::string tool_version;
  std::string timestamp;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);
};

/// FNV-1a 64-bit digest, hex-encoded. Provenance bookkeeping, not security.
std::string fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_file(const std::string& path);

std::string iso8601_now();

}  // namespace segkit::manifest
