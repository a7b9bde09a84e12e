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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "segkit/graph.hpp"
#include "segkit/rng.hpp"
#include "segkit/types.hpp"

namespace segkit::testutil {

inline Mask random_mask(int h, int w, Rng& rng) {
  Mask m = Mask::zeros(h, w);
  for (double& v : m.data) v = rng.uniform01();
  return m;
}

inline Image random_image(int h, int w, int c, Rng& rng) {
  Image img = Image::zeros(h, w, c);
  for (double& v : img.data) v = rng.uniform01();
  return img;
}

inline FeatureMap random_features(int gh, int gw, int d, Rng& rng) {
  FeatureMap f = FeatureMap::zeros(gh, gw, d);
  for (double& v : f.data) v = rng.uniform(-1.0, 1.0);
  return f;
}

inline graph::AffinityMatrix random_affinity(int n, Rng& rng,
                                             double sparsity = 0.0) {
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = rng.uniform01();
      if (sparsity > 0.0 && rng.uniform01() < sparsity) v = 0.0;
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  return w;
}

// two dense blocks joined by cross-weight eps
inline graph::AffinityMatrix planted_two_block(int n_a, int n_b, double eps,
                                               Rng& rng) {
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n_a + n_b);
  const int n = n_a + n_b;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const bool same = (i < n_a) == (j < n_a);
      const double v = same ? rng.uniform(0.5, 1.0) : eps;
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  return w;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// relative error with a small absolute floor for near-zero entries
inline bool grad_close(const std::vector<double>& analytic,
                       const std::vector<double>& numeric, double rel_tol,
                       double abs_floor = 1e-7) {
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    if (diff > rel_tol * scale + abs_floor) return false;
  }
  return true;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("segkit_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string str() const { return path_.string(); }
  std::filesystem::path path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace segkit::testutil
