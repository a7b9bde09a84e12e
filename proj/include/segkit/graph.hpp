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

#include "segkit/types.hpp"

namespace segkit::graph {

/// Dense symmetric non-negative affinity matrix over n nodes.
struct AffinityMatrix {
  int n = 0;
  std::vector<double> w;  // row-major n x n

  static AffinityMatrix zeros(int n) {
    detail::require(n >= 1, "AffinityMatrix: n must be positive");
    AffinityMatrix m;
    m.n = n;
    m.w.assign(static_cast<std::size_t>(n) * n, 0.0);
    return m;
  }

  double& at(int i, int j) { return w[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return w[static_cast<std::size_t>(i) * n + j]; }

  /// Full row sum (degree), diagonal included.
  double degree(int i) const;

  void validate() const;
};

/// Two-way node assignment; true selects side A.
struct Partition {
  std::vector<std::uint8_t> assignment;

  int size() const { return static_cast<int>(assignment.size()); }
  int count_a() const;
  bool non_degenerate() const {
    const int a = count_a();
    return a > 0 && a < size();
  }
  Partition complement() const;
  bool operator==(const Partition&) const = default;
};

/// Weights and scalar knobs of the combined loss.
struct LossWeights {
  double lambda_sr = 1.0;
  double lambda_gtv_fine = 1.0;
  double lambda_gtv_coarse = 1.0;
  double lambda_eq = 1.0;
  double sigma = 0.1;        // fine GTV kernel bandwidth
  double tau = 0.2;          // affinity threshold
  double epsilon_aff = 1e-5; // affinity floor
  double eps_div = 1e-8;     // denominator stabilizer

  void validate() const {
    detail::require(sigma > 0.0, "LossWeights: sigma must be > 0");
    detail::require(eps_div >= 0.0, "LossWeights: eps_div must be >= 0");
    detail::require(lambda_sr >= 0.0 && lambda_gtv_fine >= 0.0 &&
                        lambda_gtv_coarse >= 0.0 && lambda_eq >= 0.0,
                    "LossWeights: lambdas must be >= 0");
  }
};

/// Sum of weights crossing the partition.
double discrete_cut(const AffinityMatrix& w, const Partition& p);

/// Sum of all weights from the chosen side to every node.
double discrete_assoc(const AffinityMatrix& w, const Partition& p, bool side_a);

/// cut(A,B)/assoc(A,V) + cut(B,A)/assoc(B,V).
double discrete_ncut(const AffinityMatrix& w, const Partition& p);

/// Thresholded cosine affinity: 1 where the normalized inner product exceeds
/// tau, epsilon_aff otherwise. Features are L2-normalized first.
AffinityMatrix tokencut_affinity(const FeatureMap& features, double tau,
                                 double epsilon_aff);

struct SoftNcutValue {
  double value = 0.0;
  /// Set when a raw denominator is <= eps_div (all-zero / all-one masks);
  /// the value is then dominated by the stabilizer.
  bool degenerate = false;
};

/// Relaxed Ncut: S^T W (1-S) / (S^T W 1) + (1-S)^T W S / ((1-S)^T W 1),
/// both denominators stabilized with eps_div.
SoftNcutValue soft_ncut_loss(const AffinityMatrix& w,
                             const std::vector<double>& s, double eps_div);

/// Analytic gradient of soft_ncut_loss with respect to s.
std::vector<double> soft_ncut_grad(const AffinityMatrix& w,
                                   const std::vector<double>& s,
                                   double eps_div);

/// One undirected edge with weight a.
struct Edge {
  int i = 0;
  int j = 0;
  double a = 0.0;
};

/// exp(-|x_i - x_j|^2 / sigma) over the 4-neighbor pixel grid of img.
std::vector<Edge> gtv_fine_weights(const Image& img, double sigma);

/// Affinity entries restricted to 4-neighbor adjacency of the h' x w' grid.
std::vector<Edge> gtv_coarse_weights(const AffinityMatrix& w, int grid_h,
                                     int grid_w);

/// 1/2 sum over undirected edges of a_ij (s_i - s_j)^2.
double gtv_loss(const std::vector<Edge>& edges, const std::vector<double>& s);

/// grad_i = sum_j a_ij (s_i - s_j).
std::vector<double> gtv_grad(const std::vector<Edge>& edges,
                             const std::vector<double>& s);

/// Non-overlapping factor x factor block means.
CoarseMask downsample_mean(const Mask& fine, int factor);

struct SrLoss {
  double value = 0.0;
  std::vector<double> grad_fine;    // w.r.t. the fine mask (pixel grid)
  std::vector<double> grad_coarse;  // w.r.t. the coarse mask
};

/// Sum of squared differences between down(fine) and coarse.
SrLoss sr_loss(const Mask& fine, const CoarseMask& coarse, int factor);

/// Pre-weighting values of the four combined-loss terms.
struct SempartTerms {
  double ncut = 0.0;
  double gtv_coarse = 0.0;
  double gtv_fine = 0.0;
  double sr = 0.0;
};

struct SempartBreakdown {
  SempartTerms terms;  // pre-weighting
  double total = 0.0;
};

/// total = ncut + l_gtv_coarse * gtv_coarse + l_gtv_fine * gtv_fine + l_sr * sr.
SempartBreakdown sempart_total_loss(const SempartTerms& terms,
                                    const LossWeights& weights);

/// Convenience evaluator computing all four terms from raw inputs.
SempartBreakdown evaluate_sempart(const AffinityMatrix& w,
                                  const CoarseMask& s_coarse,
                                  const std::vector<Edge>& fine_edges,
                                  const Mask& s_fine, int factor,
                                  const LossWeights& weights);

struct BipartitionResult {
  Partition partition;
  double ncut = 0.0;
};

/// Relaxed spectral bipartition: solves (D - W) y = lambda D y via the
/// normalized symmetric form, takes the second-smallest eigenvector, sweeps
/// every threshold split of the sorted entries and keeps the split with the
/// smallest discrete Ncut.
BipartitionResult spectral_bipartition(const AffinityMatrix& w);

/// Exhaustive minimum over all non-trivial bipartitions (n <= 16). Ties are
/// broken toward the lexicographically smallest assignment whose first
/// element is false.
BipartitionResult brute_force_min_ncut(const AffinityMatrix& w);

}  // namespace segkit::graph
