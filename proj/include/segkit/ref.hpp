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

// Serial reference implementations. These are deliberately naive - direct
// window sums, nested loops over the defining formulas - and share no code
// with the OpenMP kernels they check. Tests use them as oracles; the
// benchmark target compares against them. Not part of the production
// surface.

#include <functional>
#include <vector>

#include "segkit/graph.hpp"
#include "segkit/metrics.hpp"
#include "segkit/types.hpp"

namespace segkit::ref {

/// Direct nested-loop summed-area table.
Grid integral_image_naive(const Mask& x);

/// O(r^2)-per-pixel sliding-window means, border-clipped.
Mask box_filter_naive(const Mask& x, int radius);

/// Per-window guided filter: a_k, b_k from explicit sums over each clipped
/// window, then q_i averaged over the windows containing i.
Mask guided_filter_naive(const Mask& p, const Image& guide, int radius,
                         double eps);

/// Triple-loop evaluation of the relaxed Ncut.
double soft_ncut_naive(const graph::AffinityMatrix& w,
                       const std::vector<double>& s, double eps_div);

/// Loop evaluation of 1/2 sum a_ij (s_i - s_j)^2.
double gtv_loss_naive(const std::vector<graph::Edge>& edges,
                      const std::vector<double>& s);

/// Loop evaluation of |down(fine) - coarse|^2 with block means.
double sr_loss_naive(const Mask& fine, const CoarseMask& coarse, int factor);

/// Loop mean squared error.
double mse_naive(const Mask& a, const Mask& b);

/// Nested-loop cut and assoc.
double discrete_cut_naive(const graph::AffinityMatrix& w,
                          const graph::Partition& p);
double discrete_assoc_naive(const graph::AffinityMatrix& w,
                            const graph::Partition& p, bool side_a);

/// Pairwise-dot-product affinity, no shared code with the kernel.
graph::AffinityMatrix tokencut_affinity_naive(const FeatureMap& features,
                                              double tau, double epsilon_aff);

/// Serial exhaustive min-Ncut (same tie rule as the parallel version).
graph::BipartitionResult brute_force_min_ncut_serial(
    const graph::AffinityMatrix& w);

/// Stack-based flood fill, 8-connectivity, row-major seed order.
metrics::Components connected_components_flood(const metrics::BinaryMask& m);

/// Exhaustive per-threshold precision/recall evaluation of max F_beta.
double max_f_beta_exhaustive(const Mask& pred, const metrics::BinaryMask& gt,
                             double beta_sq);

/// Central finite differences with step h.
std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

}  // namespace segkit::ref
