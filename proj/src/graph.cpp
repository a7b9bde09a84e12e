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

#include "segkit/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "segkit/parallel.hpp"

namespace segkit::graph {

namespace {

void check_mask_vector(const AffinityMatrix& w, const std::vector<double>& s) {
  detail::require(static_cast<int>(s.size()) == w.n,
                  "soft ncut: mask vector length must equal node count");
}

// Lexicographic order on assignments, element 0 first, false < true.
bool lex_less(const std::vector<std::uint8_t>& a,
              const std::vector<std::uint8_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

// Canonical representative of a bipartition: the side containing node 0 is
// labeled false.
std::vector<std::uint8_t> canonical_assignment(std::uint32_t code, int n) {
  std::vector<std::uint8_t> a(static_cast<std::size_t>(n), 0);
  const bool flip = (code & 1u) != 0;
  for (int i = 0; i < n; ++i) {
    const bool bit = i < n - 1 ? ((code >> i) & 1u) != 0 : false;
    a[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(bit != flip);
  }
  return a;
}

double ncut_of_code(const AffinityMatrix& w, const std::vector<double>& degree,
                    double total_degree, std::uint32_t code, int n) {
  // code bit i selects side A for node i (node n-1 always side B)
  double cut = 0.0;
  double assoc_a = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    if (((code >> i) & 1u) == 0) continue;
    assoc_a += degree[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const bool j_in_a = j < n - 1 && ((code >> j) & 1u) != 0;
      if (!j_in_a) cut += w.at(i, j);
    }
  }
  const double assoc_b = total_degree - assoc_a;
  return cut / assoc_a + cut / assoc_b;
}

}  // namespace

double AffinityMatrix::degree(int i) const {
  double d = 0.0;
  for (int j = 0; j < n; ++j) d += at(i, j);
  return d;
}

void AffinityMatrix::validate() const {
  detail::require(w.size() == static_cast<std::size_t>(n) * n,
                  "AffinityMatrix: data length mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = at(i, j);
      detail::require(std::isfinite(v) && v >= 0.0,
                      "AffinityMatrix: weights must be finite and non-negative");
      detail::require(v == at(j, i), "AffinityMatrix: weights must be symmetric");
    }
}

int Partition::count_a() const {
  int a = 0;
  for (std::uint8_t v : assignment) a += v != 0;
  return a;
}

Partition Partition::complement() const {
  Partition p;
  p.assignment.resize(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    p.assignment[i] = static_cast<std::uint8_t>(assignment[i] == 0);
  return p;
}

double discrete_cut(const AffinityMatrix& w, const Partition& p) {
  detail::require(p.size() == w.n, "discrete_cut: partition size mismatch");
  detail::require(p.non_degenerate(),
                  "discrete_cut: both sides must be non-empty");
  const int n = w.n;
  return par::block_sum(static_cast<std::int64_t>(n) * n, [&](std::int64_t k) {
    const int i = static_cast<int>(k / n);
    const int j = static_cast<int>(k % n);
    return (p.assignment[static_cast<std::size_t>(i)] != 0 &&
            p.assignment[static_cast<std::size_t>(j)] == 0)
               ? w.at(i, j)
               : 0.0;
  });
}

double discrete_assoc(const AffinityMatrix& w, const Partition& p, bool side_a) {
  detail::require(p.size() == w.n, "discrete_assoc: partition size mismatch");
  const int in_side = side_a ? p.count_a() : p.size() - p.count_a();
  detail::require(in_side > 0, "discrete_assoc: side must be non-empty");
  const int n = w.n;
  return par::block_sum(static_cast<std::int64_t>(n) * n, [&](std::int64_t k) {
    const int i = static_cast<int>(k / n);
    const bool in_a = p.assignment[static_cast<std::size_t>(i)] != 0;
    return in_a == side_a ? w.at(i, static_cast<int>(k % n)) : 0.0;
  });
}

double discrete_ncut(const AffinityMatrix& w, const Partition& p) {
  const double cut = discrete_cut(w, p);
  const double assoc_a = discrete_assoc(w, p, true);
  const double assoc_b = discrete_assoc(w, p, false);
  if (assoc_a <= 0.0 || assoc_b <= 0.0)
    throw NumericalError("discrete_ncut: degenerate partition (zero assoc)");
  return cut / assoc_a + cut / assoc_b;
}

AffinityMatrix tokencut_affinity(const FeatureMap& features, double tau,
                                 double epsilon_aff) {
  const int n = features.node_count();
  const int d = features.dim;
  // L2-normalize so tau thresholds cosine similarity
  std::vector<double> unit(static_cast<std::size_t>(n) * d);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* f = &features.data[static_cast<std::size_t>(i) * d];
    double norm2 = 0.0;
    for (int k = 0; k < d; ++k) norm2 += f[k] * f[k];
    const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
    for (int k = 0; k < d; ++k)
      unit[static_cast<std::size_t>(i) * d + k] = f[k] * inv;
  }

  AffinityMatrix w = AffinityMatrix::zeros(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double dot = 0.0;
      const double* fi = &unit[static_cast<std::size_t>(i) * d];
      const double* fj = &unit[static_cast<std::size_t>(j) * d];
      for (int k = 0; k < d; ++k) dot += fi[k] * fj[k];
      const double v = dot > tau ? 1.0 : epsilon_aff;
      w.at(i, j) = v;
      w.at(j, i) = v;
    }
  }
  return w;
}

namespace {

// u = W s, ubar = W (1-s), v = W 1. Computing ubar with its own matvec (not
// as v - u) keeps the loss exactly symmetric under s -> 1-s: the flipped
// call produces the identical numbers with the two ratio terms swapped.
struct NcutParts {
  std::vector<double> u, ubar, v;
  double num_a = 0.0, num_b = 0.0, den_a = 0.0, den_b = 0.0;
};

NcutParts ncut_parts(const AffinityMatrix& w, const std::vector<double>& s) {
  const int n = w.n;
  NcutParts parts;
  parts.u.resize(static_cast<std::size_t>(n));
  parts.ubar.resize(static_cast<std::size_t>(n));
  parts.v.resize(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    double ui = 0.0, ubari = 0.0, vi = 0.0;
    for (int j = 0; j < n; ++j) {
      const double wij = w.at(i, j);
      ui += wij * s[static_cast<std::size_t>(j)];
      ubari += wij * (1.0 - s[static_cast<std::size_t>(j)]);
      vi += wij;
    }
    parts.u[static_cast<std::size_t>(i)] = ui;
    parts.ubar[static_cast<std::size_t>(i)] = ubari;
    parts.v[static_cast<std::size_t>(i)] = vi;
  }
  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    parts.num_a += s[k] * parts.ubar[k];          // S^T W (1 - S)
    parts.den_a += s[k] * parts.v[k];             // S^T W 1
    parts.num_b += (1.0 - s[k]) * parts.u[k];     // (1-S)^T W S
    parts.den_b += (1.0 - s[k]) * parts.v[k];     // (1-S)^T W 1
  }
  return parts;
}

}  // namespace

SoftNcutValue soft_ncut_loss(const AffinityMatrix& w,
                             const std::vector<double>& s, double eps_div) {
  check_mask_vector(w, s);
  const NcutParts parts = ncut_parts(w, s);
  SoftNcutValue out;
  out.degenerate = parts.den_a <= eps_div || parts.den_b <= eps_div;
  out.value = parts.num_a / (parts.den_a + eps_div) +
              parts.num_b / (parts.den_b + eps_div);
  return out;
}

std::vector<double> soft_ncut_grad(const AffinityMatrix& w,
                                   const std::vector<double>& s,
                                   double eps_div) {
  check_mask_vector(w, s);
  const int n = w.n;
  const NcutParts parts = ncut_parts(w, s);
  const double da = parts.den_a + eps_div;
  const double db = parts.den_b + eps_div;

  // both numerators differentiate to ubar_i - u_i (W symmetric);
  // d den_a/d s = v, d den_b/d s = -v
  std::vector<double> grad(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double dnum = parts.ubar[k] - parts.u[k];
    grad[k] = (dnum * da - parts.num_a * parts.v[k]) / (da * da) +
              (dnum * db + parts.num_b * parts.v[k]) / (db * db);
  }
  return grad;
}

std::vector<Edge> gtv_fine_weights(const Image& img, double sigma) {
  detail::require(sigma > 0.0, "gtv_fine_weights: sigma must be > 0");
  const int h = img.height;
  const int w = img.width;
  const int ch = img.channels;
  // right edges first then down edges would interleave badly per pixel;
  // emit per pixel (right, down) in row-major order for a deterministic list
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2) * h * w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int i = r * w + c;
      if (c + 1 < w) edges.push_back({i, i + 1, 0.0});
      if (r + 1 < h) edges.push_back({i, i + w, 0.0});
    }
  }
  const std::int64_t m = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < m; ++e) {
    Edge& edge = edges[static_cast<std::size_t>(e)];
    double d2 = 0.0;
    for (int k = 0; k < ch; ++k) {
      const double diff = img.data[static_cast<std::size_t>(edge.i) * ch + k] -
                          img.data[static_cast<std::size_t>(edge.j) * ch + k];
      d2 += diff * diff;
    }
    edge.a = std::exp(-d2 / sigma);
  }
  return edges;
}

std::vector<Edge> gtv_coarse_weights(const AffinityMatrix& w, int grid_h,
                                     int grid_w) {
  detail::require(grid_h * grid_w == w.n,
                  "gtv_coarse_weights: grid does not match affinity size");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(2) * w.n);
  for (int r = 0; r < grid_h; ++r) {
    for (int c = 0; c < grid_w; ++c) {
      const int i = r * grid_w + c;
      if (c + 1 < grid_w) edges.push_back({i, i + 1, w.at(i, i + 1)});
      if (r + 1 < grid_h) edges.push_back({i, i + grid_w, w.at(i, i + grid_w)});
    }
  }
  return edges;
}

double gtv_loss(const std::vector<Edge>& edges, const std::vector<double>& s) {
  return 0.5 * par::block_sum(static_cast<std::int64_t>(edges.size()),
                              [&](std::int64_t e) {
                                const Edge& edge = edges[static_cast<std::size_t>(e)];
                                const double d = s[static_cast<std::size_t>(edge.i)] -
                                                 s[static_cast<std::size_t>(edge.j)];
                                return edge.a * d * d;
                              });
}

std::vector<double> gtv_grad(const std::vector<Edge>& edges,
                             const std::vector<double>& s) {
  std::vector<double> grad(s.size(), 0.0);
  for (const Edge& e : edges) {
    const double d = e.a * (s[static_cast<std::size_t>(e.i)] -
                            s[static_cast<std::size_t>(e.j)]);
    grad[static_cast<std::size_t>(e.i)] += d;
    grad[static_cast<std::size_t>(e.j)] -= d;
  }
  return grad;
}

CoarseMask downsample_mean(const Mask& fine, int factor) {
  detail::require(factor >= 1, "downsample_mean: factor must be >= 1");
  detail::require(fine.height % factor == 0 && fine.width % factor == 0,
                  "downsample_mean: dims must be divisible by factor");
  const int gh = fine.height / factor;
  const int gw = fine.width / factor;
  CoarseMask out = CoarseMask::constant(gh, gw, 0.0);
  const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
#pragma omp parallel for schedule(static)
  for (int gr = 0; gr < gh; ++gr) {
    for (int gc = 0; gc < gw; ++gc) {
      double sum = 0.0;
      for (int r = 0; r < factor; ++r)
        for (int c = 0; c < factor; ++c)
          sum += fine.at(gr * factor + r, gc * factor + c);
      out.at(gr, gc) = sum * inv_area;
    }
  }
  return out;
}

SrLoss sr_loss(const Mask& fine, const CoarseMask& coarse, int factor) {
  detail::require(fine.height == coarse.grid_h * factor &&
                      fine.width == coarse.grid_w * factor,
                  "sr_loss: shapes inconsistent with factor");
  const CoarseMask down = downsample_mean(fine, factor);
  SrLoss out;
  out.grad_fine.assign(fine.data.size(), 0.0);
  out.grad_coarse.assign(coarse.data.size(), 0.0);
  const double inv_area = 1.0 / (static_cast<double>(factor) * factor);
  double value = 0.0;
  for (int gr = 0; gr < coarse.grid_h; ++gr) {
    for (int gc = 0; gc < coarse.grid_w; ++gc) {
      const double diff = down.at(gr, gc) - coarse.at(gr, gc);
      value += diff * diff;
      out.grad_coarse[static_cast<std::size_t>(gr) * coarse.grid_w + gc] =
          -2.0 * diff;
      const double g_fine = 2.0 * diff * inv_area;
      for (int r = 0; r < factor; ++r)
        for (int c = 0; c < factor; ++c)
          out.grad_fine[static_cast<std::size_t>(gr * factor + r) * fine.width +
                        gc * factor + c] = g_fine;
    }
  }
  out.value = value;
  return out;
}

SempartBreakdown sempart_total_loss(const SempartTerms& terms,
                                    const LossWeights& weights) {
  weights.validate();
  SempartBreakdown out;
  out.terms = terms;
  out.total = terms.ncut + weights.lambda_gtv_coarse * terms.gtv_coarse +
              weights.lambda_gtv_fine * terms.gtv_fine +
              weights.lambda_sr * terms.sr;
  return out;
}

SempartBreakdown evaluate_sempart(const AffinityMatrix& w,
                                  const CoarseMask& s_coarse,
                                  const std::vector<Edge>& fine_edges,
                                  const Mask& s_fine, int factor,
                                  const LossWeights& weights) {
  SempartTerms terms;
  terms.ncut = soft_ncut_loss(w, s_coarse.data, weights.eps_div).value;
  terms.gtv_coarse =
      gtv_loss(gtv_coarse_weights(w, s_coarse.grid_h, s_coarse.grid_w),
               s_coarse.data);
  terms.gtv_fine = gtv_loss(fine_edges, s_fine.data);
  terms.sr = sr_loss(s_fine, s_coarse, factor).value;
  return sempart_total_loss(terms, weights);
}

BipartitionResult spectral_bipartition(const AffinityMatrix& w) {
  const int n = w.n;
  detail::require(n >= 2, "spectral_bipartition: need at least 2 nodes");

  std::vector<double> degree(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    degree[static_cast<std::size_t>(i)] = w.degree(i);
    if (degree[static_cast<std::size_t>(i)] <= 0.0)
      throw NumericalError("spectral_bipartition: zero-degree node " +
                           std::to_string(i));
  }

  // normalized Laplacian L = I - D^-1/2 W D^-1/2
  Eigen::MatrixXd lap(n, n);
  for (int i = 0; i < n; ++i) {
    const double di = degree[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double norm = w.at(i, j) / std::sqrt(di * degree[static_cast<std::size_t>(j)]);
      lap(i, j) = (i == j ? 1.0 : 0.0) - norm;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
  if (solver.info() != Eigen::Success)
    throw NumericalError(
        "spectral_bipartition: symmetric eigensolver did not converge within "
        "its internal iteration cap (30 sweeps per off-diagonal)");

  // second-smallest eigenvalue's vector, mapped back through D^-1/2
  std::vector<double> fiedler(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    fiedler[static_cast<std::size_t>(i)] =
        solver.eigenvectors()(i, 1) / std::sqrt(degree[static_cast<std::size_t>(i)]);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return fiedler[static_cast<std::size_t>(a)] < fiedler[static_cast<std::size_t>(b)];
  });

  const double total_degree =
      std::accumulate(degree.begin(), degree.end(), 0.0);

  // sweep the n-1 prefix splits of the sorted vector, updating cut and
  // assoc incrementally
  std::vector<double> weight_to_a(static_cast<std::size_t>(n), 0.0);
  double assoc_a = 0.0;
  double within_a = 0.0;  // total weight with both endpoints in A (diagonal included)
  double best_value = 0.0;
  int best_prefix = -1;
  for (int k = 0; k < n - 1; ++k) {
    const int x = order[static_cast<std::size_t>(k)];
    within_a += 2.0 * weight_to_a[static_cast<std::size_t>(x)] + w.at(x, x);
    assoc_a += degree[static_cast<std::size_t>(x)];
    for (int j = 0; j < n; ++j)
      weight_to_a[static_cast<std::size_t>(j)] += w.at(x, j);
    const double cut = assoc_a - within_a;
    const double assoc_b = total_degree - assoc_a;
    if (assoc_a <= 0.0 || assoc_b <= 0.0) continue;
    const double value = cut / assoc_a + cut / assoc_b;
    if (best_prefix < 0 || value < best_value) {
      best_value = value;
      best_prefix = k;
    }
  }
  if (best_prefix < 0)
    throw NumericalError("spectral_bipartition: no valid sweep split");

  BipartitionResult out;
  out.partition.assignment.assign(static_cast<std::size_t>(n), 0);
  for (int k = 0; k <= best_prefix; ++k)
    out.partition.assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
  out.ncut = best_value;
  return out;
}

BipartitionResult brute_force_min_ncut(const AffinityMatrix& w) {
  const int n = w.n;
  detail::require(n >= 2 && n <= 16,
                  "brute_force_min_ncut: n must be within [2,16]");

  std::vector<double> degree(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) degree[static_cast<std::size_t>(i)] = w.degree(i);
  const double total_degree =
      std::accumulate(degree.begin(), degree.end(), 0.0);

  const std::uint32_t count = 1u << (n - 1);  // node n-1 pinned to side B

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::uint32_t code = 0;
    std::vector<std::uint8_t> canon;
  };

  Best best;
#pragma omp parallel
  {
    Best local;
#pragma omp for schedule(static) nowait
    for (std::int64_t m = 1; m < static_cast<std::int64_t>(count); ++m) {
      const std::uint32_t code = static_cast<std::uint32_t>(m);
      const double value = ncut_of_code(w, degree, total_degree, code, n);
      if (value < local.value) {
        local.value = value;
        local.code = code;
        local.canon.clear();
      } else if (value == local.value) {
        if (local.canon.empty()) local.canon = canonical_assignment(local.code, n);
        auto canon = canonical_assignment(code, n);
        if (lex_less(canon, local.canon)) {
          local.code = code;
          local.canon = std::move(canon);
        }
      }
    }
#pragma omp critical
    {
      if (local.value < best.value) {
        best = local;
      } else if (local.value == best.value && !std::isinf(local.value)) {
        if (best.canon.empty()) best.canon = canonical_assignment(best.code, n);
        auto canon = local.canon.empty() ? canonical_assignment(local.code, n)
                                         : local.canon;
        if (lex_less(canon, best.canon)) {
          best.code = local.code;
          best.canon = std::move(canon);
        }
      }
    }
  }

  if (std::isinf(best.value))
    throw NumericalError("brute_force_min_ncut: no finite bipartition value");

  BipartitionResult out;
  out.partition.assignment = canonical_assignment(best.code, n);
  out.ncut = best.value;
  return out;
}

}  // namespace segkit::graph
