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

#include "segkit/ref.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace segkit::ref {

Grid integral_image_naive(const Mask& x) {
  Grid out = Grid::zeros(x.height, x.width);
  for (int i = 0; i < x.height; ++i)
    for (int j = 0; j < x.width; ++j) {
      double sum = 0.0;
      for (int a = 0; a <= i; ++a)
        for (int b = 0; b <= j; ++b) sum += x.at(a, b);
      out.at(i, j) = sum;
    }
  return out;
}

Mask box_filter_naive(const Mask& x, int radius) {
  Mask out = Mask::zeros(x.height, x.width);
  for (int r = 0; r < x.height; ++r)
    for (int c = 0; c < x.width; ++c) {
      double sum = 0.0;
      int count = 0;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= x.height || cc >= x.width) continue;
          sum += x.at(rr, cc);
          ++count;
        }
      out.at(r, c) = sum / count;
    }
  return out;
}

Mask guided_filter_naive(const Mask& p, const Image& guide, int radius,
                         double eps) {
  const int h = p.height;
  const int w = p.width;
  Grid a = Grid::zeros(h, w);
  Grid b = Grid::zeros(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double sg = 0.0, sp = 0.0, sgg = 0.0, sgp = 0.0;
      int count = 0;
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          const double g = guide.at(rr, cc, 0);
          const double q = p.at(rr, cc);
          sg += g;
          sp += q;
          sgg += g * g;
          sgp += g * q;
          ++count;
        }
      const double mean_g = sg / count;
      const double mean_p = sp / count;
      const double var_g = sgg / count - mean_g * mean_g;
      const double cov_gp = sgp / count - mean_g * mean_p;
      a.at(r, c) = cov_gp / (var_g + eps);
      b.at(r, c) = mean_p - a.at(r, c) * mean_g;
    }

  Mask out = Mask::zeros(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double sa = 0.0, sb = 0.0;
      int count = 0;
      // windows centered at k contain i exactly when k is within radius
      for (int dr = -radius; dr <= radius; ++dr)
        for (int dc = -radius; dc <= radius; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          sa += a.at(rr, cc);
          sb += b.at(rr, cc);
          ++count;
        }
      const double q = (sa / count) * guide.at(r, c, 0) + sb / count;
      out.at(r, c) = q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
    }
  return out;
}

double soft_ncut_naive(const graph::AffinityMatrix& w,
                       const std::vector<double>& s, double eps_div) {
  const int n = w.n;
  double num_a = 0.0, den_a = 0.0, num_b = 0.0, den_b = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      num_a += s[static_cast<std::size_t>(i)] * w.at(i, j) *
               (1.0 - s[static_cast<std::size_t>(j)]);
      den_a += s[static_cast<std::size_t>(i)] * w.at(i, j);
      num_b += (1.0 - s[static_cast<std::size_t>(i)]) * w.at(i, j) *
               s[static_cast<std::size_t>(j)];
      den_b += (1.0 - s[static_cast<std::size_t>(i)]) * w.at(i, j);
    }
  return num_a / (den_a + eps_div) + num_b / (den_b + eps_div);
}

double gtv_loss_naive(const std::vector<graph::Edge>& edges,
                      const std::vector<double>& s) {
  double sum = 0.0;
  for (const graph::Edge& e : edges) {
    const double d = s[static_cast<std::size_t>(e.i)] -
                     s[static_cast<std::size_t>(e.j)];
    sum += e.a * d * d;
  }
  return 0.5 * sum;
}

double sr_loss_naive(const Mask& fine, const CoarseMask& coarse, int factor) {
  double sum = 0.0;
  for (int gr = 0; gr < coarse.grid_h; ++gr)
    for (int gc = 0; gc < coarse.grid_w; ++gc) {
      double block = 0.0;
      for (int r = 0; r < factor; ++r)
        for (int c = 0; c < factor; ++c)
          block += fine.at(gr * factor + r, gc * factor + c);
      block /= static_cast<double>(factor) * factor;
      const double d = block - coarse.at(gr, gc);
      sum += d * d;
    }
  return sum;
}

double mse_naive(const Mask& a, const Mask& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data.size());
}

double discrete_cut_naive(const graph::AffinityMatrix& w,
                          const graph::Partition& p) {
  double sum = 0.0;
  for (int i = 0; i < w.n; ++i)
    for (int j = 0; j < w.n; ++j)
      if (p.assignment[static_cast<std::size_t>(i)] &&
          !p.assignment[static_cast<std::size_t>(j)])
        sum += w.at(i, j);
  return sum;
}

double discrete_assoc_naive(const graph::AffinityMatrix& w,
                            const graph::Partition& p, bool side_a) {
  double sum = 0.0;
  for (int i = 0; i < w.n; ++i) {
    if ((p.assignment[static_cast<std::size_t>(i)] != 0) != side_a) continue;
    for (int j = 0; j < w.n; ++j) sum += w.at(i, j);
  }
  return sum;
}

graph::AffinityMatrix tokencut_affinity_naive(const FeatureMap& features,
                                              double tau, double epsilon_aff) {
  const int n = features.node_count();
  const int d = features.dim;
  graph::AffinityMatrix w = graph::AffinityMatrix::zeros(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double dot = 0.0, ni = 0.0, nj = 0.0;
      for (int k = 0; k < d; ++k) {
        const double fi = features.data[static_cast<std::size_t>(i) * d + k];
        const double fj = features.data[static_cast<std::size_t>(j) * d + k];
        dot += fi * fj;
        ni += fi * fi;
        nj += fj * fj;
      }
      const double denom = std::sqrt(ni) * std::sqrt(nj);
      const double cos_ij = denom > 0.0 ? dot / denom : 0.0;
      w.at(i, j) = cos_ij > tau ? 1.0 : epsilon_aff;
    }
  return w;
}

graph::BipartitionResult brute_force_min_ncut_serial(
    const graph::AffinityMatrix& w) {
  const int n = w.n;
  detail::require(n >= 2 && n <= 16, "brute force: n must be within [2,16]");

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> best_assign;
  for (std::uint32_t code = 1; code < (1u << (n - 1)); ++code) {
    graph::Partition p;
    p.assignment.assign(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n - 1; ++i)
      p.assignment[static_cast<std::size_t>(i)] =
          static_cast<std::uint8_t>((code >> i) & 1u);
    const double cut = discrete_cut_naive(w, p);
    const double assoc_a = discrete_assoc_naive(w, p, true);
    const double assoc_b = discrete_assoc_naive(w, p, false);
    if (assoc_a <= 0.0 || assoc_b <= 0.0) continue;
    const double value = cut / assoc_a + cut / assoc_b;
    // canonical representative: node 0 labeled false
    std::vector<std::uint8_t> canon = p.assignment;
    if (canon[0])
      for (auto& v : canon) v = static_cast<std::uint8_t>(v == 0);
    if (value < best || (value == best && canon < best_assign)) {
      best = value;
      best_assign = std::move(canon);
    }
  }
  if (std::isinf(best))
    throw NumericalError("brute force: no finite bipartition value");
  graph::BipartitionResult out;
  out.partition.assignment = best_assign;
  out.ncut = best;
  return out;
}

metrics::Components connected_components_flood(const metrics::BinaryMask& m) {
  metrics::Components out;
  out.labels.assign(m.bits.size(), -1);
  const int h = m.height, w = m.width;
  std::vector<int> stack;
  for (int seed = 0; seed < h * w; ++seed) {
    if (!m.bits[static_cast<std::size_t>(seed)] ||
        out.labels[static_cast<std::size_t>(seed)] >= 0)
      continue;
    const int label = out.count++;
    stack.push_back(seed);
    out.labels[static_cast<std::size_t>(seed)] = label;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const int r = i / w, c = i % w;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= h || cc >= w) continue;
          const int j = rr * w + cc;
          if (m.bits[static_cast<std::size_t>(j)] &&
              out.labels[static_cast<std::size_t>(j)] < 0) {
            out.labels[static_cast<std::size_t>(j)] = label;
            stack.push_back(j);
          }
        }
    }
  }
  return out;
}

double max_f_beta_exhaustive(const Mask& pred, const metrics::BinaryMask& gt,
                             double beta_sq) {
  double best = 0.0;
  for (int k = 0; k < 255; ++k) {
    const double t = k / 255.0;
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
      const bool predicted = pred.data[i] > t;
      const bool actual = gt.bits[i] != 0;
      if (predicted && actual) ++tp;
      if (predicted && !actual) ++fp;
      if (!predicted && actual) ++fn;
    }
    if (tp + fp == 0 || tp + fn == 0) continue;
    const double precision = tp / (tp + fp);
    const double recall = tp / (tp + fn);
    if (beta_sq * precision + recall <= 0.0) continue;
    const double f = (1.0 + beta_sq) * precision * recall /
                     (beta_sq * precision + recall);
    best = std::max(best, f);
  }
  return best;
}

std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
  std::vector<double> grad(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace segkit::ref
