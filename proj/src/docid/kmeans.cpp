//
// Copyright (C) 2026 The genret Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "genret/docid/kmeans.hpp"

#include "genret/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace genret::docid {

std::size_t KMeansResult::non_empty() const {
  return static_cast<std::size_t>(std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }));
}

double inertia(std::span<const Vector> points, std::span<const std::size_t> assignments,
               std::span<const Vector> centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += (points[i] - centroids[assignments[i]]).squaredNorm();
  return total;
}

namespace {

std::vector<Vector> plus_plus_seeds(std::span<const Vector> points, std::size_t k, nn::Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Vector> centers;
  centers.push_back(points[nn::uniform_index(rng, n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = (points[i] - centers[0]).squaredNorm();
  while (centers.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      // First index whose cumulative D^2 exceeds the draw; rounding falls
      // back to the last point with positive weight.
      const double target = nn::uniform01(rng) * total;
      double cumulative = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        cumulative += d2[i];
        if (cumulative > target) break;
      }
    } else {
      pick = nn::uniform_index(rng, n);
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points[i] - centers.back()).squaredNorm());
  }
  return centers;
}

std::size_t nearest(const Vector& p, const std::vector<Vector>& centroids, const std::vector<std::size_t>& sizes,
                    bool skip_empty) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (skip_empty && sizes[c] == 0) continue;
    const double d = (p - centroids[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

void recompute(std::span<const Vector> points, const std::vector<std::size_t>& assign, std::vector<Vector>& centroids,
               std::vector<std::size_t>& sizes) {
  const Eigen::Index dim = points.front().size();
  for (auto& c : centroids) c = Vector::Zero(dim);
  std::fill(sizes.begin(), sizes.end(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    centroids[assign[i]] += points[i];
    ++sizes[assign[i]];
  }
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (sizes[c]) centroids[c] /= static_cast<double>(sizes[c]);
  }
}

// Moves the farthest member of the largest cluster into each empty cluster.
void repair_empty(std::span<const Vector> points, std::vector<std::size_t>& assign, std::vector<Vector>& centroids,
                  std::vector<std::size_t>& sizes) {
  for (std::size_t empty = 0; empty < sizes.size(); ++empty) {
    if (sizes[empty] != 0) continue;
    const auto largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    if (sizes[largest] < 2) return;
    std::size_t far = points.size();
    double far_d = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (assign[i] != largest) continue;
      const double d = (points[i] - centroids[largest]).squaredNorm();
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.size()) continue;  // no spread to split
    assign[far] = empty;
    recompute(points, assign, centroids, sizes);
  }
}

}  // namespace

KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw ConfigError("kmeans: k must be at least 1");
  if (points.empty()) throw DataError("kmeans: no points");
  const std::size_t n = points.size();
  const Eigen::Index dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DimensionError("kmeans: points have different dimensions");
  }

  KMeansResult r;
  r.assignments.assign(n, 0);
  r.centroids.assign(k, Vector());
  r.sizes.assign(k, 0);
  if (k >= n) {
    for (std::size_t i = 0; i < n; ++i) {
      r.assignments[i] = i;
      r.centroids[i] = points[i];
      r.sizes[i] = 1;
    }
    return r;
  }

  nn::Rng rng(seed);
  std::vector<Vector> centroids = plus_plus_seeds(points, k, rng);
  std::vector<std::size_t> sizes(k, 1);
  std::vector<std::size_t> assign(n, 0);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest(points[i], centroids, sizes, it > 0);
    recompute(points, assign, centroids, sizes);
    repair_empty(points, assign, centroids, sizes);
    const double current = inertia(points, assign, centroids);
    r.iterations = it + 1;
    const bool converged = current == 0.0 || (std::isfinite(previous) && (previous - current) <= options.tolerance * previous);
    previous = current;
    if (converged) break;
  }

  // Relabel by descending size, ties by smallest member index.
  std::vector<std::size_t> first_member(k, n);
  for (std::size_t i = 0; i < n; ++i) first_member[assign[i]] = std::min(first_member[assign[i]], i);
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sizes[a] != sizes[b]) return sizes[a] > sizes[b];
    return first_member[a] < first_member[b];
  });
  std::vector<std::size_t> relabel(k);
  for (std::size_t new_id = 0; new_id < k; ++new_id) relabel[order[new_id]] = new_id;
  for (std::size_t i = 0; i < n; ++i) r.assignments[i] = relabel[assign[i]];
  for (std::size_t c = 0; c < k; ++c) {
    r.sizes[relabel[c]] = sizes[c];
    if (sizes[c]) r.centroids[relabel[c]] = centroids[c];
  }
  r.inertia = previous;
  return r;
}

}  // namespace genret::docid
