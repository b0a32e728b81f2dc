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

#pragma once

#include "genret/nn/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace genret::docid {

using nn::Vector;

struct KMeansResult {
  std::vector<std::size_t> assignments;  // cluster index per point
  std::vector<Vector> centroids;         // k entries; unused clusters are empty vectors
  std::vector<std::size_t> sizes;        // k entries, non-increasing
  double inertia = 0.0;
  std::size_t iterations = 0;

  std::size_t non_empty() const;
};

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-4;  // relative inertia change
};

/// k-means++ seeding followed by Lloyd iterations. Empty clusters take the
/// point farthest from the centroid of the largest cluster, when that
/// cluster has any spread. Clusters are relabeled by descending size, ties
/// by smallest member index. With k > |points| every point gets its own
/// cluster and the remaining indices stay empty.
KMeansResult kmeans(std::span<const Vector> points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {});

/// Sum of squared distances of points to their assigned centroids.
double inertia(std::span<const Vector> points, std::span<const std::size_t> assignments,
               std::span<const Vector> centroids);

}  // namespace genret::docid
