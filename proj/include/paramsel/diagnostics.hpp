// Copyright 2026 The paramsel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "paramsel/embedding_store.hpp"

namespace paramsel {

/// Unbiased pass@k estimate 1 - C(n - c, k) / C(n, k), evaluated as
/// 1 - prod_{i = n - c + 1}^{n} (1 - k / i). Requires c <= n and 1 <= k <= n.
double pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k);

/// Mean over all rows of the best cosine similarity to a selected row.
double coverage(const EmbeddingMatrix& matrix, std::span<const std::size_t> indices,
                std::size_t threads = 1);

struct DiversityStats {
    double mean_pairwise_sim = 0.0;
    double max_pairwise_sim = 0.0;
    double min_pairwise_dist = 0.0;  ///< 1 - max_pairwise_sim
};

/// Exact statistics over every unordered pair of selected rows.
DiversityStats diversity(const EmbeddingMatrix& matrix, std::span<const std::size_t> indices,
                         std::size_t threads = 1);

}  // namespace paramsel
