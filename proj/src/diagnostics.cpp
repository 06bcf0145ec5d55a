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

#include "paramsel/diagnostics.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "paramsel/error.hpp"
#include "paramsel/kernels.hpp"
#include "paramsel/parallel.hpp"

namespace paramsel {

namespace {

constexpr std::size_t kBlockRows = 1024;

DenseMatrix<float> gather_rows(const EmbeddingMatrix& matrix,
                               std::span<const std::size_t> indices) {
    std::vector<char> seen(matrix.n(), 0);
    DenseMatrix<float> out(indices.size(), matrix.d());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        const std::size_t i = indices[k];
        if (i >= matrix.n()) {
            throw Error(ErrorCode::validation, "index " + std::to_string(i) +
                                                       " out of range for n=" +
                                                       std::to_string(matrix.n()));
        }
        if (seen[i]) {
            throw Error(ErrorCode::validation, "duplicate index " + std::to_string(i));
        }
        seen[i] = 1;
        std::memcpy(out.row(k).data(), matrix.row(i).data(), matrix.d() * sizeof(float));
    }
    return out;
}

}  // namespace

double pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
    if (c > n) {
        throw Error(ErrorCode::validation,
                    "pass@k needs c <= n (c=" + std::to_string(c) + ", n=" + std::to_string(n) + ")");
    }
    if (k < 1 || k > n) {
        throw Error(ErrorCode::validation,
                    "pass@k needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    if (c == 0) {
        return 0.0;
    }
    if (n - c < k) {
        return 1.0;
    }
    double prod = 1.0;
    for (std::uint64_t i = n - c + 1; i <= n; ++i) {
        prod *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
    }
    return 1.0 - prod;
}

double coverage(const EmbeddingMatrix& matrix, std::span<const std::size_t> indices,
                std::size_t threads) {
    if (indices.empty()) {
        throw Error(ErrorCode::validation, "coverage needs at least one selected index");
    }
    const DenseMatrix<float> selected = gather_rows(matrix, indices);
    const std::size_t n = matrix.n();
    const std::size_t m = selected.rows();
    const std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
    const std::size_t workers = std::min(resolve_threads(threads), blocks);
    std::vector<std::vector<float>> buffers(workers,
                                            std::vector<float>(std::min(n, kBlockRows) * m));
    std::vector<double> best(n);
    parallel_for(blocks, workers, [&](std::size_t b, std::size_t w) {
        const std::size_t lo = b * kBlockRows;
        const std::size_t hi = std::min(n, lo + kBlockRows);
        float* buf = buffers[w].data();
        dot_products(matrix.rows(), lo, hi, selected, 0, m, buf, m);
        for (std::size_t i = lo; i < hi; ++i) {
            const float* row = buf + (i - lo) * m;
            best[i] = static_cast<double>(*std::max_element(row, row + m));
        }
    });
    double sum = 0.0;
    for (double v : best) {
        sum += v;
    }
    return sum / static_cast<double>(n);
}

DiversityStats diversity(const EmbeddingMatrix& matrix, std::span<const std::size_t> indices,
                         std::size_t threads) {
    if (indices.size() < 2) {
        throw Error(ErrorCode::validation, "diversity needs at least two selected indices");
    }
    const DenseMatrix<float> selected = gather_rows(matrix, indices);
    const std::size_t m = selected.rows();
    const std::size_t blocks = (m + kBlockRows - 1) / kBlockRows;
    const std::size_t workers = std::min(resolve_threads(threads), blocks);
    std::vector<std::vector<float>> buffers(workers,
                                            std::vector<float>(std::min(m, kBlockRows) * m));
    std::vector<double> block_sum(blocks, 0.0);
    std::vector<double> block_max(blocks, -std::numeric_limits<double>::infinity());
    parallel_for(blocks, workers, [&](std::size_t b, std::size_t w) {
        const std::size_t lo = b * kBlockRows;
        const std::size_t hi = std::min(m, lo + kBlockRows);
        float* buf = buffers[w].data();
        // Only columns j > i matter; start the product at the block's first row.
        const std::size_t width = m - lo;
        dot_products(selected, lo, hi, selected, lo, m, buf, width);
        double sum = 0.0;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = lo; i < hi; ++i) {
            const float* row = buf + (i - lo) * width;
            for (std::size_t j = i + 1; j < m; ++j) {
                const double s = row[j - lo];
                sum += s;
                mx = std::max(mx, s);
            }
        }
        block_sum[b] = sum;
        block_max[b] = mx;
    });
    double sum = 0.0;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < blocks; ++b) {
        sum += block_sum[b];
        mx = std::max(mx, block_max[b]);
    }
    const double pairs = static_cast<double>(m) * static_cast<double>(m - 1) / 2.0;
    DiversityStats stats;
    stats.mean_pairwise_sim = sum / pairs;
    stats.max_pairwise_sim = mx;
    stats.min_pairwise_dist = 1.0 - mx;
    return stats;
}

}  // namespace paramsel
