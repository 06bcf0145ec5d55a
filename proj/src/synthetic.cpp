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

#include "paramsel/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "paramsel/error.hpp"
#include "paramsel/random.hpp"

namespace paramsel {

namespace {

void random_unit(std::span<float> out, Rng& rng) {
    double sq = 0.0;
    std::vector<double> v(out.size());
    do {
        sq = 0.0;
        for (double& x : v) {
            x = rng.normal();
            sq += x * x;
        }
    } while (sq == 0.0);
    const double norm = std::sqrt(sq);
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = static_cast<float>(v[c] / norm);
    }
}

std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double exact = static_cast<double>(n) * weights[k] / total;
        counts[k] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[k];
        remainders.emplace_back(exact - std::floor(exact), k);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) {
        ++counts[remainders[r % remainders.size()].second];
    }
    return counts;
}

}  // namespace

Mixture make_mixture(const MixtureSpec& spec) {
    if (spec.n == 0 || spec.d == 0) {
        throw Error(ErrorCode::validation, "mixture needs n >= 1 and d >= 1");
    }
    if (spec.weights.empty()) {
        throw Error(ErrorCode::validation, "mixture needs at least one component");
    }
    for (double w : spec.weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::validation, "mixture weights must be positive");
        }
    }
    if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread)) {
        throw Error(ErrorCode::validation, "mixture spread must be non-negative");
    }
    Rng rng(spec.seed);
    const std::size_t k = spec.weights.size();
    DenseMatrix<float> centers(k, spec.d);
    for (std::size_t c = 0; c < k; ++c) {
        random_unit(centers.row(c), rng);
    }

    std::vector<std::size_t> labels;
    labels.reserve(spec.n);
    const auto counts = apportion(spec.n, spec.weights);
    for (std::size_t c = 0; c < k; ++c) {
        labels.insert(labels.end(), counts[c], c);
    }
    for (std::size_t i = spec.n; i > 1; --i) {
        std::swap(labels[i - 1], labels[rng.uniform_index(i)]);
    }

    const double sigma = spec.spread / std::sqrt(static_cast<double>(spec.d));
    DenseMatrix<float> rows(spec.n, spec.d);
    for (std::size_t i = 0; i < spec.n; ++i) {
        auto center = centers.row(labels[i]);
        auto row = rows.row(i);
        // Redraw the (measure-zero) case of noise cancelling the center.
        for (;;) {
            double sq = 0.0;
            for (std::size_t c = 0; c < spec.d; ++c) {
                row[c] = static_cast<float>(center[c] + sigma * rng.normal());
                sq += static_cast<double>(row[c]) * row[c];
            }
            if (sq > 0.0) {
                break;
            }
        }
    }
    return Mixture{EmbeddingMatrix(std::move(rows), {}, true), std::move(labels),
                   std::move(centers)};
}

}  // namespace paramsel
