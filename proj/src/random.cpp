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

#include "paramsel/random.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace paramsel {

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("uniform_index: bound must be positive");
    }
    // Largest multiple of bound representable; draws above it are rejected.
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x = engine_();
    while (x > limit) {
        x = engine_();
    }
    return x % bound;
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
    if (m > n) {
        throw std::invalid_argument("sample_without_replacement: m > n");
    }
    // Partial Fisher-Yates.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    return pool;
}

}  // namespace paramsel
