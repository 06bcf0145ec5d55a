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
#include <random>
#include <vector>

namespace paramsel {

/// Seeded generator whose streams are identical across standard libraries.
/// The engine is fully specified by the standard; the distributions on top of
/// it are written out here because std::*_distribution are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal draw (Marsaglia polar method).
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// m distinct values from [0, n), uniform without replacement, in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m, Rng& rng);

}  // namespace paramsel
