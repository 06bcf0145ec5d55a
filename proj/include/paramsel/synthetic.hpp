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
#include <vector>

#include "paramsel/embedding_store.hpp"

namespace paramsel {

struct MixtureSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    /// Component proportions; normalized internally. Row counts per
    /// component are apportioned exactly (largest remainder).
    std::vector<double> weights{1.0};
    /// Norm of the isotropic noise added to a component center before
    /// projecting back onto the sphere.
    double spread = 0.5;
    std::uint64_t seed = 0;
};

/// Gaussian blobs around random unit centers, projected onto the sphere.
struct Mixture {
    EmbeddingMatrix matrix;
    std::vector<std::size_t> labels;
    DenseMatrix<float> centers;
};

Mixture make_mixture(const MixtureSpec& spec);

}  // namespace paramsel
