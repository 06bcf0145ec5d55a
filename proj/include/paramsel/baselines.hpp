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
#include <filesystem>
#include <vector>

#include "paramsel/embedding_store.hpp"
#include "paramsel/selector.hpp"

namespace paramsel {

SelectionResult random_select(std::size_t n, std::size_t m, std::uint64_t seed);

/// Farthest-point greedy under cosine distance 1 - <f_i, f_j>. The first
/// center is drawn uniformly with `seed`; every later center maximizes the
/// distance to its nearest chosen center (ties to the smaller index).
/// radius_history[t] is the covering radius once t + 1 centers are chosen.
SelectionResult kcenter_select(const EmbeddingMatrix& matrix, std::size_t m, std::uint64_t seed,
                               std::size_t threads = 1);

enum class ScoreDirection { descending, ascending };

/// Externally computed per-row scores, aligned to embedding row order.
struct ScoreFile {
    std::vector<double> scores;
    ScoreDirection direction = ScoreDirection::descending;
};

/// Top-m rows by score in the file's direction, ties to the smaller index.
SelectionResult score_select(const ScoreFile& scores, std::size_t n, std::size_t m);

/// Reads either JSONL `{"id": ..., "score": ...}` (ids resolved through the
/// matrix, every row covered exactly once) or plain text with one score per
/// line in row order.
ScoreFile load_scores(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      ScoreDirection direction);

}  // namespace paramsel
