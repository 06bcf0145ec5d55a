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
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "paramsel/matrix.hpp"

namespace paramsel {

/// Half-open row interval [lo, hi).
struct RowRange {
    std::size_t lo = 0;
    std::size_t hi = 0;

    std::size_t size() const { return hi - lo; }
};

/// Immutable n x d store of unit-norm float embeddings.
///
/// Construction is the only way in, and it enforces the store invariants:
/// n, d >= 1, every value finite, every row unit norm within kUnitNormTolerance,
/// ids (when given) unique and one per row.
class EmbeddingMatrix {
public:
    static constexpr double kUnitNormTolerance = 1e-5;

    /// Validates `rows`, L2-normalizing them first when `normalize` is set.
    /// Without `normalize`, rows off the unit sphere are rejected.
    EmbeddingMatrix(DenseMatrix<float> rows, std::vector<std::uint64_t> ids, bool normalize);

    std::size_t n() const { return rows_.rows(); }
    std::size_t d() const { return rows_.cols(); }

    const DenseMatrix<float>& rows() const { return rows_; }
    std::span<const float> row(std::size_t i) const { return rows_.row(i); }

    bool has_ids() const { return !ids_.empty(); }
    const std::vector<std::uint64_t>& ids() const { return ids_; }
    /// Stable record id of row i; the row index itself when no id block exists.
    std::uint64_t id(std::size_t i) const { return ids_.empty() ? i : ids_[i]; }

    /// Row index holding record id, if any.
    std::optional<std::size_t> find_id(std::uint64_t id) const;

private:
    DenseMatrix<float> rows_;
    std::vector<std::uint64_t> ids_;
    std::unordered_map<std::uint64_t, std::size_t> id_index_;
};

/// Rescales every row to unit L2 norm in place (norm taken in double).
/// Throws Error(zero_norm_row) naming the first zero row.
void normalize_rows(DenseMatrix<float>& rows);

// EMB1 on-disk layout, little-endian:
//   magic "EMB1" | version u32 | n u64 | d u32 | flags u32 |
//   n*d float32 row-major | optional n x u64 id block
inline constexpr std::uint32_t kEmb1Version = 1;
inline constexpr std::size_t kEmb1HeaderBytes = 24;
inline constexpr std::uint32_t kEmb1FlagNormalized = 1u << 0;
inline constexpr std::uint32_t kEmb1FlagIds = 1u << 1;

struct Emb1Header {
    std::uint64_t n = 0;
    std::uint32_t d = 0;
    std::uint32_t flags = 0;
};

/// Parses and checks just the header (magic, version, size arithmetic).
Emb1Header read_emb1_header(const std::filesystem::path& path);

EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// Always written with the normalized flag set; the id block is written
/// when the matrix carries ids.
void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);

/// Expected file size for an EMB1 file of the given shape.
std::uint64_t emb1_file_size(std::uint64_t n, std::uint32_t d, bool with_ids);

/// Default rows per similarity block.
inline constexpr std::size_t kDefaultBlockSize = 4096;

/// out(i, j) = dot(f_{range.lo + i}, params_j) / tau, (range.size() x m).
/// Each entry is computed from its two rows alone, so any partition of the
/// rows into blocks reproduces the single-block result exactly.
DenseMatrix<float> similarity_block(const EmbeddingMatrix& matrix,
                                    const DenseMatrix<float>& params, RowRange range,
                                    double tau);

/// Same as above into a caller-owned buffer with row stride params.rows().
void similarity_block(const EmbeddingMatrix& matrix, const DenseMatrix<float>& params,
                      RowRange range, double tau, std::span<float> out);

}  // namespace paramsel
