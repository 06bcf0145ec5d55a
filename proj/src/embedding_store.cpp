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

#include "paramsel/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "paramsel/error.hpp"
#include "paramsel/kernels.hpp"

namespace paramsel {

static_assert(std::endian::native == std::endian::little,
              "EMB1 I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

template <class T>
T read_le(const unsigned char* p) {
    T value;
    std::memcpy(&value, p, sizeof(T));
    return value;
}

template <class T>
void append_le(std::string& buf, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

std::string row_label(std::size_t i) { return "row " + std::to_string(i); }

void check_rows(const DenseMatrix<float>& rows, bool normalize) {
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        for (float x : rows.row(i)) {
            if (!std::isfinite(x)) {
                throw Error(ErrorCode::non_finite, "non-finite value in " + row_label(i));
            }
        }
    }
    if (normalize) {
        return;
    }
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        double sq = 0.0;
        for (float x : rows.row(i)) {
            sq += static_cast<double>(x) * x;
        }
        if (std::abs(std::sqrt(sq) - 1.0) > EmbeddingMatrix::kUnitNormTolerance) {
            throw Error(ErrorCode::not_normalized,
                        row_label(i) + " has norm " + std::to_string(std::sqrt(sq)));
        }
    }
}

}  // namespace

void normalize_rows(DenseMatrix<float>& rows) {
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        auto r = rows.row(i);
        double sq = 0.0;
        for (float x : r) {
            sq += static_cast<double>(x) * x;
        }
        if (sq == 0.0) {
            throw Error(ErrorCode::zero_norm_row, "zero-norm row " + std::to_string(i));
        }
        const double norm = std::sqrt(sq);
        for (float& x : r) {
            x = static_cast<float>(x / norm);
        }
    }
}

EmbeddingMatrix::EmbeddingMatrix(DenseMatrix<float> rows, std::vector<std::uint64_t> ids,
                                 bool normalize)
    : rows_(std::move(rows)), ids_(std::move(ids)) {
    if (rows_.rows() == 0 || rows_.cols() == 0) {
        throw Error(ErrorCode::validation, "embedding matrix must have n >= 1 and d >= 1");
    }
    if (!ids_.empty() && ids_.size() != rows_.rows()) {
        throw Error(ErrorCode::validation, "id count " + std::to_string(ids_.size()) +
                                                   " does not match n=" +
                                                   std::to_string(rows_.rows()));
    }
    check_rows(rows_, normalize);
    if (normalize) {
        normalize_rows(rows_);
    }
    id_index_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        if (!id_index_.emplace(ids_[i], i).second) {
            throw Error(ErrorCode::duplicate_id,
                        "duplicate id " + std::to_string(ids_[i]) + " at " + row_label(i));
        }
    }
}

std::optional<std::size_t> EmbeddingMatrix::find_id(std::uint64_t id) const {
    if (ids_.empty()) {
        if (id < n()) {
            return static_cast<std::size_t>(id);
        }
        return std::nullopt;
    }
    const auto it = id_index_.find(id);
    if (it == id_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::uint64_t emb1_file_size(std::uint64_t n, std::uint32_t d, bool with_ids) {
    std::uint64_t cells = 0;
    std::uint64_t payload = 0;
    std::uint64_t total = 0;
    if (__builtin_mul_overflow(n, static_cast<std::uint64_t>(d), &cells) ||
        __builtin_mul_overflow(cells, std::uint64_t{4}, &payload) ||
        __builtin_add_overflow(payload, std::uint64_t{kEmb1HeaderBytes}, &total)) {
        throw Error(ErrorCode::size_overflow, "EMB1 n*d overflows: n=" + std::to_string(n) +
                                                      " d=" + std::to_string(d));
    }
    if (with_ids) {
        std::uint64_t id_bytes = 0;
        if (__builtin_mul_overflow(n, std::uint64_t{8}, &id_bytes) ||
            __builtin_add_overflow(total, id_bytes, &total)) {
            throw Error(ErrorCode::size_overflow, "EMB1 id block overflows: n=" +
                                                          std::to_string(n));
        }
    }
    return total;
}

Emb1Header read_emb1_header(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    unsigned char raw[kEmb1HeaderBytes] = {};
    in.read(reinterpret_cast<char*>(raw), kEmb1HeaderBytes);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got >= 4 && std::memcmp(raw, kMagic, 4) != 0) {
        throw Error(ErrorCode::bad_magic, path.string() + ": bad magic, not an EMB1 file");
    }
    if (got < kEmb1HeaderBytes) {
        throw Error(ErrorCode::truncated, path.string() + ": truncated header (" +
                                                  std::to_string(got) + " bytes)");
    }
    const auto version = read_le<std::uint32_t>(raw + 4);
    if (version != kEmb1Version) {
        throw Error(ErrorCode::unsupported_version,
                    path.string() + ": unsupported EMB1 version " + std::to_string(version));
    }
    Emb1Header header;
    header.n = read_le<std::uint64_t>(raw + 8);
    header.d = read_le<std::uint32_t>(raw + 16);
    header.flags = read_le<std::uint32_t>(raw + 20);
    if ((header.flags & ~(kEmb1FlagNormalized | kEmb1FlagIds)) != 0) {
        throw Error(ErrorCode::parse,
                    path.string() + ": unknown flag bits " + std::to_string(header.flags));
    }
    if (header.n == 0 || header.d == 0) {
        throw Error(ErrorCode::validation, path.string() + ": empty matrix (n=" +
                                                   std::to_string(header.n) + ", d=" +
                                                   std::to_string(header.d) + ")");
    }
    const std::uint64_t expected =
            emb1_file_size(header.n, header.d, (header.flags & kEmb1FlagIds) != 0);
    if (expected > static_cast<std::uint64_t>(PTRDIFF_MAX)) {
        throw Error(ErrorCode::size_overflow, path.string() + ": matrix too large");
    }
    const std::uint64_t actual = std::filesystem::file_size(path);
    if (actual < expected) {
        throw Error(ErrorCode::truncated, path.string() + ": truncated payload, expected " +
                                                  std::to_string(expected) + " bytes, found " +
                                                  std::to_string(actual));
    }
    if (actual > expected) {
        throw Error(ErrorCode::trailing_bytes,
                    path.string() + ": " + std::to_string(actual - expected) +
                            " unexpected trailing bytes");
    }
    return header;
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
    const Emb1Header header = read_emb1_header(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    in.seekg(static_cast<std::streamoff>(kEmb1HeaderBytes));

    const auto n = static_cast<std::size_t>(header.n);
    const std::size_t d = header.d;
    DenseMatrix<float> rows(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(rows.row(i).data()),
                static_cast<std::streamsize>(d * sizeof(float)));
    }
    std::vector<std::uint64_t> ids;
    if (header.flags & kEmb1FlagIds) {
        ids.resize(n);
        in.read(reinterpret_cast<char*>(ids.data()),
                static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
    }
    if (!in) {
        throw Error(ErrorCode::io, path.string() + ": read failed");
    }
    const bool normalize = (header.flags & kEmb1FlagNormalized) == 0;
    return EmbeddingMatrix(std::move(rows), std::move(ids), normalize);
}

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    }
    std::string header;
    header.append(kMagic, 4);
    append_le<std::uint32_t>(header, kEmb1Version);
    append_le<std::uint64_t>(header, matrix.n());
    append_le<std::uint32_t>(header, static_cast<std::uint32_t>(matrix.d()));
    append_le<std::uint32_t>(header,
                             kEmb1FlagNormalized | (matrix.has_ids() ? kEmb1FlagIds : 0u));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (std::size_t i = 0; i < matrix.n(); ++i) {
        out.write(reinterpret_cast<const char*>(matrix.row(i).data()),
                  static_cast<std::streamsize>(matrix.d() * sizeof(float)));
    }
    if (matrix.has_ids()) {
        out.write(reinterpret_cast<const char*>(matrix.ids().data()),
                  static_cast<std::streamsize>(matrix.n() * sizeof(std::uint64_t)));
    }
    out.flush();
    if (!out) {
        throw Error(ErrorCode::io, "write failed: " + path.string());
    }
}

void similarity_block(const EmbeddingMatrix& matrix, const DenseMatrix<float>& params,
                      RowRange range, double tau, std::span<float> out) {
    if (params.cols() != matrix.d()) {
        throw Error(ErrorCode::validation, "dimension mismatch: features d=" +
                                                   std::to_string(matrix.d()) + ", params d=" +
                                                   std::to_string(params.cols()));
    }
    if (range.lo >= range.hi || range.hi > matrix.n()) {
        throw Error(ErrorCode::validation, "invalid row range [" + std::to_string(range.lo) +
                                                   ", " + std::to_string(range.hi) + ")");
    }
    if (!(tau > 0.0)) {
        throw Error(ErrorCode::validation, "tau must be positive");
    }
    const std::size_t m = params.rows();
    if (out.size() < range.size() * m) {
        throw Error(ErrorCode::validation, "similarity output buffer too small");
    }
    dot_products(matrix.rows(), range.lo, range.hi, params, 0, m, out.data(), m);
    const auto tau_f = static_cast<float>(tau);
    for (std::size_t k = 0; k < range.size() * m; ++k) {
        out[k] /= tau_f;
    }
}

DenseMatrix<float> similarity_block(const EmbeddingMatrix& matrix,
                                    const DenseMatrix<float>& params, RowRange range,
                                    double tau) {
    std::vector<float> buf(range.hi > range.lo ? range.size() * params.rows() : 0);
    similarity_block(matrix, params, range, tau, buf);
    DenseMatrix<float> out(range.size(), params.rows());
    for (std::size_t i = 0; i < out.rows(); ++i) {
        std::memcpy(out.row(i).data(), buf.data() + i * params.rows(),
                    params.rows() * sizeof(float));
    }
    return out;
}

}  // namespace paramsel
