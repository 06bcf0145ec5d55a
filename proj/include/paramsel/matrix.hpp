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
#include <cstring>
#include <memory>
#include <new>
#include <span>
#include <stdexcept>

namespace paramsel {

/// Rows are padded with zeros to this many bytes so the dot kernels can
/// run full-width vectors without a scalar tail.
inline constexpr std::size_t kRowAlignBytes = 64;

template <class T>
constexpr std::size_t padded_stride(std::size_t cols) {
    constexpr std::size_t lanes = kRowAlignBytes / sizeof(T);
    return (cols + lanes - 1) / lanes * lanes;
}

/// Row-major dense matrix with 64-byte aligned, zero-padded rows.
template <class T>
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_(padded_stride<T>(cols)) {
        const std::size_t count = rows_ * stride_;
        if (count > 0) {
            data_.reset(static_cast<T*>(::operator new[](
                    count * sizeof(T), std::align_val_t{kRowAlignBytes})));
            std::memset(data_.get(), 0, count * sizeof(T));
        }
    }

    DenseMatrix(const DenseMatrix& other) : DenseMatrix(other.rows_, other.cols_) {
        if (rows_ * stride_ > 0) {
            std::memcpy(data_.get(), other.data_.get(), rows_ * stride_ * sizeof(T));
        }
    }

    DenseMatrix& operator=(const DenseMatrix& other) {
        if (this != &other) {
            DenseMatrix copy(other);
            *this = std::move(copy);
        }
        return *this;
    }

    DenseMatrix(DenseMatrix&&) noexcept = default;
    DenseMatrix& operator=(DenseMatrix&&) noexcept = default;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t stride() const { return stride_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    T* data() { return data_.get(); }
    const T* data() const { return data_.get(); }

    std::span<T> row(std::size_t i) { return {data_.get() + i * stride_, cols_}; }
    std::span<const T> row(std::size_t i) const {
        return {data_.get() + i * stride_, cols_};
    }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * stride_ + j]; }
    T operator()(std::size_t i, std::size_t j) const { return data_[i * stride_ + j]; }

    void fill(T value) {
        for (std::size_t i = 0; i < rows_; ++i) {
            for (auto& x : row(i)) {
                x = value;
            }
        }
    }

    /// Element-wise converting copy; padding stays zero.
    template <class U>
    DenseMatrix<U> cast() const {
        DenseMatrix<U> out(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            auto src = row(i);
            auto dst = out.row(i);
            for (std::size_t j = 0; j < cols_; ++j) {
                dst[j] = static_cast<U>(src[j]);
            }
        }
        return out;
    }

private:
    struct AlignedDelete {
        void operator()(T* p) const {
            ::operator delete[](p, std::align_val_t{kRowAlignBytes});
        }
    };

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::unique_ptr<T[], AlignedDelete> data_;
};

}  // namespace paramsel
