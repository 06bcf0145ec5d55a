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

#include "paramsel/matrix.hpp"

namespace paramsel {

/// Fills out[(i - a_lo) * out_stride + (j - b_lo)] with dot(a.row(i), b.row(j))
/// for i in [a_lo, a_hi) and j in [b_lo, b_hi).
///
/// Every dot product is accumulated in the same lane order and reduced with
/// the same tree no matter where the pair falls in the tiling, so a value
/// depends only on the two rows involved. Callers rely on this to make
/// blocked and unblocked passes agree bit for bit.
template <class T>
void dot_products(const DenseMatrix<T>& a, std::size_t a_lo, std::size_t a_hi,
                  const DenseMatrix<T>& b, std::size_t b_lo, std::size_t b_hi,
                  T* out, std::size_t out_stride);

/// Single dot product with the same accumulation order as dot_products.
template <class T>
T dot_rows(const T* x, const T* y, std::size_t stride);

/// Index of the first maximum of values[0, count); count must be positive
/// and the values NaN-free.
template <class T>
std::size_t argmax_first(const T* values, std::size_t count);

/// out.row(j) += sum_k weights(j, k) * rows.row(k) for j in [lo, hi).
/// Each output element accumulates its terms in ascending k, so the result
/// does not depend on how the rows are tiled.
template <class T>
void weighted_row_sums(const DenseMatrix<T>& weights, std::size_t lo, std::size_t hi,
                       const DenseMatrix<T>& rows, DenseMatrix<T>& out);

extern template void dot_products<float>(const DenseMatrix<float>&, std::size_t,
                                         std::size_t, const DenseMatrix<float>&,
                                         std::size_t, std::size_t, float*, std::size_t);
extern template void dot_products<double>(const DenseMatrix<double>&, std::size_t,
                                          std::size_t, const DenseMatrix<double>&,
                                          std::size_t, std::size_t, double*,
                                          std::size_t);
extern template float dot_rows<float>(const float*, const float*, std::size_t);
extern template double dot_rows<double>(const double*, const double*, std::size_t);
extern template std::size_t argmax_first<float>(const float*, std::size_t);
extern template std::size_t argmax_first<double>(const double*, std::size_t);
extern template void weighted_row_sums<float>(const DenseMatrix<float>&, std::size_t,
                                              std::size_t, const DenseMatrix<float>&,
                                              DenseMatrix<float>&);
extern template void weighted_row_sums<double>(const DenseMatrix<double>&, std::size_t,
                                               std::size_t, const DenseMatrix<double>&,
                                               DenseMatrix<double>&);

}  // namespace paramsel
