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

#include "paramsel/kernels.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <stdexcept>
#include <utility>

namespace paramsel {

namespace {

typedef float vec_f32 __attribute__((vector_size(kRowAlignBytes)));
typedef double vec_f64 __attribute__((vector_size(kRowAlignBytes)));

template <class T>
struct VecOf;
template <>
struct VecOf<float> {
    using type = vec_f32;
};
template <>
struct VecOf<double> {
    using type = vec_f64;
};

template <class T>
constexpr std::size_t kLanes = kRowAlignBytes / sizeof(T);

// Panel sizes for the register tile. 24 accumulators fit the 32-register
// AVX-512 file with room for the operands.
constexpr int kTileRows = 6;
constexpr int kTileCols = 4;
// Rows of b kept hot in L2 while a panel of a sweeps over them.
constexpr std::size_t kChunkBytes = 512 * 1024;

template <class V, class T>
inline V load(const T* p) {
    V v;
    __builtin_memcpy(&v, p, sizeof(V));
    return v;
}

template <class V>
struct ShuffleMask;
template <>
struct ShuffleMask<vec_f32> {
    typedef int type __attribute__((vector_size(kRowAlignBytes)));
};
template <>
struct ShuffleMask<vec_f64> {
    typedef long long type __attribute__((vector_size(kRowAlignBytes)));
};

// Pairwise tree: lane i absorbs lane i + width for width = L/2, L/4, ..., 1.
inline float reduce(vec_f32 v) {
    using M = ShuffleMask<vec_f32>::type;
    v += __builtin_shuffle(v, M{8, 9, 10, 11, 12, 13, 14, 15, 0, 1, 2, 3, 4, 5, 6, 7});
    v += __builtin_shuffle(v, M{4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 0, 1, 2, 3});
    v += __builtin_shuffle(v, M{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 0, 1});
    v += __builtin_shuffle(v, M{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 0});
    return v[0];
}

inline double reduce(vec_f64 v) {
    using M = ShuffleMask<vec_f64>::type;
    v += __builtin_shuffle(v, M{4, 5, 6, 7, 0, 1, 2, 3});
    v += __builtin_shuffle(v, M{2, 3, 4, 5, 6, 7, 0, 1});
    v += __builtin_shuffle(v, M{1, 2, 3, 4, 5, 6, 7, 0});
    return v[0];
}

// Reduces four accumulators at once with the same per-lane tree as reduce().
inline void reduce4(vec_f32 u, vec_f32 v, vec_f32 w, vec_f32 x, float* out) {
    using M = ShuffleMask<vec_f32>::type;
    constexpr M lo8{0, 1, 2, 3, 4, 5, 6, 7, 16, 17, 18, 19, 20, 21, 22, 23};
    constexpr M hi8{8, 9, 10, 11, 12, 13, 14, 15, 24, 25, 26, 27, 28, 29, 30, 31};
    const vec_f32 uv = __builtin_shuffle(u, v, lo8) + __builtin_shuffle(u, v, hi8);
    const vec_f32 wx = __builtin_shuffle(w, x, lo8) + __builtin_shuffle(w, x, hi8);
    constexpr M lo4{0, 1, 2, 3, 8, 9, 10, 11, 16, 17, 18, 19, 24, 25, 26, 27};
    constexpr M hi4{4, 5, 6, 7, 12, 13, 14, 15, 20, 21, 22, 23, 28, 29, 30, 31};
    const vec_f32 q = __builtin_shuffle(uv, wx, lo4) + __builtin_shuffle(uv, wx, hi4);
    constexpr M lo2{0, 1, 4, 5, 8, 9, 12, 13, 0, 1, 4, 5, 8, 9, 12, 13};
    constexpr M hi2{2, 3, 6, 7, 10, 11, 14, 15, 2, 3, 6, 7, 10, 11, 14, 15};
    const vec_f32 r = __builtin_shuffle(q, lo2) + __builtin_shuffle(q, hi2);
    constexpr M lo1{0, 2, 4, 6, 0, 2, 4, 6, 0, 2, 4, 6, 0, 2, 4, 6};
    constexpr M hi1{1, 3, 5, 7, 1, 3, 5, 7, 1, 3, 5, 7, 1, 3, 5, 7};
    const vec_f32 t = __builtin_shuffle(r, lo1) + __builtin_shuffle(r, hi1);
    out[0] = t[0];
    out[1] = t[1];
    out[2] = t[2];
    out[3] = t[3];
}

inline void reduce4(vec_f64 u, vec_f64 v, vec_f64 w, vec_f64 x, double* out) {
    using M = ShuffleMask<vec_f64>::type;
    constexpr M lo4{0, 1, 2, 3, 8, 9, 10, 11};
    constexpr M hi4{4, 5, 6, 7, 12, 13, 14, 15};
    const vec_f64 uv = __builtin_shuffle(u, v, lo4) + __builtin_shuffle(u, v, hi4);
    const vec_f64 wx = __builtin_shuffle(w, x, lo4) + __builtin_shuffle(w, x, hi4);
    constexpr M lo2{0, 1, 4, 5, 8, 9, 12, 13};
    constexpr M hi2{2, 3, 6, 7, 10, 11, 14, 15};
    const vec_f64 q = __builtin_shuffle(uv, wx, lo2) + __builtin_shuffle(uv, wx, hi2);
    constexpr M lo1{0, 2, 4, 6, 0, 2, 4, 6};
    constexpr M hi1{1, 3, 5, 7, 1, 3, 5, 7};
    const vec_f64 t = __builtin_shuffle(q, lo1) + __builtin_shuffle(q, hi1);
    out[0] = t[0];
    out[1] = t[1];
    out[2] = t[2];
    out[3] = t[3];
}

template <class T, int R, int C>
void tile(const T* a, std::size_t lda, const T* b, std::size_t ldb,
          std::size_t nvec, T* out, std::size_t ldo) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = kLanes<T>;
    V acc[R][C];
#pragma GCC unroll 8
    for (int r = 0; r < R; ++r) {
#pragma GCC unroll 8
        for (int c = 0; c < C; ++c) {
            acc[r][c] = V{};
        }
    }
    for (std::size_t k = 0; k < nvec; ++k) {
        V av[R];
#pragma GCC unroll 8
        for (int r = 0; r < R; ++r) {
            av[r] = load<V>(a + r * lda + k * L);
        }
#pragma GCC unroll 8
        for (int c = 0; c < C; ++c) {
            const V bv = load<V>(b + c * ldb + k * L);
#pragma GCC unroll 8
            for (int r = 0; r < R; ++r) {
                acc[r][c] += av[r] * bv;
            }
        }
    }
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            out[r * ldo + c] = reduce(acc[r][c]);
        }
    }
}

// Full 6x4 tile with the accumulators spelled out so they stay in
// registers; GCC keeps a loop-indexed accumulator array on the stack.
template <class T>
void tile_6x4(const T* a, std::size_t lda, const T* b, std::size_t ldb,
              std::size_t nvec, T* out, std::size_t ldo) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = kLanes<T>;
    V c00{}, c01{}, c02{}, c03{}, c10{}, c11{}, c12{}, c13{};
    V c20{}, c21{}, c22{}, c23{}, c30{}, c31{}, c32{}, c33{};
    V c40{}, c41{}, c42{}, c43{}, c50{}, c51{}, c52{}, c53{};
    const T* a0 = a;
    const T* a1 = a + lda;
    const T* a2 = a + 2 * lda;
    const T* a3 = a + 3 * lda;
    const T* a4 = a + 4 * lda;
    const T* a5 = a + 5 * lda;
    const T* b0 = b;
    const T* b1 = b + ldb;
    const T* b2 = b + 2 * ldb;
    const T* b3 = b + 3 * ldb;
    for (std::size_t k = 0; k < nvec * L; k += L) {
        const V x0 = load<V>(b0 + k);
        const V x1 = load<V>(b1 + k);
        const V x2 = load<V>(b2 + k);
        const V x3 = load<V>(b3 + k);
        V y = load<V>(a0 + k);
        c00 += y * x0; c01 += y * x1; c02 += y * x2; c03 += y * x3;
        y = load<V>(a1 + k);
        c10 += y * x0; c11 += y * x1; c12 += y * x2; c13 += y * x3;
        y = load<V>(a2 + k);
        c20 += y * x0; c21 += y * x1; c22 += y * x2; c23 += y * x3;
        y = load<V>(a3 + k);
        c30 += y * x0; c31 += y * x1; c32 += y * x2; c33 += y * x3;
        y = load<V>(a4 + k);
        c40 += y * x0; c41 += y * x1; c42 += y * x2; c43 += y * x3;
        y = load<V>(a5 + k);
        c50 += y * x0; c51 += y * x1; c52 += y * x2; c53 += y * x3;
    }
    reduce4(c00, c01, c02, c03, out);
    reduce4(c10, c11, c12, c13, out + ldo);
    reduce4(c20, c21, c22, c23, out + 2 * ldo);
    reduce4(c30, c31, c32, c33, out + 3 * ldo);
    reduce4(c40, c41, c42, c43, out + 4 * ldo);
    reduce4(c50, c51, c52, c53, out + 5 * ldo);
}

template <class T>
using TileFn = void (*)(const T*, std::size_t, const T*, std::size_t, std::size_t, T*,
                        std::size_t);

template <class T, int R, std::size_t... Cs>
constexpr std::array<TileFn<T>, kTileCols> row_of_tiles(std::index_sequence<Cs...>) {
    return {&tile<T, R, static_cast<int>(Cs) + 1>...};
}

template <class T, std::size_t... Rs>
constexpr std::array<std::array<TileFn<T>, kTileCols>, kTileRows> tile_table(
        std::index_sequence<Rs...>) {
    return {row_of_tiles<T, static_cast<int>(Rs) + 1>(
            std::make_index_sequence<kTileCols>{})...};
}

// weighted_row_sums tiles: 4 output rows x 6 vectors of columns.
constexpr int kSumRows = 4;
constexpr int kSumVecs = 6;
// Rows of the summed matrix consumed per pass, sized so the column panel
// (kSumRowsBlock x kSumVecs vectors) stays in L2.
constexpr std::size_t kSumRowsBlock = 512;

template <class T>
void sum_tile_4x6(const T* w, std::size_t ldw, const T* rows, std::size_t ldr,
                  std::size_t k_count, T* out, std::size_t ldo) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = kLanes<T>;
    V c00 = load<V>(out), c01 = load<V>(out + L), c02 = load<V>(out + 2 * L);
    V c03 = load<V>(out + 3 * L), c04 = load<V>(out + 4 * L), c05 = load<V>(out + 5 * L);
    const T* o1 = out + ldo;
    V c10 = load<V>(o1), c11 = load<V>(o1 + L), c12 = load<V>(o1 + 2 * L);
    V c13 = load<V>(o1 + 3 * L), c14 = load<V>(o1 + 4 * L), c15 = load<V>(o1 + 5 * L);
    const T* o2 = out + 2 * ldo;
    V c20 = load<V>(o2), c21 = load<V>(o2 + L), c22 = load<V>(o2 + 2 * L);
    V c23 = load<V>(o2 + 3 * L), c24 = load<V>(o2 + 4 * L), c25 = load<V>(o2 + 5 * L);
    const T* o3 = out + 3 * ldo;
    V c30 = load<V>(o3), c31 = load<V>(o3 + L), c32 = load<V>(o3 + 2 * L);
    V c33 = load<V>(o3 + 3 * L), c34 = load<V>(o3 + 4 * L), c35 = load<V>(o3 + 5 * L);
    for (std::size_t k = 0; k < k_count; ++k) {
        const T* r = rows + k * ldr;
        const V x0 = load<V>(r), x1 = load<V>(r + L), x2 = load<V>(r + 2 * L);
        const V x3 = load<V>(r + 3 * L), x4 = load<V>(r + 4 * L), x5 = load<V>(r + 5 * L);
        T y = w[k];
        c00 += y * x0; c01 += y * x1; c02 += y * x2; c03 += y * x3; c04 += y * x4; c05 += y * x5;
        y = w[ldw + k];
        c10 += y * x0; c11 += y * x1; c12 += y * x2; c13 += y * x3; c14 += y * x4; c15 += y * x5;
        y = w[2 * ldw + k];
        c20 += y * x0; c21 += y * x1; c22 += y * x2; c23 += y * x3; c24 += y * x4; c25 += y * x5;
        y = w[3 * ldw + k];
        c30 += y * x0; c31 += y * x1; c32 += y * x2; c33 += y * x3; c34 += y * x4; c35 += y * x5;
    }
    const V acc[4][6] = {{c00, c01, c02, c03, c04, c05},
                         {c10, c11, c12, c13, c14, c15},
                         {c20, c21, c22, c23, c24, c25},
                         {c30, c31, c32, c33, c34, c35}};
    for (int i = 0; i < 4; ++i) {
        for (int v = 0; v < 6; ++v) {
            __builtin_memcpy(out + i * ldo + v * L, &acc[i][v], sizeof(V));
        }
    }
}

template <class T>
void sum_tile_generic(int nrows, int nvecs, const T* w, std::size_t ldw, const T* rows,
                      std::size_t ldr, std::size_t k_count, T* out, std::size_t ldo) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = kLanes<T>;
    for (int i = 0; i < nrows; ++i) {
        for (int v = 0; v < nvecs; ++v) {
            V acc = load<V>(out + i * ldo + v * L);
            for (std::size_t k = 0; k < k_count; ++k) {
                acc += w[i * ldw + k] * load<V>(rows + k * ldr + v * L);
            }
            __builtin_memcpy(out + i * ldo + v * L, &acc, sizeof(V));
        }
    }
}

}  // namespace

template <class T>
void dot_products(const DenseMatrix<T>& a, std::size_t a_lo, std::size_t a_hi,
                  const DenseMatrix<T>& b, std::size_t b_lo, std::size_t b_hi,
                  T* out, std::size_t out_stride) {
    static constexpr auto table = tile_table<T>(std::make_index_sequence<kTileRows>{});
    if (a_lo >= a_hi || b_lo >= b_hi) {
        return;
    }
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("dot_products: row length mismatch");
    }
    const std::size_t stride = a.stride();
    const std::size_t nvec = stride / kLanes<T>;
    const std::size_t chunk =
            std::max<std::size_t>(kTileCols, kChunkBytes / (stride * sizeof(T)));

    for (std::size_t b0 = b_lo; b0 < b_hi; b0 += chunk) {
        const std::size_t b1 = std::min(b_hi, b0 + chunk);
        for (std::size_t i = a_lo; i < a_hi; i += kTileRows) {
            const int rows = static_cast<int>(std::min<std::size_t>(kTileRows, a_hi - i));
            const T* arow = a.data() + i * stride;
            T* orow = out + (i - a_lo) * out_stride;
            for (std::size_t j = b0; j < b1; j += kTileCols) {
                if (rows == kTileRows && j + kTileCols <= b1) {
                    tile_6x4<T>(arow, stride, b.data() + j * stride, stride, nvec,
                                orow + (j - b_lo), out_stride);
                    continue;
                }
                const int cols = static_cast<int>(std::min<std::size_t>(kTileCols, b1 - j));
                table[rows - 1][cols - 1](arow, stride, b.data() + j * stride, stride, nvec,
                                          orow + (j - b_lo), out_stride);
            }
        }
    }
}

template <class T>
T dot_rows(const T* x, const T* y, std::size_t stride) {
    T result;
    tile<T, 1, 1>(x, stride, y, stride, stride / kLanes<T>, &result, 1);
    return result;
}

template void dot_products<float>(const DenseMatrix<float>&, std::size_t, std::size_t,
                                  const DenseMatrix<float>&, std::size_t, std::size_t,
                                  float*, std::size_t);
template void dot_products<double>(const DenseMatrix<double>&, std::size_t, std::size_t,
                                   const DenseMatrix<double>&, std::size_t, std::size_t,
                                   double*, std::size_t);
template <class T>
std::size_t argmax_first(const T* values, std::size_t count) {
    using V = typename VecOf<T>::type;
    constexpr std::size_t L = kLanes<T>;
    T best = values[0];
    std::size_t k = 0;
    if (count >= L) {
        V vmax = load<V>(values);
        for (k = L; k + L <= count; k += L) {
            const V x = load<V>(values + k);
            vmax = x > vmax ? x : vmax;
        }
        for (std::size_t lane = 0; lane < L; ++lane) {
            best = vmax[lane] > best ? vmax[lane] : best;
        }
    }
    for (; k < count; ++k) {
        best = values[k] > best ? values[k] : best;
    }
    std::size_t i = 0;
    while (!(values[i] == best)) {
        ++i;
    }
    return i;
}

template <class T>
void weighted_row_sums(const DenseMatrix<T>& weights, std::size_t lo, std::size_t hi,
                       const DenseMatrix<T>& rows, DenseMatrix<T>& out) {
    if (weights.cols() != rows.rows() || out.cols() != rows.cols() || hi > weights.rows() ||
        hi > out.rows()) {
        throw std::invalid_argument("weighted_row_sums: shape mismatch");
    }
    const std::size_t k_total = rows.rows();
    const std::size_t vecs = rows.stride() / kLanes<T>;
    const std::size_t ldw = weights.stride();
    const std::size_t ldr = rows.stride();
    const std::size_t ldo = out.stride();
    for (std::size_t k0 = 0; k0 < k_total; k0 += kSumRowsBlock) {
        const std::size_t kc = std::min(kSumRowsBlock, k_total - k0);
        for (std::size_t v0 = 0; v0 < vecs; v0 += kSumVecs) {
            const int nv = static_cast<int>(std::min<std::size_t>(kSumVecs, vecs - v0));
            const std::size_t col = v0 * kLanes<T>;
            const T* r = rows.data() + k0 * ldr + col;
            for (std::size_t j = lo; j < hi; j += kSumRows) {
                const int nr = static_cast<int>(std::min<std::size_t>(kSumRows, hi - j));
                const T* w = weights.data() + j * ldw + k0;
                T* o = out.data() + j * ldo + col;
                if (nr == kSumRows && nv == kSumVecs) {
                    sum_tile_4x6<T>(w, ldw, r, ldr, kc, o, ldo);
                } else {
                    sum_tile_generic<T>(nr, nv, w, ldw, r, ldr, kc, o, ldo);
                }
            }
        }
    }
}

template std::size_t argmax_first<float>(const float*, std::size_t);
template std::size_t argmax_first<double>(const double*, std::size_t);
template void weighted_row_sums<float>(const DenseMatrix<float>&, std::size_t, std::size_t,
                                       const DenseMatrix<float>&, DenseMatrix<float>&);
template void weighted_row_sums<double>(const DenseMatrix<double>&, std::size_t, std::size_t,
                                        const DenseMatrix<double>&, DenseMatrix<double>&);
template float dot_rows<float>(const float*, const float*, std::size_t);
template double dot_rows<double>(const double*, const double*, std::size_t);

}  // namespace paramsel
