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

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "paramsel/kernels.hpp"
#include "support.hpp"

using namespace paramsel;
using paramsel::test::Rows;

namespace {

template <class T>
DenseMatrix<T> random_dense(std::size_t rows, std::size_t cols, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseMatrix<T> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (auto& x : m.row(i)) {
            x = static_cast<T>(u(gen));
        }
    }
    return m;
}

template <class T>
void check_dot_products(std::size_t na, std::size_t nb, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    const auto a = random_dense<T>(na, d, gen);
    const auto b = random_dense<T>(nb, d, gen);
    std::vector<T> out(na * nb);
    dot_products(a, 0, na, b, 0, nb, out.data(), nb);
    const double tol = std::is_same_v<T, float> ? 1e-5 * d : 1e-13 * d;
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            double ref = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                ref += static_cast<double>(a(i, c)) * static_cast<double>(b(j, c));
            }
            REQUIRE(std::abs(out[i * nb + j] - ref) <= tol);
            // The tiled and single-pair kernels agree bitwise.
            REQUIRE(out[i * nb + j] == dot_rows(a.row(i).data(), b.row(j).data(), a.stride()));
        }
    }
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dot_products matches a double reference over tile edge shapes") {
    // Shapes straddle the register tile (6x4) and the vector width.
    for (std::size_t na : {1, 5, 6, 7, 13}) {
        for (std::size_t nb : {1, 3, 4, 9}) {
            for (std::size_t d : {1, 15, 16, 17, 33}) {
                check_dot_products<float>(na, nb, d, na * 100 + nb * 10 + d);
                check_dot_products<double>(na, nb, d, na * 100 + nb * 10 + d + 7);
            }
        }
    }
}

TEST_CASE("dot_products is invariant to row ranges") {
    std::mt19937_64 gen(3);
    const auto a = random_dense<float>(37, 70, gen);
    const auto b = random_dense<float>(23, 70, gen);
    std::vector<float> full(37 * 23);
    dot_products(a, 0, 37, b, 0, 23, full.data(), 23);
    std::uniform_int_distribution<std::size_t> cut(1, 10);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<float> pieced(37 * 23, -9.0f);
        for (std::size_t lo = 0; lo < 37;) {
            const std::size_t hi = std::min<std::size_t>(37, lo + cut(gen));
            for (std::size_t blo = 0; blo < 23;) {
                const std::size_t bhi = std::min<std::size_t>(23, blo + cut(gen));
                dot_products(a, lo, hi, b, blo, bhi, pieced.data() + lo * 23 + blo, 23);
                blo = bhi;
            }
            lo = hi;
        }
        REQUIRE(pieced == full);
    }
}

TEST_CASE("dot_products rejects mismatched widths") {
    DenseMatrix<float> a(2, 3), b(2, 4);
    std::vector<float> out(4);
    CHECK_THROWS(dot_products(a, 0, 2, b, 0, 2, out.data(), 2));
}

TEST_CASE("argmax_first returns the first maximal index") {
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<int> small(0, 4);
    for (std::size_t count : {1, 2, 15, 16, 17, 64, 100}) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<float> v(count);
            for (auto& x : v) {
                x = static_cast<float>(small(gen));
            }
            std::size_t ref = 0;
            for (std::size_t i = 1; i < count; ++i) {
                if (v[i] > v[ref]) ref = i;
            }
            REQUIRE(argmax_first(v.data(), count) == ref);
            std::vector<double> w(v.begin(), v.end());
            REQUIRE(argmax_first(w.data(), count) == ref);
        }
    }
    const std::vector<float> neg = {-3.0f, -1.0f, -2.0f, -1.0f};
    CHECK(argmax_first(neg.data(), neg.size()) == 1);
}

TEST_CASE("weighted_row_sums accumulates weighted rows") {
    std::mt19937_64 gen(5);
    for (std::size_t m : {1, 4, 5, 11, 30}) {
        for (std::size_t d : {1, 16, 97, 100}) {
            const auto w = random_dense<double>(m, m, gen);
            const auto rows = random_dense<double>(m, d, gen);
            auto out = random_dense<double>(m, d, gen);
            const auto before = out;
            weighted_row_sums(w, 0, m, rows, out);
            for (std::size_t j = 0; j < m; ++j) {
                for (std::size_t c = 0; c < d; ++c) {
                    double ref = before(j, c);
                    for (std::size_t k = 0; k < m; ++k) {
                        ref += w(j, k) * rows(k, c);
                    }
                    REQUIRE(out(j, c) == doctest::Approx(ref).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("weighted_row_sums is invariant to output row ranges") {
    std::mt19937_64 gen(8);
    const auto w = random_dense<float>(600, 600, gen);
    const auto rows = random_dense<float>(600, 40, gen);
    DenseMatrix<float> whole(600, 40), pieced(600, 40);
    weighted_row_sums(w, 0, 600, rows, whole);
    for (std::size_t lo = 0; lo < 600; lo += 7) {
        weighted_row_sums(w, lo, std::min<std::size_t>(600, lo + 7), rows, pieced);
    }
    for (std::size_t j = 0; j < 600; ++j) {
        for (std::size_t c = 0; c < 40; ++c) {
            REQUIRE(whole(j, c) == pieced(j, c));
        }
    }
}

}  // TEST_SUITE
