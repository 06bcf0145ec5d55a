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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "paramsel/diagnostics.hpp"
#include "paramsel/error.hpp"
#include "paramsel/synthetic.hpp"
#include "support.hpp"

using namespace paramsel;
using paramsel::test::Rows;

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return static_cast<std::uint64_t>(r);
}

// 1 - C(n-c, k) / C(n, k) reduced as a fraction of integers.
double rational_pass_at_k(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
    const std::uint64_t den = binomial(n, k);
    const std::uint64_t num = den - binomial(n - c, k);
    const std::uint64_t g = std::gcd(num, den);
    return static_cast<double>(num / g) / static_cast<double>(den / g);
}

// Fraction of k-subsets of n samples (the first c correct) with a correct one.
double enumerate_pass_at_k(int n, int c, int k) {
    std::vector<char> pick(n, 0);
    std::fill(pick.begin(), pick.begin() + k, 1);
    long hit = 0, total = 0;
    do {
        ++total;
        for (int i = 0; i < c; ++i) {
            if (pick[i]) {
                ++hit;
                break;
            }
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return static_cast<double>(hit) / static_cast<double>(total);
}

std::vector<std::size_t> iota_n(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("pass_at_k examples") {
    CHECK(pass_at_k(1, 1, 1) == 1.0);
    for (std::uint64_t k = 1; k <= 10; ++k) CHECK(pass_at_k(10, 0, k) == 0.0);
    CHECK(pass_at_k(10, 3, 1) == doctest::Approx(enumerate_pass_at_k(10, 3, 1)).epsilon(1e-14));
    CHECK(pass_at_k(10, 3, 1) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(pass_at_k(10, 3, 8) == 1.0);
    CHECK(pass_at_k(5, 5, 5) == 1.0);
    CHECK(pass_at_k(9, 4, 3) == doctest::Approx(enumerate_pass_at_k(9, 4, 3)).epsilon(1e-14));
}

TEST_CASE("pass_at_k rejects invalid arguments") {
    CHECK_THROWS_AS(pass_at_k(3, 4, 1), Error);
    CHECK_THROWS_AS(pass_at_k(3, 1, 0), Error);
    CHECK_THROWS_AS(pass_at_k(3, 1, 4), Error);
}

TEST_CASE("pass_at_k matches the rational oracle and is monotone") {
    for (std::uint64_t n = 1; n <= 30; ++n) {
        for (std::uint64_t c = 0; c <= n; ++c) {
            for (std::uint64_t k = 1; k <= n; ++k) {
                const double v = pass_at_k(n, c, k);
                REQUIRE(std::abs(v - rational_pass_at_k(n, c, k)) <= 1e-12);
                REQUIRE(v >= 0.0);
                REQUIRE(v <= 1.0);
                if (k > 1) REQUIRE(v >= pass_at_k(n, c, k - 1));
                if (c > 0) REQUIRE(v >= pass_at_k(n, c - 1, k));
            }
        }
    }
}

TEST_CASE("coverage examples") {
    std::mt19937_64 gen(31);
    const auto f = test::make_matrix(test::random_unit_rows(40, 5, gen));
    const auto all = iota_n(40);
    CHECK(coverage(f, all) == doctest::Approx(1.0).epsilon(1e-6));

    const auto same = test::make_matrix(Rows(7, {0.6, 0.8}));
    CHECK(coverage(same, std::vector<std::size_t>{3}) == doctest::Approx(1.0).epsilon(1e-6));

    // Two tight clusters with one selected point each.
    MixtureSpec spec;
    spec.n = 400;
    spec.d = 32;
    spec.weights = {0.5, 0.5};
    spec.spread = 0.2;
    spec.seed = 3;
    const Mixture mix = make_mixture(spec);
    const Rows pts = test::to_rows(mix.matrix.rows());
    std::vector<std::size_t> picks;
    for (std::size_t label : {0, 1}) {
        picks.push_back(std::find(mix.labels.begin(), mix.labels.end(), label) - mix.labels.begin());
    }
    double within = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        within += test::dot(pts[i], pts[picks[mix.labels[i]]]);
    }
    within /= static_cast<double>(pts.size());
    CHECK(coverage(mix.matrix, picks) == doctest::Approx(within).epsilon(1e-6));
}

TEST_CASE("coverage grows with supersets and matches a scalar reference") {
    std::mt19937_64 gen(32);
    const Rows pts = test::random_unit_rows(1500, 7, gen);
    const auto f = test::make_matrix(pts);
    const Rows fr = test::to_rows(f.rows());
    std::vector<std::size_t> order = iota_n(1500);
    std::shuffle(order.begin(), order.end(), gen);
    double prev = -1.0;
    for (std::size_t m : {1, 2, 5, 20, 100, 1500}) {
        const std::vector<std::size_t> sel(order.begin(), order.begin() + m);
        const double cov = coverage(f, sel, 2);
        double ref = 0.0;
        for (const auto& p : fr) {
            double best = -INFINITY;
            for (std::size_t s : sel) best = std::max(best, test::dot(p, fr[s]));
            ref += best;
        }
        CHECK(cov == doctest::Approx(ref / 1500.0).epsilon(1e-6));
        CHECK(cov >= prev);
        prev = cov;
    }
}

TEST_CASE("coverage and diversity validate indices") {
    const auto f = test::random_matrix(10, 3, 33);
    CHECK_THROWS_AS(coverage(f, std::vector<std::size_t>{}), Error);
    CHECK_THROWS_AS(coverage(f, std::vector<std::size_t>{10}), Error);
    CHECK_THROWS_AS(coverage(f, std::vector<std::size_t>{1, 1}), Error);
    CHECK_THROWS_AS(diversity(f, std::vector<std::size_t>{4}), Error);
    CHECK_THROWS_AS(diversity(f, std::vector<std::size_t>{4, 12}), Error);
}

TEST_CASE("diversity examples") {
    const auto orth = test::make_matrix({{1, 0}, {0, 1}});
    auto d = diversity(orth, std::vector<std::size_t>{0, 1});
    CHECK(d.mean_pairwise_sim == 0.0);
    CHECK(d.min_pairwise_dist == 1.0);
    const auto dup = test::make_matrix({{1, 0}, {0, 1}, {1, 0}});
    d = diversity(dup, std::vector<std::size_t>{0, 1, 2});
    CHECK(d.max_pairwise_sim == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("diversity matches a scalar reference and ignores order") {
    std::mt19937_64 gen(34);
    const auto f = test::make_matrix(test::random_unit_rows(3000, 6, gen));
    const Rows fr = test::to_rows(f.rows());
    std::vector<std::size_t> sel = iota_n(3000);
    std::shuffle(sel.begin(), sel.end(), gen);
    sel.resize(1100);  // spans two blocks
    double sum = 0.0, mx = -INFINITY;
    for (std::size_t a = 0; a < sel.size(); ++a) {
        for (std::size_t b = a + 1; b < sel.size(); ++b) {
            const double s = test::dot(fr[sel[a]], fr[sel[b]]);
            sum += s;
            mx = std::max(mx, s);
        }
    }
    const double pairs = 1100.0 * 1099.0 / 2.0;
    const auto d = diversity(f, sel, 2);
    CHECK(d.mean_pairwise_sim == doctest::Approx(sum / pairs).epsilon(1e-5));
    CHECK(d.max_pairwise_sim == doctest::Approx(mx).epsilon(1e-6));
    CHECK(d.min_pairwise_dist == 1.0 - d.max_pairwise_sim);
    std::reverse(sel.begin(), sel.end());
    const auto r = diversity(f, sel, 1);
    CHECK(r.mean_pairwise_sim == doctest::Approx(d.mean_pairwise_sim).epsilon(1e-9));
    CHECK(r.max_pairwise_sim == d.max_pairwise_sim);
}

}  // TEST_SUITE
