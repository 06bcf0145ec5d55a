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

// Shared fixtures and scalar reference implementations for the tests. The
// references use plain double loops and share no code with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "paramsel/embedding_store.hpp"
#include "paramsel/matrix.hpp"

namespace paramsel::test {

using Rows = std::vector<std::vector<double>>;

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("paramsel-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& b) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Rows random_unit_rows(std::size_t n, std::size_t d, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Rows rows(n, std::vector<double>(d));
    for (auto& r : rows) {
        double sq = 0.0;
        do {
            sq = 0.0;
            for (double& x : r) {
                x = normal(gen);
                sq += x * x;
            }
        } while (sq < 1e-12);
        for (double& x : r) {
            x /= std::sqrt(sq);
        }
    }
    return rows;
}

inline DenseMatrix<float> to_float_matrix(const Rows& rows) {
    DenseMatrix<float> m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            m(i, c) = static_cast<float>(rows[i][c]);
        }
    }
    return m;
}

inline DenseMatrix<double> to_double_matrix(const Rows& rows) {
    DenseMatrix<double> m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
            m(i, c) = rows[i][c];
        }
    }
    return m;
}

template <class T>
Rows to_rows(const DenseMatrix<T>& m) {
    Rows rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            rows[i][c] = static_cast<double>(m(i, c));
        }
    }
    return rows;
}

inline EmbeddingMatrix make_matrix(const Rows& rows, bool normalize = true) {
    return EmbeddingMatrix(to_float_matrix(rows), {}, normalize);
}

inline EmbeddingMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    return make_matrix(random_unit_rows(n, d, gen));
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        s += a[c] * b[c];
    }
    return s;
}

struct OracleLoss {
    double total;
    double matching;
    double diversity;
};

/// Objective straight from its definition: argmax assignment with ties to
/// the smallest parameter, log-sum-exp over k != j without shifting.
inline OracleLoss oracle_loss(const Rows& f, const Rows& theta, double tau, double lambda) {
    double m_sum = 0.0;
    for (const auto& fi : f) {
        double best = -INFINITY;
        for (const auto& tj : theta) {
            best = std::max(best, dot(fi, tj));
        }
        m_sum += best / tau;
    }
    double r_sum = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (k != j) {
                s += std::exp(dot(theta[j], theta[k]) / tau);
            }
        }
        r_sum += std::log(s);
    }
    const double matching = -m_sum / static_cast<double>(f.size());
    const double diversity = -r_sum / static_cast<double>(theta.size());
    return {matching - lambda * diversity, matching, diversity};
}

inline std::vector<std::size_t> oracle_assign(const Rows& f, const Rows& theta) {
    std::vector<std::size_t> out;
    for (const auto& fi : f) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < theta.size(); ++j) {
            if (dot(fi, theta[j]) > dot(fi, theta[best])) {
                best = j;
            }
        }
        out.push_back(best);
    }
    return out;
}

/// Sorts every (parameter, row) pair by similarity and keeps a pair when
/// both sides are still free.
inline std::vector<std::size_t> oracle_greedy_match(const Rows& f, const Rows& theta) {
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            pairs.emplace_back(-dot(f[i], theta[j]), j, i);
        }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::size_t> out(theta.size(), SIZE_MAX);
    std::vector<bool> row_taken(f.size(), false);
    for (const auto& [neg, j, i] : pairs) {
        if (out[j] == SIZE_MAX && !row_taken[i]) {
            out[j] = i;
            row_taken[i] = true;
        }
    }
    return out;
}

}  // namespace paramsel::test
