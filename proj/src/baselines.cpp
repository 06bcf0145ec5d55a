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

#include "paramsel/baselines.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include <json.hpp>

#include "paramsel/error.hpp"
#include "paramsel/kernels.hpp"
#include "paramsel/parallel.hpp"
#include "paramsel/random.hpp"

namespace paramsel {

namespace {

void check_budget(std::size_t n, std::size_t m) {
    if (m == 0) {
        throw Error(ErrorCode::validation, "budget must be positive");
    }
    if (m > n) {
        throw Error(ErrorCode::validation, "budget m=" + std::to_string(m) +
                                                   " exceeds dataset size n=" +
                                                   std::to_string(n));
    }
}

SelectionResult baseline_result(const char* method, std::size_t m, std::uint64_t seed) {
    SelectionResult result;
    result.method = method;
    result.config.budget = m;
    result.config.seed = seed;
    return result;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SelectionResult random_select(std::size_t n, std::size_t m, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    check_budget(n, m);
    SelectionResult result = baseline_result("random", m, seed);
    Rng rng(seed);
    result.indices = sample_without_replacement(n, m, rng);
    result.wall_time_s = elapsed_since(start);
    return result;
}

SelectionResult kcenter_select(const EmbeddingMatrix& matrix, std::size_t m, std::uint64_t seed,
                               std::size_t threads) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = matrix.n();
    check_budget(n, m);
    SelectionResult result = baseline_result("kcenter", m, seed);

    const DenseMatrix<float>& rows = matrix.rows();
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<char> chosen(n, 0);
    const std::size_t workers = resolve_threads(threads);
    constexpr std::size_t kChunk = 2048;
    const std::size_t chunks = (n + kChunk - 1) / kChunk;

    Rng rng(seed);
    std::size_t center = static_cast<std::size_t>(rng.uniform_index(n));
    result.indices.reserve(m);
    result.radius_history.reserve(m);
    for (std::size_t t = 0; t < m; ++t) {
        result.indices.push_back(center);
        chosen[center] = 1;
        const float* c = rows.row(center).data();
        parallel_for(chunks, workers, [&](std::size_t chunk, std::size_t) {
            const std::size_t hi = std::min(n, (chunk + 1) * kChunk);
            for (std::size_t i = chunk * kChunk; i < hi; ++i) {
                const double dist =
                        1.0 - static_cast<double>(dot_rows(rows.row(i).data(), c, rows.stride()));
                nearest[i] = std::min(nearest[i], dist);
            }
        });
        // Covering radius over all points; chosen points count with their
        // (rounding-level) distance to themselves.
        double radius = 0.0;
        std::optional<std::size_t> next;
        for (std::size_t i = 0; i < n; ++i) {
            radius = std::max(radius, nearest[i]);
            if (!chosen[i] && (!next || nearest[i] > nearest[*next])) {
                next = i;
            }
        }
        result.radius_history.push_back(radius);
        if (next) {
            center = *next;
        }
    }
    result.wall_time_s = elapsed_since(start);
    return result;
}

SelectionResult score_select(const ScoreFile& scores, std::size_t n, std::size_t m) {
    const auto start = std::chrono::steady_clock::now();
    if (scores.scores.size() != n) {
        throw Error(ErrorCode::validation, "score count " + std::to_string(scores.scores.size()) +
                                                   " does not match n=" + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(scores.scores[i])) {
            throw Error(ErrorCode::non_finite, "non-finite score at row " + std::to_string(i));
        }
    }
    check_budget(n, m);
    SelectionResult result = baseline_result("score", m, 0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& s = scores.scores;
    if (scores.direction == ScoreDirection::descending) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    } else {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
    }
    order.resize(m);
    result.indices = std::move(order);
    result.wall_time_s = elapsed_since(start);
    return result;
}

ScoreFile load_scores(const std::filesystem::path& path, const EmbeddingMatrix& matrix,
                      ScoreDirection direction) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    const std::size_t n = matrix.n();
    ScoreFile out;
    out.direction = direction;
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            lines.push_back(std::move(line));
        }
    }
    const auto where = [&](std::size_t k) {
        return path.string() + ": entry " + std::to_string(k + 1) + ": ";
    };
    if (lines.empty()) {
        throw Error(ErrorCode::parse, path.string() + ": no scores");
    }
    const bool jsonl = lines.front().find_first_not_of(" \t") != std::string::npos &&
                       lines.front()[lines.front().find_first_not_of(" \t")] == '{';
    if (jsonl) {
        out.scores.assign(n, std::numeric_limits<double>::quiet_NaN());
        std::vector<char> seen(n, 0);
        for (std::size_t k = 0; k < lines.size(); ++k) {
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(lines[k]);
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorCode::parse, where(k) + "invalid JSON: " + e.what());
            }
            if (!obj.is_object() || !obj.contains("id") || !obj.contains("score") ||
                !obj["id"].is_number_unsigned() || !obj["score"].is_number()) {
                throw Error(ErrorCode::parse, where(k) + "expected {\"id\": uint, \"score\": number}");
            }
            const auto row = matrix.find_id(obj["id"].get<std::uint64_t>());
            if (!row) {
                throw Error(ErrorCode::validation, where(k) + "unknown id " +
                                                           obj["id"].dump());
            }
            if (seen[*row]) {
                throw Error(ErrorCode::duplicate_id, where(k) + "duplicate id " +
                                                             obj["id"].dump());
            }
            seen[*row] = 1;
            out.scores[*row] = obj["score"].get<double>();
        }
        if (lines.size() != n) {
            throw Error(ErrorCode::validation, path.string() + ": " +
                                                       std::to_string(lines.size()) +
                                                       " scores for n=" + std::to_string(n) +
                                                       " rows");
        }
        return out;
    }
    out.scores.reserve(lines.size());
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const std::string& text = lines[k];
        const auto first = text.find_first_not_of(" \t");
        const auto last = text.find_last_not_of(" \t\r");
        double value = 0.0;
        const char* begin = text.data() + first;
        const char* end = text.data() + last + 1;
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr != end) {
            throw Error(ErrorCode::parse, where(k) + "not a number: '" + text + "'");
        }
        out.scores.push_back(value);
    }
    if (out.scores.size() != n) {
        throw Error(ErrorCode::validation, path.string() + ": " +
                                                   std::to_string(out.scores.size()) +
                                                   " scores for n=" + std::to_string(n) +
                                                   " rows");
    }
    return out;
}

}  // namespace paramsel
