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

#include "paramsel/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <type_traits>

#include "paramsel/error.hpp"
#include "paramsel/kernels.hpp"
#include "paramsel/parallel.hpp"
#include "paramsel/random.hpp"

namespace paramsel {

namespace {

[[noreturn]] void invalid(const std::string& message) {
    throw Error(ErrorCode::validation, message);
}

double max_norm_error(const DenseMatrix<double>& theta) {
    double worst = 0.0;
    for (std::size_t j = 0; j < theta.rows(); ++j) {
        double sq = 0.0;
        for (double x : theta.row(j)) {
            sq += x * x;
        }
        worst = std::max(worst, std::abs(std::sqrt(sq) - 1.0));
    }
    return worst;
}

// Square tiles for the in-place transposes over the m x m buffer.
constexpr std::size_t kTransposeTile = 64;

// Candidates kept per parameter during matching before a full rescan is needed.
constexpr std::size_t kMatchCandidates = 8;

template <class T>
struct Candidate {
    T dot;
    std::uint32_t row;
};

template <class T>
bool better(const Candidate<T>& a, const Candidate<T>& b) {
    return a.dot > b.dot || (a.dot == b.dot && a.row < b.row);
}

/// Scratch state for evaluating the objective at one precision. The feature
/// matrix is borrowed when T is float and widened once when T is double.
template <class T>
class Workspace {
public:
    Workspace(const EmbeddingMatrix& matrix, const SelectorConfig& config)
        : matrix_(matrix), config_(config), threads_(resolve_threads(config.threads)) {
        if constexpr (std::is_same_v<T, float>) {
            features_ = &matrix.rows();
        } else {
            owned_features_ = matrix.rows().template cast<double>();
            features_ = &owned_features_;
        }
    }

    const DenseMatrix<T>& features() const { return *features_; }
    std::size_t n() const { return matrix_.n(); }
    std::size_t m() const { return theta_.rows(); }

    void load_theta(const DenseMatrix<double>& theta) {
        if (theta.cols() != matrix_.d()) {
            invalid("dimension mismatch: features d=" + std::to_string(matrix_.d()) +
                    ", theta d=" + std::to_string(theta.cols()));
        }
        if (theta.rows() == 0) {
            invalid("theta has no rows");
        }
        if (theta_.rows() != theta.rows() || theta_.cols() != theta.cols()) {
            theta_ = DenseMatrix<T>(theta.rows(), theta.cols());
        }
        for (std::size_t j = 0; j < theta.rows(); ++j) {
            auto src = theta.row(j);
            auto dst = theta_.row(j);
            for (std::size_t c = 0; c < src.size(); ++c) {
                dst[c] = static_cast<T>(src[c]);
            }
        }
    }

    Assignments assign() {
        const std::size_t rows = n();
        const std::size_t params = m();
        const std::size_t bs = std::max<std::size_t>(1, config_.block_size);
        const std::size_t blocks = (rows + bs - 1) / bs;
        Assignments out;
        out.index.resize(rows);
        out.max_sim.resize(rows);
        const std::size_t workers = prepare_block_buffers(blocks, std::min(bs, rows) * params);
        parallel_for(blocks, workers, [&](std::size_t b, std::size_t w) {
            const std::size_t lo = b * bs;
            const std::size_t hi = std::min(rows, lo + bs);
            T* buf = block_buffers_[w].data();
            dot_products(features(), lo, hi, theta_, 0, params, buf, params);
            for (std::size_t i = lo; i < hi; ++i) {
                const T* sims = buf + (i - lo) * params;
                const std::size_t arg = argmax_first(sims, params);
                out.index[i] = static_cast<std::uint32_t>(arg);
                out.max_sim[i] = static_cast<double>(sims[arg]) / config_.tau;
            }
        });
        return out;
    }

    double matching(const Assignments& a) const {
        double sum = 0.0;
        for (double s : a.max_sim) {
            sum += s;
        }
        return -sum / static_cast<double>(n());
    }

    void matching_gradient(const Assignments& a, DenseMatrix<double>& grad) const {
        const std::size_t d = matrix_.d();
        DenseMatrix<double> sums(m(), d);
        for (std::size_t i = 0; i < n(); ++i) {
            auto f = features().row(i);
            double* dst = sums.row(a.index[i]).data();
            for (std::size_t c = 0; c < d; ++c) {
                dst[c] += static_cast<double>(f[c]);
            }
        }
        const double coef = -1.0 / (static_cast<double>(n()) * config_.tau);
        for (std::size_t j = 0; j < m(); ++j) {
            auto src = sums.row(j);
            auto dst = grad.row(j);
            for (std::size_t c = 0; c < d; ++c) {
                dst[c] += coef * src[c];
            }
        }
    }

    /// Returns the diversity term. With `grad`, also adds
    /// grad_scale * (W + W^T) theta, W being the row-wise softmax weights.
    double diversity(DenseMatrix<double>* grad, double grad_scale) {
        const std::size_t params = m();
        if (params < 2) {
            invalid("diversity term needs at least 2 parameters, got " + std::to_string(params));
        }
        if (sim_.rows() != params) {
            sim_ = DenseMatrix<T>(params, params);
        }
        pairwise_similarities();

        const double tau = config_.tau;
        std::vector<double> lse(params);
        std::vector<std::vector<double>> scratch(std::min(threads_, params),
                                                 std::vector<double>(params));
        parallel_for(params, scratch.size(), [&](std::size_t j, std::size_t w) {
            T* row = sim_.row(j).data();
            std::vector<double>& e = scratch[w];
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < params; ++k) {
                if (k != j) {
                    mx = std::max(mx, static_cast<double>(row[k]) / tau);
                }
            }
            double sum = 0.0;
            for (std::size_t k = 0; k < params; ++k) {
                e[k] = k == j ? 0.0 : std::exp(static_cast<double>(row[k]) / tau - mx);
                sum += e[k];
            }
            lse[j] = mx + std::log(sum);
            if (grad != nullptr) {
                for (std::size_t k = 0; k < params; ++k) {
                    row[k] = static_cast<T>(e[k] / sum);
                }
            }
        });
        double total = 0.0;
        for (double v : lse) {
            total += v;
        }
        const double diversity = -total / static_cast<double>(params);

        if (grad != nullptr) {
            symmetrize_weights();
            add_weighted_theta(*grad, grad_scale);
        }
        return diversity;
    }

    /// Greedy distinct matching of parameter rows to feature rows.
    void match(std::vector<std::size_t>& indices, std::vector<double>& similarity) {
        const std::size_t rows = n();
        const std::size_t params = m();
        const std::size_t keep = std::min(kMatchCandidates, rows);
        const std::size_t bs = std::max<std::size_t>(1, config_.block_size);
        const std::size_t blocks = (rows + bs - 1) / bs;
        const std::size_t workers =
                prepare_block_buffers(blocks, std::min(bs, rows) * params);

        // Per-worker top-`keep` candidate lists, sorted best first.
        std::vector<std::vector<Candidate<T>>> tops(
                workers, std::vector<Candidate<T>>(params * keep));
        std::vector<std::vector<std::size_t>> counts(workers,
                                                     std::vector<std::size_t>(params, 0));
        parallel_for(blocks, workers, [&](std::size_t b, std::size_t w) {
            const std::size_t lo = b * bs;
            const std::size_t hi = std::min(rows, lo + bs);
            T* buf = block_buffers_[w].data();
            dot_products(features(), lo, hi, theta_, 0, params, buf, params);
            auto& top = tops[w];
            auto& count = counts[w];
            for (std::size_t i = lo; i < hi; ++i) {
                const T* sims = buf + (i - lo) * params;
                for (std::size_t j = 0; j < params; ++j) {
                    Candidate<T> cand{sims[j], static_cast<std::uint32_t>(i)};
                    Candidate<T>* list = top.data() + j * keep;
                    std::size_t& cnt = count[j];
                    if (cnt == keep && !better(cand, list[keep - 1])) {
                        continue;
                    }
                    std::size_t pos = cnt < keep ? cnt++ : keep - 1;
                    while (pos > 0 && better(cand, list[pos - 1])) {
                        list[pos] = list[pos - 1];
                        --pos;
                    }
                    list[pos] = cand;
                }
            }
        });

        // Merge worker lists; the candidate order is total so the merge is
        // independent of which worker saw which block.
        std::vector<Candidate<T>> merged(params * keep);
        std::vector<std::size_t> merged_count(params);
        std::vector<Candidate<T>> pool;
        for (std::size_t j = 0; j < params; ++j) {
            pool.clear();
            for (std::size_t w = 0; w < workers; ++w) {
                pool.insert(pool.end(), tops[w].begin() + j * keep,
                            tops[w].begin() + j * keep + counts[w][j]);
            }
            std::sort(pool.begin(), pool.end(), better<T>);
            merged_count[j] = std::min(keep, pool.size());
            std::copy_n(pool.begin(), merged_count[j], merged.begin() + j * keep);
        }

        // Global greedy over (parameter, row) pairs: the most similar free pair
        // is fixed first, ties to the smaller parameter then the smaller row.
        // Heap entries go stale when their row is taken and are refreshed
        // from the next candidate, or from a full rescan once the list runs out.
        struct Entry {
            T dot;
            std::uint32_t param;
            std::uint32_t row;
        };
        auto lower = [](const Entry& a, const Entry& b) {
            if (a.dot != b.dot) return a.dot < b.dot;
            if (a.param != b.param) return a.param > b.param;
            return a.row > b.row;
        };
        std::priority_queue<Entry, std::vector<Entry>, decltype(lower)> heap(lower);
        std::vector<std::size_t> cursor(params, 0);
        for (std::size_t j = 0; j < params; ++j) {
            const auto& cand = merged[j * keep];
            heap.push({cand.dot, static_cast<std::uint32_t>(j), cand.row});
        }
        std::vector<char> taken(rows, 0);
        indices.assign(params, 0);
        similarity.assign(params, 0.0);
        while (!heap.empty()) {
            const Entry top = heap.top();
            heap.pop();
            const std::size_t j = top.param;
            if (!taken[top.row]) {
                taken[top.row] = 1;
                indices[j] = top.row;
                similarity[j] = static_cast<double>(top.dot);
                continue;
            }
            std::optional<Candidate<T>> next;
            while (++cursor[j] < merged_count[j]) {
                const auto& cand = merged[j * keep + cursor[j]];
                if (!taken[cand.row]) {
                    next = cand;
                    break;
                }
            }
            if (!next) {
                next = rescan(j, taken);
            }
            heap.push({next->dot, static_cast<std::uint32_t>(j), next->row});
        }
    }

private:
    std::size_t prepare_block_buffers(std::size_t blocks, std::size_t size) {
        const std::size_t workers = std::max<std::size_t>(1, std::min(threads_, blocks));
        block_buffers_.resize(workers);
        for (auto& buf : block_buffers_) {
            if (buf.size() < size) {
                buf.assign(size, T{});
            }
        }
        return workers;
    }

    Candidate<T> rescan(std::size_t j, const std::vector<char>& taken) const {
        const T* param = theta_.row(j).data();
        std::optional<Candidate<T>> best;
        for (std::size_t i = 0; i < n(); ++i) {
            if (taken[i]) {
                continue;
            }
            Candidate<T> cand{dot_rows(features().row(i).data(), param, theta_.stride()),
                              static_cast<std::uint32_t>(i)};
            if (!best || better(cand, *best)) {
                best = cand;
            }
        }
        return *best;
    }

    void pairwise_similarities() {
        const std::size_t params = m();
        const std::size_t tiles = (params + kTransposeTile - 1) / kTransposeTile;
        // Upper block triangle, then mirror. dot(a, b) == dot(b, a) bitwise,
        // so the mirrored entries equal what a full product would give.
        parallel_for(tiles, threads_, [&](std::size_t t, std::size_t) {
            const std::size_t j0 = t * kTransposeTile;
            const std::size_t j1 = std::min(params, j0 + kTransposeTile);
            dot_products(theta_, j0, j1, theta_, j0, params, &sim_(j0, j0), sim_.stride());
        });
        for_lower_tiles([&](std::size_t j, std::size_t k) { sim_(j, k) = sim_(k, j); });
    }

    void symmetrize_weights() {
        for_lower_tiles([&](std::size_t j, std::size_t k) {
            const T a = sim_(j, k) + sim_(k, j);
            sim_(j, k) = a;
            sim_(k, j) = a;
        });
    }

    // Visits (j, k) with k < j tile by tile.
    template <class Fn>
    void for_lower_tiles(Fn&& fn) {
        const std::size_t params = m();
        for (std::size_t j0 = 0; j0 < params; j0 += kTransposeTile) {
            const std::size_t j1 = std::min(params, j0 + kTransposeTile);
            for (std::size_t k0 = 0; k0 <= j0; k0 += kTransposeTile) {
                for (std::size_t j = j0; j < j1; ++j) {
                    const std::size_t k1 = std::min(j, k0 + kTransposeTile);
                    for (std::size_t k = k0; k < k1; ++k) {
                        fn(j, k);
                    }
                }
            }
        }
    }

    void add_weighted_theta(DenseMatrix<double>& grad, double scale) {
        const std::size_t params = m();
        const std::size_t d = matrix_.d();
        DenseMatrix<T> sums(params, d);
        const std::size_t tiles = (params + kTransposeTile - 1) / kTransposeTile;
        parallel_for(tiles, threads_, [&](std::size_t t, std::size_t) {
            const std::size_t j0 = t * kTransposeTile;
            weighted_row_sums(sim_, j0, std::min(params, j0 + kTransposeTile), theta_, sums);
        });
        for (std::size_t j = 0; j < params; ++j) {
            auto src = sums.row(j);
            auto dst = grad.row(j);
            for (std::size_t c = 0; c < d; ++c) {
                dst[c] += scale * static_cast<double>(src[c]);
            }
        }
    }

    const EmbeddingMatrix& matrix_;
    const SelectorConfig& config_;
    std::size_t threads_;
    const DenseMatrix<T>* features_ = nullptr;
    DenseMatrix<T> owned_features_;
    DenseMatrix<T> theta_;
    DenseMatrix<T> sim_;
    std::vector<std::vector<T>> block_buffers_;
};

template <class Fn>
decltype(auto) with_precision(Precision precision, Fn&& fn) {
    if (precision == Precision::fp64) {
        return fn(double{});
    }
    return fn(float{});
}

template <class T>
LossTerms evaluate(Workspace<T>& ws, const SelectorConfig& config, DenseMatrix<double>* grad) {
    const Assignments a = ws.assign();
    LossTerms terms;
    terms.matching = ws.matching(a);
    if (grad != nullptr) {
        ws.matching_gradient(a, *grad);
    }
    const bool want_diversity_grad = grad != nullptr && config.lambda != 0.0;
    const double scale = config.lambda / (static_cast<double>(ws.m()) * config.tau);
    terms.diversity = ws.diversity(want_diversity_grad ? grad : nullptr, scale);
    terms.total = terms.matching - config.lambda * terms.diversity;
    return terms;
}

void check_theta(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta) {
    if (theta.cols() != matrix.d()) {
        invalid("dimension mismatch: features d=" + std::to_string(matrix.d()) +
                ", theta d=" + std::to_string(theta.cols()));
    }
}

}  // namespace

void SelectorConfig::validate() const {
    if (budget == 0) {
        invalid("budget must be positive");
    }
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        invalid("tau must be positive and finite");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        invalid("lambda must be non-negative and finite");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        invalid("learning rate must be positive and finite");
    }
    if (iterations == 0) {
        invalid("iterations must be at least 1");
    }
    if (block_size == 0) {
        invalid("block size must be positive");
    }
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
        invalid("adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) {
        invalid("adam epsilon must be positive");
    }
    if (budget > std::numeric_limits<std::uint32_t>::max()) {
        invalid("budget exceeds 2^32 - 1");
    }
}

void SelectorConfig::validate_for(std::size_t n) const {
    validate();
    if (budget > n) {
        invalid("budget m=" + std::to_string(budget) + " exceeds dataset size n=" +
                std::to_string(n));
    }
}

ParamState init_params(const EmbeddingMatrix& matrix, const SelectorConfig& config) {
    config.validate_for(matrix.n());
    Rng rng(config.seed);
    ParamState state;
    state.init_rows = sample_without_replacement(matrix.n(), config.budget, rng);
    state.theta = DenseMatrix<double>(config.budget, matrix.d());
    for (std::size_t j = 0; j < config.budget; ++j) {
        auto src = matrix.row(state.init_rows[j]);
        auto dst = state.theta.row(j);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    state.adam_m = DenseMatrix<double>(config.budget, matrix.d());
    state.adam_v = DenseMatrix<double>(config.budget, matrix.d());
    return state;
}

Assignments compute_assignments(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
                                double tau, std::size_t block_size, Precision precision,
                                std::size_t threads) {
    check_theta(matrix, theta);
    if (!(tau > 0.0)) {
        invalid("tau must be positive");
    }
    SelectorConfig config;
    config.tau = tau;
    config.block_size = block_size;
    config.threads = threads;
    return with_precision(precision, [&](auto tag) {
        Workspace<decltype(tag)> ws(matrix, config);
        ws.load_theta(theta);
        return ws.assign();
    });
}

LossTerms loss(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
               const SelectorConfig& config) {
    check_theta(matrix, theta);
    if (theta.rows() < 2) {
        invalid("loss needs m >= 2, got m=" + std::to_string(theta.rows()));
    }
    return with_precision(config.precision, [&](auto tag) {
        Workspace<decltype(tag)> ws(matrix, config);
        ws.load_theta(theta);
        return evaluate(ws, config, nullptr);
    });
}

DenseMatrix<double> gradient(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
                             const SelectorConfig& config, const Assignments& assignments) {
    check_theta(matrix, theta);
    if (assignments.index.size() != matrix.n()) {
        invalid("assignments length does not match n");
    }
    if (theta.rows() < 2) {
        invalid("gradient needs m >= 2, got m=" + std::to_string(theta.rows()));
    }
    DenseMatrix<double> grad(theta.rows(), theta.cols());
    with_precision(config.precision, [&](auto tag) {
        Workspace<decltype(tag)> ws(matrix, config);
        ws.load_theta(theta);
        ws.matching_gradient(assignments, grad);
        if (config.lambda != 0.0) {
            const double scale =
                    config.lambda / (static_cast<double>(theta.rows()) * config.tau);
            ws.diversity(&grad, scale);
        }
    });
    return grad;
}

void step(ParamState& state, const DenseMatrix<double>& grad, const SelectorConfig& config) {
    DenseMatrix<double>& theta = state.theta;
    if (grad.rows() != theta.rows() || grad.cols() != theta.cols()) {
        invalid("gradient shape does not match theta");
    }
    const std::size_t iter = state.iter + 1;
    for (std::size_t j = 0; j < grad.rows(); ++j) {
        for (double g : grad.row(j)) {
            if (!std::isfinite(g)) {
                throw Error(ErrorCode::numerical,
                            "non-finite gradient at iteration " + std::to_string(iter) +
                                    " (parameter row " + std::to_string(j) + ")");
            }
        }
    }

    if (config.optimizer == Optimizer::adam) {
        if (state.adam_m.rows() != theta.rows() || state.adam_m.cols() != theta.cols()) {
            state.adam_m = DenseMatrix<double>(theta.rows(), theta.cols());
            state.adam_v = DenseMatrix<double>(theta.rows(), theta.cols());
        }
        const double b1 = config.adam_beta1;
        const double b2 = config.adam_beta2;
        const double t = static_cast<double>(iter);
        const double bias1 = 1.0 - std::pow(b1, t);
        const double bias2_sqrt = std::sqrt(1.0 - std::pow(b2, t));
        const double step_size = config.learning_rate / bias1;
        for (std::size_t j = 0; j < theta.rows(); ++j) {
            auto g = grad.row(j);
            auto m1 = state.adam_m.row(j);
            auto m2 = state.adam_v.row(j);
            auto th = theta.row(j);
            for (std::size_t c = 0; c < th.size(); ++c) {
                m1[c] = b1 * m1[c] + (1.0 - b1) * g[c];
                m2[c] = b2 * m2[c] + (1.0 - b2) * g[c] * g[c];
                const double denom = std::sqrt(m2[c]) / bias2_sqrt + config.adam_epsilon;
                th[c] -= step_size * m1[c] / denom;
            }
        }
    } else {
        for (std::size_t j = 0; j < theta.rows(); ++j) {
            auto g = grad.row(j);
            auto th = theta.row(j);
            for (std::size_t c = 0; c < th.size(); ++c) {
                th[c] -= config.learning_rate * g[c];
            }
        }
    }

    for (std::size_t j = 0; j < theta.rows(); ++j) {
        auto th = theta.row(j);
        double sq = 0.0;
        for (double x : th) {
            sq += x * x;
        }
        if (!(sq > 0.0) || !std::isfinite(sq)) {
            throw Error(ErrorCode::numerical, "parameter row " + std::to_string(j) +
                                                      " degenerate at iteration " +
                                                      std::to_string(iter));
        }
        const double norm = std::sqrt(sq);
        for (double& x : th) {
            x /= norm;
        }
    }
    state.iter = iter;
}

ParamState optimize(const EmbeddingMatrix& matrix, const SelectorConfig& config,
                    const ProgressFn& progress) {
    config.validate_for(matrix.n());
    if (config.budget < 2) {
        invalid("the parametric selector needs budget >= 2");
    }
    ParamState state = init_params(matrix, config);
    with_precision(config.precision, [&](auto tag) {
        Workspace<decltype(tag)> ws(matrix, config);
        DenseMatrix<double> grad(config.budget, matrix.d());
        for (std::size_t t = 0; t < config.iterations; ++t) {
            ws.load_theta(state.theta);
            grad.fill(0.0);
            const LossTerms terms = evaluate(ws, config, &grad);
            step(state, grad, config);
            state.loss_history.push_back({t, terms, max_norm_error(state.theta)});
            if (progress) {
                progress(state.loss_history.back());
            }
        }
        ws.load_theta(state.theta);
        state.final_loss = evaluate(ws, config, nullptr);
    });
    return state;
}

SelectionResult match_subset(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
                             const SelectorConfig& config) {
    check_theta(matrix, theta);
    if (theta.rows() > matrix.n()) {
        invalid("cannot match " + std::to_string(theta.rows()) + " parameters to " +
                std::to_string(matrix.n()) + " rows");
    }
    SelectionResult result;
    result.method = "parametric";
    result.config = config;
    with_precision(config.precision, [&](auto tag) {
        Workspace<decltype(tag)> ws(matrix, config);
        ws.load_theta(theta);
        ws.match(result.indices, result.match_similarity);
    });
    return result;
}

SelectionResult select(const EmbeddingMatrix& matrix, const SelectorConfig& config,
                       const ProgressFn& progress) {
    const auto start = std::chrono::steady_clock::now();
    ParamState state = optimize(matrix, config, progress);
    SelectionResult result = match_subset(matrix, state.theta, config);
    result.loss_history = std::move(state.loss_history);
    result.final_loss = state.final_loss;
    result.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace paramsel
