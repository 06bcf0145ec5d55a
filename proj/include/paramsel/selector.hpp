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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "paramsel/embedding_store.hpp"
#include "paramsel/matrix.hpp"

namespace paramsel {

enum class Optimizer { adam, sgd };

/// Arithmetic used for the feature/parameter dot products. Reductions over
/// rows (loss sums, softmax normalizers, gradient feature sums) are always
/// double; fp64 additionally runs the dot products themselves in double.
enum class Precision { fp32, fp64 };

struct SelectorConfig {
    std::size_t budget = 0;  ///< m, number of samples to select
    double tau = 0.07;
    double lambda = 1.0;
    double learning_rate = 0.001;
    std::size_t iterations = 300;
    std::uint64_t seed = 0;
    std::size_t block_size = kDefaultBlockSize;
    Optimizer optimizer = Optimizer::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    Precision precision = Precision::fp32;
    std::size_t threads = 1;  ///< 0 = all hardware threads

    /// Checks the shape-independent invariants; throws Error(validation).
    void validate() const;
    /// validate() plus the run-time constraint m <= n.
    void validate_for(std::size_t n) const;
};

/// One evaluation of the objective. `total` is always computed as
/// matching - lambda * diversity.
struct LossTerms {
    double total = 0.0;
    double matching = 0.0;   ///< -(1/n) sum_i max_j <f_i, theta_j> / tau
    double diversity = 0.0;  ///< -(1/m) sum_j log sum_{k != j} exp(<theta_j, theta_k> / tau)
};

struct LossRecord {
    std::size_t iter = 0;
    LossTerms terms;
    /// max_j | ||theta_j|| - 1 | right after the step taken at this iteration.
    double norm_error = 0.0;
};

/// Optimizer state for the m x d parameter matrix.
struct ParamState {
    DenseMatrix<double> theta;
    DenseMatrix<double> adam_m;
    DenseMatrix<double> adam_v;
    std::size_t iter = 0;
    std::vector<LossRecord> loss_history;
    /// Feature rows theta was initialized from.
    std::vector<std::size_t> init_rows;
    /// Objective at the parameters left by the last step.
    std::optional<LossTerms> final_loss;
};

/// Per-sample nearest parameter: index[i] = argmax_j <f_i, theta_j> with ties
/// to the smaller j, max_sim[i] = the attained value divided by tau.
struct Assignments {
    std::vector<std::uint32_t> index;
    std::vector<double> max_sim;
};

struct SelectionResult {
    std::string method;
    SelectorConfig config;
    /// Distinct row indices into the embedding matrix. For the parametric
    /// selector, indices[j] is the row matched to theta_j.
    std::vector<std::size_t> indices;
    /// Cosine similarity between each selected row and its parameter vector
    /// (parametric selector only).
    std::vector<double> match_similarity;
    std::vector<LossRecord> loss_history;
    std::optional<LossTerms> final_loss;
    /// K-Center only: covering radius after each pick.
    std::vector<double> radius_history;
    double wall_time_s = 0.0;
};

ParamState init_params(const EmbeddingMatrix& matrix, const SelectorConfig& config);

Assignments compute_assignments(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
                                double tau, std::size_t block_size,
                                Precision precision = Precision::fp32,
                                std::size_t threads = 1);

/// Objective at theta. Requires m >= 2.
LossTerms loss(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
               const SelectorConfig& config);

/// Analytic gradient of the objective with the assignments held fixed.
/// `assignments` must come from the same theta.
DenseMatrix<double> gradient(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
                             const SelectorConfig& config, const Assignments& assignments);

/// One optimizer update followed by projection of every row back onto the
/// unit sphere. Throws Error(numerical) on a non-finite gradient.
void step(ParamState& state, const DenseMatrix<double>& grad, const SelectorConfig& config);

/// Called after every iteration with the record just appended.
using ProgressFn = std::function<void(const LossRecord&)>;

ParamState optimize(const EmbeddingMatrix& matrix, const SelectorConfig& config,
                    const ProgressFn& progress = {});

/// Maps every parameter row to a distinct feature row. Parameters are served
/// in decreasing order of their best similarity; each takes its most similar
/// row not yet taken (ties to the smaller row index).
SelectionResult match_subset(const EmbeddingMatrix& matrix, const DenseMatrix<double>& theta,
                             const SelectorConfig& config);

/// optimize followed by match_subset.
SelectionResult select(const EmbeddingMatrix& matrix, const SelectorConfig& config,
                       const ProgressFn& progress = {});

}  // namespace paramsel
