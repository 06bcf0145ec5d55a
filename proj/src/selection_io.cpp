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

#include "paramsel/selection_io.hpp"

#include <fstream>

#include "paramsel/error.hpp"

namespace paramsel {

namespace {

const char* to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }
const char* to_string(Precision p) { return p == Precision::fp32 ? "fp32" : "fp64"; }

nlohmann::json terms_json(const LossTerms& t) {
    return {{"L", t.total}, {"M", t.matching}, {"R", t.diversity}};
}

}  // namespace

nlohmann::json to_json(const SelectionResult& result, bool timing) {
    using nlohmann::json;
    const SelectorConfig& c = result.config;
    json config = {{"m", c.budget}, {"seed", c.seed}};
    if (result.method == "parametric") {
        config["tau"] = c.tau;
        config["lambda"] = c.lambda;
        config["lr"] = c.learning_rate;
        config["T"] = c.iterations;
        config["block_size"] = c.block_size;
        config["optimizer"] = to_string(c.optimizer);
        config["precision"] = to_string(c.precision);
    }
    json doc = {{"method", result.method},
                {"config", config},
                {"indices", result.indices},
                {"match_similarity", result.match_similarity}};
    json history = json::array();
    for (const auto& rec : result.loss_history) {
        json entry = terms_json(rec.terms);
        entry["iter"] = rec.iter;
        history.push_back(std::move(entry));
    }
    doc["loss_history"] = std::move(history);
    if (result.final_loss) {
        doc["final_loss"] = terms_json(*result.final_loss);
    }
    if (!result.radius_history.empty()) {
        doc["radius_history"] = result.radius_history;
    }
    if (timing) {
        doc["wall_time_s"] = result.wall_time_s;
    }
    return doc;
}

SelectionResult selection_from_json(const nlohmann::json& doc) {
    SelectionResult result;
    try {
        result.method = doc.at("method").get<std::string>();
        const auto& indices = doc.at("indices");
        if (!indices.is_array()) {
            throw Error(ErrorCode::parse, "selection JSON: indices must be an array");
        }
        for (const auto& v : indices) {
            if (!v.is_number_unsigned()) {
                throw Error(ErrorCode::parse,
                            "selection JSON: index " + v.dump() + " is not a non-negative integer");
            }
            result.indices.push_back(v.get<std::size_t>());
        }
        if (doc.contains("match_similarity")) {
            result.match_similarity = doc["match_similarity"].get<std::vector<double>>();
        }
        if (doc.contains("config")) {
            const auto& c = doc["config"];
            result.config.budget = c.value("m", result.indices.size());
            result.config.seed = c.value("seed", std::uint64_t{0});
            result.config.tau = c.value("tau", result.config.tau);
            result.config.lambda = c.value("lambda", result.config.lambda);
            result.config.learning_rate = c.value("lr", result.config.learning_rate);
            result.config.iterations = c.value("T", result.config.iterations);
        }
        if (doc.contains("wall_time_s")) {
            result.wall_time_s = doc["wall_time_s"].get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse, std::string("selection JSON: ") + e.what());
    }
    return result;
}

void write_selection(const SelectionResult& result, const std::filesystem::path& path,
                     bool timing) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    }
    out << to_json(result, timing).dump() << '\n';
    if (!out) {
        throw Error(ErrorCode::io, "write failed: " + path.string());
    }
}

SelectionResult read_selection(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse, path.string() + ": invalid JSON: " + e.what());
    }
    return selection_from_json(doc);
}

}  // namespace paramsel
