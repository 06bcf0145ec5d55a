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

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "paramsel/baselines.hpp"
#include "paramsel/diagnostics.hpp"
#include "paramsel/embedding_store.hpp"
#include "paramsel/error.hpp"
#include "paramsel/records.hpp"
#include "paramsel/selection_io.hpp"
#include "paramsel/selector.hpp"
#include "paramsel/synthetic.hpp"

namespace paramsel::cli {

namespace {

using nlohmann::json;

struct SelectArgs {
    std::string embeddings;
    std::string method = "parametric";
    std::size_t budget = 0;
    std::string out;
    double tau = 0.07;
    double lambda = 1.0;
    double lr = 0.001;
    std::size_t iters = 300;
    std::uint64_t seed = 0;
    std::size_t block_size = kDefaultBlockSize;
    std::string optimizer = "adam";
    std::string precision = "fp32";
    std::string scores;
    std::string direction = "descending";
    std::string records;
    std::string subset_out;
    std::size_t threads = 0;
    bool no_timing = false;
    bool verbose = false;
};

struct DiagnoseArgs {
    std::string embeddings;
    std::string selection;
    std::size_t threads = 0;
};

struct PasskArgs {
    std::optional<std::uint64_t> n;
    std::optional<std::uint64_t> c;
    std::optional<std::uint64_t> k;
    std::string file;
};

struct ConvertArgs {
    std::string in;
    std::string out;
    bool normalize = false;
};

struct SynthArgs {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> weights{1.0};
    double spread = 0.5;
    std::uint64_t seed = 0;
    std::string out;
    std::string labels_out;
};

[[noreturn]] void invalid(const std::string& message) {
    throw Error(ErrorCode::validation, message);
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::io:
        case ErrorCode::bad_magic:
        case ErrorCode::unsupported_version:
        case ErrorCode::truncated:
        case ErrorCode::size_overflow:
        case ErrorCode::trailing_bytes:
        case ErrorCode::parse:
            return kIo;
        default:
            return kValidation;
    }
}

bool has_extension(const std::string& path, const char* ext) {
    return std::filesystem::path(path).extension() == ext;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path + " for writing");
    }
    return out;
}

void check_written(const std::ofstream& out, const std::string& path) {
    if (!out) {
        throw Error(ErrorCode::io, "write failed: " + path);
    }
}

Optimizer parse_optimizer(const std::string& s) {
    if (s == "adam") return Optimizer::adam;
    if (s == "sgd") return Optimizer::sgd;
    invalid("unknown optimizer '" + s + "' (expected adam or sgd)");
}

Precision parse_precision(const std::string& s) {
    if (s == "fp32") return Precision::fp32;
    if (s == "fp64") return Precision::fp64;
    invalid("unknown precision '" + s + "' (expected fp32 or fp64)");
}

ScoreDirection parse_direction(const std::string& s) {
    if (s == "descending") return ScoreDirection::descending;
    if (s == "ascending") return ScoreDirection::ascending;
    invalid("unknown direction '" + s + "' (expected descending or ascending)");
}

void write_subset(const EmbeddingMatrix& matrix, const SelectionResult& result,
                  const SelectArgs& a) {
    std::vector<InstructionRecord> records = load_records(a.records);
    std::unordered_map<std::uint64_t, std::size_t> by_id;
    by_id.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        by_id.emplace(records[r].id, r);
    }
    std::vector<InstructionRecord> subset;
    subset.reserve(result.indices.size());
    for (std::size_t i : result.indices) {
        const std::uint64_t id = matrix.id(i);
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            invalid("record id " + std::to_string(id) + " of row " + std::to_string(i) +
                    " not found in " + a.records);
        }
        subset.push_back(records[it->second]);
    }
    write_records(subset, a.subset_out);
}

int cmd_select(const SelectArgs& a, std::ostream& err) {
    static const std::vector<std::string> methods = {"parametric", "random", "kcenter", "score"};
    if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) {
        invalid("unknown method '" + a.method + "'");
    }
    if (a.budget == 0) {
        invalid("budget must be positive");
    }
    if (a.method == "score" && a.scores.empty()) {
        invalid("method score requires --scores");
    }
    if (!a.subset_out.empty() && a.records.empty()) {
        invalid("--subset-out requires --records");
    }
    SelectorConfig config;
    config.budget = a.budget;
    config.tau = a.tau;
    config.lambda = a.lambda;
    config.learning_rate = a.lr;
    config.iterations = a.iters;
    config.seed = a.seed;
    config.block_size = a.block_size;
    config.optimizer = parse_optimizer(a.optimizer);
    config.precision = parse_precision(a.precision);
    config.threads = a.threads;
    const ScoreDirection direction = parse_direction(a.direction);
    if (a.method == "parametric") {
        config.validate();
    }

    const EmbeddingMatrix matrix = read_embeddings(a.embeddings);
    SelectionResult result;
    if (a.method == "parametric") {
        ProgressFn progress;
        if (a.verbose) {
            progress = [&err, total = config.iterations](const LossRecord& rec) {
                if (rec.iter % 10 == 0 || rec.iter + 1 == total) {
                    char line[160];
                    std::snprintf(line, sizeof line, "iter %zu L=%.6f M=%.6f R=%.6f\n", rec.iter,
                                  rec.terms.total, rec.terms.matching, rec.terms.diversity);
                    err << line << std::flush;
                }
            };
        }
        result = select(matrix, config, progress);
    } else if (a.method == "random") {
        result = random_select(matrix.n(), a.budget, a.seed);
    } else if (a.method == "kcenter") {
        result = kcenter_select(matrix, a.budget, a.seed, a.threads);
    } else {
        result = score_select(load_scores(a.scores, matrix, direction), matrix.n(), a.budget);
    }
    if (!a.subset_out.empty()) {
        write_subset(matrix, result, a);
    }
    write_selection(result, a.out, !a.no_timing);
    return kOk;
}

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    const EmbeddingMatrix matrix = read_embeddings(a.embeddings);
    const SelectionResult selection = read_selection(a.selection);
    const double cov = coverage(matrix, selection.indices, a.threads);
    const DiversityStats div = diversity(matrix, selection.indices, a.threads);
    json doc = {{"method", selection.method},
                {"n", matrix.n()},
                {"m", selection.indices.size()},
                {"coverage", cov},
                {"diversity",
                 {{"mean_pairwise_sim", div.mean_pairwise_sim},
                  {"max_pairwise_sim", div.max_pairwise_sim},
                  {"min_pairwise_dist", div.min_pairwise_dist}}}};
    out << doc.dump() << '\n';
    return kOk;
}

std::vector<json> read_problems(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path);
    }
    std::vector<json> problems;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw Error(ErrorCode::parse, path + ": line " + std::to_string(lineno) +
                                              ": expected a JSON object");
        }
        for (const char* key : {"n", "c"}) {
            if (!doc.contains(key) || !doc[key].is_number_unsigned()) {
                throw Error(ErrorCode::parse, path + ": line " + std::to_string(lineno) +
                                                  ": field '" + key +
                                                  "' must be a non-negative integer");
            }
        }
        problems.push_back(std::move(doc));
    }
    if (problems.empty()) {
        invalid(path + ": no problems");
    }
    return problems;
}

int cmd_passk(const PasskArgs& a, std::ostream& out) {
    if (!a.k) {
        invalid("--k is required");
    }
    if (a.file.empty()) {
        if (!a.n || !a.c) {
            invalid("give --n and --c, or --file");
        }
        json doc = {{"n", *a.n}, {"c", *a.c}, {"k", *a.k}, {"pass_at_k", pass_at_k(*a.n, *a.c, *a.k)}};
        out << doc.dump() << '\n';
        return kOk;
    }
    if (a.n || a.c) {
        invalid("--n/--c cannot be combined with --file");
    }
    const std::vector<json> problems = read_problems(a.file);
    std::vector<json> lines;
    double sum = 0.0;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        const auto n = problems[p]["n"].get<std::uint64_t>();
        const auto c = problems[p]["c"].get<std::uint64_t>();
        const double value = pass_at_k(n, c, *a.k);
        sum += value;
        json line = {{"problem", p}, {"n", n}, {"c", c}, {"k", *a.k}, {"pass_at_k", value}};
        if (problems[p].contains("task_id")) {
            line["task_id"] = problems[p]["task_id"];
        }
        lines.push_back(std::move(line));
    }
    for (const json& line : lines) {
        out << line.dump() << '\n';
    }
    json summary = {{"problems", problems.size()},
                    {"k", *a.k},
                    {"mean_pass_at_k", sum / static_cast<double>(problems.size())}};
    out << summary.dump() << '\n';
    return kOk;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
    const Emb1Header header = read_emb1_header(path);
    const EmbeddingMatrix matrix = read_embeddings(path);
    json doc = {{"n", header.n},
                {"d", header.d},
                {"normalized", (header.flags & kEmb1FlagNormalized) != 0},
                {"ids", (header.flags & kEmb1FlagIds) != 0},
                {"file_bytes", std::filesystem::file_size(path)},
                {"rows_valid", matrix.n()}};
    out << doc.dump() << '\n';
    return kOk;
}

// JSONL vectors: one {"embedding": [...], "id": u64?} object per line.
EmbeddingMatrix read_vectors(const std::string& path, bool normalize) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path);
    }
    std::vector<std::vector<float>> rows;
    std::vector<std::uint64_t> ids;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = path + ": line " + std::to_string(lineno);
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("embedding") ||
            !doc["embedding"].is_array()) {
            throw Error(ErrorCode::parse, where + ": expected {\"embedding\": [...]}");
        }
        std::vector<float> row;
        row.reserve(doc["embedding"].size());
        for (const json& v : doc["embedding"]) {
            if (!v.is_number()) {
                throw Error(ErrorCode::parse, where + ": non-numeric embedding value");
            }
            row.push_back(v.get<float>());
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw Error(ErrorCode::parse, where + ": dimension " + std::to_string(row.size()) +
                                              " differs from " +
                                              std::to_string(rows.front().size()));
        }
        const bool has_id = doc.contains("id");
        if (!rows.empty() && has_id != !ids.empty()) {
            throw Error(ErrorCode::parse, where + ": ids must be given on every line or none");
        }
        if (has_id) {
            if (!doc["id"].is_number_unsigned()) {
                throw Error(ErrorCode::parse, where + ": id must be a non-negative integer");
            }
            ids.push_back(doc["id"].get<std::uint64_t>());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) {
        invalid(path + ": no vectors");
    }
    DenseMatrix<float> matrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].begin(), rows[i].end(), matrix.row(i).begin());
    }
    return EmbeddingMatrix(std::move(matrix), std::move(ids), normalize);
}

void write_vectors(const EmbeddingMatrix& matrix, const std::string& path) {
    std::ofstream out = open_output(path);
    for (std::size_t i = 0; i < matrix.n(); ++i) {
        const auto row = matrix.row(i);
        json doc = {{"embedding", std::vector<float>(row.begin(), row.end())}};
        if (matrix.has_ids()) {
            doc["id"] = matrix.id(i);
        }
        out << doc.dump() << '\n';
    }
    check_written(out, path);
}

int cmd_convert(const ConvertArgs& a) {
    const EmbeddingMatrix matrix =
        has_extension(a.in, ".emb1") ? read_embeddings(a.in) : read_vectors(a.in, a.normalize);
    if (has_extension(a.out, ".emb1")) {
        write_embeddings(matrix, a.out);
    } else {
        write_vectors(matrix, a.out);
    }
    return kOk;
}

int cmd_synth(const SynthArgs& a) {
    MixtureSpec spec;
    spec.n = a.n;
    spec.d = a.d;
    spec.weights = a.weights;
    spec.spread = a.spread;
    spec.seed = a.seed;
    const Mixture mixture = make_mixture(spec);
    write_embeddings(mixture.matrix, a.out);
    if (!a.labels_out.empty()) {
        std::ofstream out = open_output(a.labels_out);
        for (std::size_t i = 0; i < mixture.labels.size(); ++i) {
            out << json{{"row", i}, {"label", mixture.labels[i]}}.dump() << '\n';
        }
        check_written(out, a.labels_out);
    }
    return kOk;
}

void report(std::ostream& err, std::string_view code, const std::string& message) {
    std::string line(message);
    std::replace(line.begin(), line.end(), '\n', ' ');
    err << "error: " << code << ": " << line << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parametric training-data subset selection over embedding matrices"};
    app.name("paramsel");
    app.set_config("--config", "", "TOML file of option defaults; flags take precedence");
    app.require_subcommand(1);

    SelectArgs sel;
    CLI::App* select_cmd = app.add_subcommand("select", "Select a subset of rows");
    select_cmd->add_option("--embeddings", sel.embeddings, "EMB1 input")->required();
    select_cmd->add_option("--method", sel.method, "parametric|random|kcenter|score");
    select_cmd->add_option("--budget", sel.budget, "Number of rows to select")->required();
    select_cmd->add_option("--out", sel.out, "Selection JSON output")->required();
    select_cmd->add_option("--tau", sel.tau, "Temperature");
    select_cmd->add_option("--lambda", sel.lambda, "Diversity weight");
    select_cmd->add_option("--lr", sel.lr, "Learning rate");
    select_cmd->add_option("--iters", sel.iters, "Optimization iterations");
    select_cmd->add_option("--seed", sel.seed, "Random seed");
    select_cmd->add_option("--block-size", sel.block_size, "Feature rows per similarity block");
    select_cmd->add_option("--optimizer", sel.optimizer, "adam|sgd");
    select_cmd->add_option("--precision", sel.precision, "fp32|fp64");
    select_cmd->add_option("--scores", sel.scores, "Score file (method score)");
    select_cmd->add_option("--direction", sel.direction, "descending|ascending");
    select_cmd->add_option("--records", sel.records, "Instruction JSONL aligned to the ids");
    select_cmd->add_option("--subset-out", sel.subset_out, "Write the selected records here");
    select_cmd->add_option("--threads", sel.threads, "Worker threads, 0 = all cores");
    select_cmd->add_flag("--no-timing", sel.no_timing, "Omit wall_time_s from the output");
    select_cmd->add_flag("--verbose", sel.verbose, "Print the loss every 10 iterations");

    DiagnoseArgs diag;
    CLI::App* diagnose_cmd = app.add_subcommand("diagnose", "Coverage and diversity of a selection");
    diagnose_cmd->add_option("--embeddings", diag.embeddings, "EMB1 input")->required();
    diagnose_cmd->add_option("--selection", diag.selection, "Selection JSON")->required();
    diagnose_cmd->add_option("--threads", diag.threads, "Worker threads, 0 = all cores");

    PasskArgs pk;
    CLI::App* passk_cmd = app.add_subcommand("passk", "Unbiased pass@k");
    passk_cmd->add_option("--n", pk.n, "Generations per problem");
    passk_cmd->add_option("--c", pk.c, "Correct generations");
    passk_cmd->add_option("--k", pk.k, "k");
    passk_cmd->add_option("--file", pk.file, "JSONL of {n, c} per problem");

    std::string inspect_path;
    CLI::App* inspect_cmd = app.add_subcommand("inspect", "Validate an EMB1 file and print its header");
    inspect_cmd->add_option("--embeddings", inspect_path, "EMB1 input")->required();

    ConvertArgs conv;
    CLI::App* convert_cmd =
        app.add_subcommand("convert", "Convert between EMB1 and JSONL vectors (by extension)");
    convert_cmd->add_option("--in", conv.in, "Input .emb1 or JSONL")->required();
    convert_cmd->add_option("--out", conv.out, "Output .emb1 or JSONL")->required();
    convert_cmd->add_flag("--normalize", conv.normalize, "L2-normalize JSONL rows on input");

    SynthArgs syn;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Write a synthetic unit-sphere mixture");
    synth_cmd->add_option("--n", syn.n, "Rows")->required();
    synth_cmd->add_option("--d", syn.d, "Dimension")->required();
    synth_cmd->add_option("--weights", syn.weights, "Component proportions")->delimiter(',');
    synth_cmd->add_option("--spread", syn.spread, "Noise norm around each center");
    synth_cmd->add_option("--seed", syn.seed, "Random seed");
    synth_cmd->add_option("--out", syn.out, "EMB1 output")->required();
    synth_cmd->add_option("--labels-out", syn.labels_out, "JSONL of component labels");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::FileError& e) {
        report(err, "io", e.what());
        return kIo;
    } catch (const CLI::ParseError& e) {
        report(err, "usage", e.what());
        return kValidation;
    }

    try {
        if (*select_cmd) return cmd_select(sel, err);
        if (*diagnose_cmd) return cmd_diagnose(diag, out);
        if (*passk_cmd) return cmd_passk(pk, out);
        if (*inspect_cmd) return cmd_inspect(inspect_path, out);
        if (*convert_cmd) return cmd_convert(conv);
        if (*synth_cmd) return cmd_synth(syn);
    } catch (const Error& e) {
        report(err, to_string(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        report(err, "parse", e.what());
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        report(err, "io", e.what());
        return kIo;
    } catch (const std::exception& e) {
        report(err, "internal", e.what());
        return kValidation;
    }
    return kOk;
}

}  // namespace paramsel::cli
