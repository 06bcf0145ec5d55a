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

#include "paramsel/records.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "paramsel/error.hpp"

namespace paramsel {

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string text_field(const nlohmann::json& obj, const char* key, std::size_t line) {
    const auto& value = obj.at(key);
    if (!value.is_string()) {
        throw Error(ErrorCode::parse, at_line(line) + "field '" + key + "' must be a string");
    }
    return value.get<std::string>();
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::vector<InstructionRecord> load_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open " + path.string());
    }
    std::vector<InstructionRecord> records;
    std::unordered_set<std::uint64_t> seen;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (blank(text)) {
            continue;
        }
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::parse, at_line(line) + "invalid JSON: " + e.what());
        }
        if (!obj.is_object()) {
            throw Error(ErrorCode::parse, at_line(line) + "expected a JSON object");
        }
        if (!obj.contains("instruction")) {
            throw Error(ErrorCode::parse, at_line(line) + "missing field 'instruction'");
        }
        InstructionRecord rec;
        rec.instruction = text_field(obj, "instruction", line);
        if (rec.instruction.empty()) {
            throw Error(ErrorCode::parse, at_line(line) + "empty instruction");
        }
        if (obj.contains("output")) {
            rec.response = text_field(obj, "output", line);
        } else if (obj.contains("response")) {
            rec.response = text_field(obj, "response", line);
        }
        if (obj.contains("source") && !obj["source"].is_null()) {
            rec.source = text_field(obj, "source", line);
        }
        if (obj.contains("id")) {
            if (!obj["id"].is_number_unsigned()) {
                throw Error(ErrorCode::parse,
                            at_line(line) + "field 'id' must be a non-negative integer");
            }
            rec.id = obj["id"].get<std::uint64_t>();
        } else {
            rec.id = records.size();
        }
        if (!seen.insert(rec.id).second) {
            throw Error(ErrorCode::duplicate_id,
                        at_line(line) + "duplicate id " + std::to_string(rec.id));
        }
        rec.raw = std::move(text);
        if (!rec.raw.empty() && rec.raw.back() == '\r') {
            rec.raw.pop_back();
        }
        records.push_back(std::move(rec));
    }
    if (in.bad()) {
        throw Error(ErrorCode::io, "read failed: " + path.string());
    }
    if (records.empty()) {
        throw Error(ErrorCode::parse, path.string() + ": no records");
    }
    return records;
}

void write_records(std::span<const InstructionRecord> records,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
    }
    for (const auto& rec : records) {
        if (!rec.raw.empty()) {
            out << rec.raw << '\n';
            continue;
        }
        nlohmann::json obj = {{"id", rec.id}, {"instruction", rec.instruction}};
        if (!rec.response.empty()) {
            obj["output"] = rec.response;
        }
        if (rec.source) {
            obj["source"] = *rec.source;
        }
        out << obj.dump() << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::io, "write failed: " + path.string());
    }
}

}  // namespace paramsel
