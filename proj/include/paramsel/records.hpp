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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace paramsel {

/// One instruction/response training pair.
struct InstructionRecord {
    std::uint64_t id = 0;
    std::string instruction;
    std::string response;
    std::optional<std::string> source;
    /// The JSON line as read, so materialized subsets keep unknown fields.
    std::string raw;
};

/// Reads a JSONL corpus. `instruction` is required and non-empty;
/// `output` or `response` fill the response; `id` defaults to the 0-based
/// record position. Blank lines are skipped. Errors name the 1-based line.
std::vector<InstructionRecord> load_records(const std::filesystem::path& path);

/// Writes the given records as JSONL using their original lines.
void write_records(std::span<const InstructionRecord> records,
                   const std::filesystem::path& path);

}  // namespace paramsel
