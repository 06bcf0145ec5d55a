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

#include <filesystem>

#include <json.hpp>

#include "paramsel/selector.hpp"

namespace paramsel {

/// JSON form of a selection. `timing` controls whether wall_time_s is
/// emitted; without it the document is a pure function of inputs and config.
nlohmann::json to_json(const SelectionResult& result, bool timing = true);

/// Reads back method, config, indices and match similarities.
SelectionResult selection_from_json(const nlohmann::json& doc);

void write_selection(const SelectionResult& result, const std::filesystem::path& path,
                     bool timing = true);
SelectionResult read_selection(const std::filesystem::path& path);

}  // namespace paramsel
