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

#include "paramsel/error.hpp"

namespace paramsel {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::validation: return "validation";
        case ErrorCode::io: return "io";
        case ErrorCode::bad_magic: return "bad_magic";
        case ErrorCode::unsupported_version: return "unsupported_version";
        case ErrorCode::truncated: return "truncated";
        case ErrorCode::size_overflow: return "size_overflow";
        case ErrorCode::trailing_bytes: return "trailing_bytes";
        case ErrorCode::zero_norm_row: return "zero_norm_row";
        case ErrorCode::not_normalized: return "not_normalized";
        case ErrorCode::non_finite: return "non_finite";
        case ErrorCode::duplicate_id: return "duplicate_id";
        case ErrorCode::parse: return "parse";
        case ErrorCode::numerical: return "numerical";
    }
    return "unknown";
}

}  // namespace paramsel
