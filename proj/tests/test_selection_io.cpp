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

#include <doctest.h>

#include "paramsel/error.hpp"
#include "paramsel/selection_io.hpp"
#include "support.hpp"

using namespace paramsel;
using paramsel::test::TempDir;

TEST_SUITE("selection_io") {

TEST_CASE("parametric result serializes every field") {
    SelectionResult r;
    r.method = "parametric";
    r.config.budget = 2;
    r.config.seed = 5;
    r.indices = {4, 1};
    r.match_similarity = {0.9, 0.8};
    r.loss_history.push_back({0, {1.5, -2.0, -3.5}, 0.0});
    r.final_loss = LossTerms{1.0, -2.5, -3.5};
    r.wall_time_s = 1.25;
    const auto doc = to_json(r);
    CHECK(doc["method"] == "parametric");
    CHECK(doc["config"]["m"] == 2);
    CHECK(doc["config"]["tau"] == 0.07);
    CHECK(doc["config"]["lambda"] == 1.0);
    CHECK(doc["config"]["lr"] == 0.001);
    CHECK(doc["config"]["T"] == 300);
    CHECK(doc["config"]["seed"] == 5);
    CHECK(doc["indices"] == nlohmann::json::array({4, 1}));
    CHECK(doc["loss_history"][0]["iter"] == 0);
    CHECK(doc["loss_history"][0]["L"] == 1.5);
    CHECK(doc["loss_history"][0]["M"] == -2.0);
    CHECK(doc["loss_history"][0]["R"] == -3.5);
    CHECK(doc["final_loss"]["L"] == 1.0);
    CHECK(doc["wall_time_s"] == 1.25);
    CHECK_FALSE(to_json(r, false).contains("wall_time_s"));
}

TEST_CASE("file round trip") {
    TempDir dir;
    SelectionResult r;
    r.method = "kcenter";
    r.config.budget = 3;
    r.config.seed = 9;
    r.indices = {2, 0, 7};
    r.radius_history = {1.0, 0.5, 0.25};
    write_selection(r, dir / "s.json", false);
    const auto back = read_selection(dir / "s.json");
    CHECK(back.method == "kcenter");
    CHECK(back.indices == r.indices);
    CHECK(back.config.budget == 3);
    CHECK(back.config.seed == 9);
    write_selection(back, dir / "t.json", false);
    CHECK(test::read_text(dir / "s.json").find("radius_history") != std::string::npos);
}

TEST_CASE("malformed selection files") {
    TempDir dir;
    test::write_text(dir / "a.json", "{\"method\": \"random\"}");
    CHECK_THROWS_AS(read_selection(dir / "a.json"), Error);
    test::write_text(dir / "b.json", "{\"method\": \"random\", \"indices\": [1, -2]}");
    CHECK_THROWS_AS(read_selection(dir / "b.json"), Error);
    test::write_text(dir / "c.json", "not json");
    CHECK_THROWS_AS(read_selection(dir / "c.json"), Error);
    try {
        read_selection(dir / "missing.json");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
    }
}

}  // TEST_SUITE
