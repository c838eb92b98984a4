// SPDX-License-Identifier: Apache-2.0
//
// risbeam - RIS beam pattern calibration and model-mismatch analysis
// Copyright (C) 2026 The risbeam authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include "risbeam/errors.hpp"
#include "risbeam/scene_config.hpp"

using namespace risbeam;
using nlohmann::json;

TEST_CASE("default scene config")
{
    const SceneConfig cfg;
    cfg.validate();
    CHECK(cfg.array.elements == 16);
    CHECK(cfg.array.scan_angles_deg.size() == 11);
    CHECK(cfg.array.scan_angles_deg.front() == -50.0);
    CHECK(cfg.array.grid.size() == 181);
    CHECK(cfg.signal.carrier_hz == 30e9);
    CHECK(cfg.signal.bandwidth_hz == 200e6);
    CHECK(cfg.signal.subcarriers == 128);
    CHECK(cfg.signal.schedule_length() == 352);
    CHECK(cfg.signal.noise_figure_db == 10.0);
    CHECK(cfg.geometry.ris == Vec2(0.0, 6.0));
    CHECK(cfg.region.nx() == 41);
    CHECK(cfg.fit == FitWeighting::full);
    CHECK(cfg.fit_weights(cfg.array.grid).empty());
    const auto w = cfg.metric_weights(cfg.array.grid);
    CHECK(w.size() == 181);
    CHECK(w[49] == 0.0);
    CHECK(w[50] == 1.0);
    CHECK(w[130] == 1.0);
    CHECK(w[131] == 0.0);
}

TEST_CASE("empty JSON gives the defaults")
{
    const auto cfg = scene_config_from_json(json::object());
    CHECK(scene_config_to_json(cfg) == scene_config_to_json(SceneConfig{}));
}

TEST_CASE("scene config JSON round trip")
{
    auto j = json::parse(R"({
        "seed": 42,
        "array": {"elements": 8, "scan_angles_deg": [-20, 0, 20], "phase_bits": null,
                  "grid": {"start_deg": -60, "stop_deg": 60, "step_deg": 2}},
        "impairments": {"coupling": [{"c1": [0.05, 0.01], "c2": [0.01, 0]}], "noise_std_rel": 0.001},
        "metric": {"start_deg": -30, "stop_deg": 30, "boresight_boost": 0.5},
        "fit": {"weights": "metric"},
        "ci": {"max_iterations": 20, "stage1": "constrained", "extrapolate": false},
        "signal": {"subcarriers": 16, "repeats": 2, "noise_variance_w": 1e-12},
        "scene": {"ris": [1, 6]},
        "region": {"step": 1},
        "pseudo_true": {"max_iterations": 50},
        "jobs": 3
    })");
    const auto cfg = scene_config_from_json(j);
    CHECK(cfg.seed == 42);
    CHECK(cfg.impairments.seed == 42);
    CHECK(cfg.array.elements == 8);
    CHECK_FALSE(cfg.array.phase_bits.has_value());
    CHECK(cfg.array.grid.size() == 61);
    CHECK(cfg.signal.scan_count == 3);
    CHECK(cfg.impairments.coupling.size() == 1);
    CHECK(cfg.impairments.coupling[0].first == cplx(0.05, 0.01));
    CHECK(cfg.fit == FitWeighting::metric);
    CHECK(cfg.fit_weights(cfg.array.grid) == cfg.metric_weights(cfg.array.grid));
    CHECK(cfg.ci.stage1 == Stage1Solver::constrained_ls);
    CHECK_FALSE(cfg.ci.extrapolate);
    CHECK(cfg.signal.noise_variance_w == 1e-12);
    CHECK(cfg.geometry.ris == Vec2(1.0, 6.0));
    CHECK(cfg.jobs == 3);

    const auto again = scene_config_from_json(json::parse(scene_config_to_json(cfg).dump()));
    CHECK(scene_config_to_json(again) == scene_config_to_json(cfg));
}

TEST_CASE("scene config rejects unknown keys and bad values")
{
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"sed": 1})")), InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"signal": {"subcarrier": 8}})")), InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"impairments": {"coupling": [{"c1": [0,0], "c3": 1}]}})")),
                    InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"seed": "one"})")), InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"metric": {"start_deg": 10, "stop_deg": -10}})")),
                    InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"fit": {"weights": "window"}})")), InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"region": {"step": 0}})")), InvalidArgument);
    CHECK_THROWS_AS(scene_config_from_json(json::parse(R"({"scene": {"ris": [0, 0]}})")), Error);
    CHECK_THROWS_AS(scene_config_from_json(json::parse("[1, 2]")), InvalidArgument);
}

TEST_CASE("missing scene config file")
{
    CHECK_THROWS_AS(load_scene_config("/nonexistent/scene.json"), Error);
}
