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

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "risbeam/calibrators.hpp"
#include "risbeam/isac_channel.hpp"
#include "risbeam/mismatch.hpp"
#include "risbeam/truth_forge.hpp"

namespace risbeam
{
    enum class FitWeighting
    {
        full,   // uniform over the whole truth grid
        metric, // same weights as the L1 metric
    };

    // One experiment manifest. Every key is optional in JSON; missing keys keep the defaults
    // below and unknown keys are rejected.
    struct SceneConfig
    {
        std::uint64_t seed = 1;
        ArrayConfig array;
        ImpairmentConfig impairments = ImpairmentConfig::standard();
        double metric_start_deg = -40.0;
        double metric_stop_deg = 40.0;
        double boresight_boost = 0.0; // 0 gives plain window weights
        FitWeighting fit = FitWeighting::full;
        CiOptions ci;
        SignalConfig signal;
        SceneGeometry geometry;
        SceneRegion region;
        PseudoTrueOptions pseudo_true;
        unsigned jobs = 1;

        SceneConfig();

        std::vector<double> metric_weights(const AngleGrid &grid) const;
        // Empty for FitWeighting::full.
        std::vector<double> fit_weights(const AngleGrid &grid) const;
        void validate() const;
    };

    SceneConfig scene_config_from_json(const nlohmann::json &j);
    nlohmann::json scene_config_to_json(const SceneConfig &config);
    SceneConfig load_scene_config(const std::filesystem::path &path);
}
