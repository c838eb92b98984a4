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
#include <iosfwd>
#include <optional>
#include <string>

#include "risbeam/scene_config.hpp"

namespace risbeam
{
    // Environment variable naming the default scene config.
    inline constexpr const char *config_env_var = "RISBEAM_CONFIG";

    // Config from the flag, else from RISBEAM_CONFIG, else built-in defaults; then flag overrides.
    SceneConfig resolve_config(const std::optional<std::filesystem::path> &config_path,
                               std::optional<std::uint64_t> seed, std::optional<unsigned> jobs);

    // Path of the injected-truth record written next to a forged pattern CSV.
    std::filesystem::path truth_path(const std::filesystem::path &csv_path);

    void cmd_synth(const SceneConfig &config, const std::filesystem::path &out, std::ostream &log);

    // model: ideal, mcm, mcm-twostep, nc, ci or all.
    void cmd_calibrate(const SceneConfig &config, const std::filesystem::path &patterns, const std::string &model,
                       const std::filesystem::path &out, std::ostream &log);

    // L1 of every report (or of the ideal model without one) over the metric window.
    void cmd_eval(const SceneConfig &config, const std::filesystem::path &patterns,
                  const std::optional<std::filesystem::path> &report, const std::optional<std::filesystem::path> &out,
                  std::ostream &log);

    // model: truth (matched), ideal, or a model tag present in the report.
    void cmd_alb_map(const SceneConfig &config, const std::filesystem::path &patterns,
                     const std::optional<std::filesystem::path> &report, const std::string &model,
                     const std::filesystem::path &out, std::ostream &log);

    // Without a step the thresholds are the distinct ALB values; otherwise 0, step, ... up to the maximum.
    void cmd_cdf(const std::filesystem::path &alb_csv, const std::filesystem::path &out, std::optional<double> step,
                 std::ostream &log);
}
