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

#include <filesystem>

#include "risbeam/beam_models.hpp"

namespace risbeam
{
    // Sidecar metadata path: same basename as the pattern CSV with a .json extension.
    std::filesystem::path metadata_path(const std::filesystem::path &csv_path);

    // Writes `angle_deg,codeword,re,im` rows sorted by (angle, codeword) plus the sidecar.
    void save_patterns(const BeamPatternSet &set, const std::filesystem::path &csv_path);

    // Reads a pattern CSV and its sidecar; throws ParseError naming the offending line.
    BeamPatternSet load_patterns(const std::filesystem::path &csv_path);
}
