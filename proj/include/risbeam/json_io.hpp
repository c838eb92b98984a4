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

#include <json.hpp>

#include "risbeam/beam_models.hpp"
#include "risbeam/calibrators.hpp"
#include "risbeam/truth_forge.hpp"

namespace risbeam
{
    nlohmann::json metadata_to_json(const PatternMetadata &metadata);
    PatternMetadata metadata_from_json(const nlohmann::json &j);

    // Complex values are stored as [re, im] pairs; matrices as arrays of rows.
    nlohmann::json complex_to_json(cplx z);
    cplx complex_from_json(const nlohmann::json &j);
    nlohmann::json vector_to_json(const CVector &v);
    CVector vector_from_json(const nlohmann::json &j);
    nlohmann::json matrix_to_json(const CMatrix &m);
    CMatrix matrix_from_json(const nlohmann::json &j);

    nlohmann::json coupling_to_json(const CouplingSet &coupling);
    CouplingSet coupling_from_json(const nlohmann::json &j);

    // Injected parameters of a forged set (the noise realization is summarized, not stored).
    nlohmann::json truth_to_json(const TruthRecord &truth, const AngleGrid &grid);

    nlohmann::json report_to_json(const CalibrationReport &report);
    CalibrationReport report_from_json(const nlohmann::json &j);

    // Either a single report object or {"reports": [...]}.
    std::vector<CalibrationReport> reports_from_json(const nlohmann::json &j);

    nlohmann::json read_json_file(const std::filesystem::path &path);
    void write_json_file(const std::filesystem::path &path, const nlohmann::json &j);
}
