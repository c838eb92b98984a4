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

#include <memory>
#include <vector>

#include "risbeam/array_core.hpp"
#include "risbeam/beam_models.hpp"
#include "risbeam/calibrators.hpp"

namespace risbeam
{
    // Complex response of every base codeword at an arbitrary azimuth.
    class BeamSource
    {
    public:
        virtual ~BeamSource() = default;

        virtual int codeword_count() const = 0;
        virtual double min_angle_deg() const = 0;
        virtual double max_angle_deg() const = 0;

        // Length codeword_count(); throws ExtrapolationError outside the covered range.
        virtual CVector response(double phi_deg) const = 0;

        bool covers(double phi_deg) const;
    };

    // Closed-form response a(phi)^T v_g for fixed effective coefficient columns v_g,
    // optionally scaled by an interpolated per-angle correction gain.
    class CodebookSource final : public BeamSource
    {
    public:
        explicit CodebookSource(CMatrix effective_columns);
        CodebookSource(CMatrix effective_columns, std::vector<double> correction_angles_deg, CVector correction_gains);

        int codeword_count() const override { return static_cast<int>(columns_.cols()); }
        double min_angle_deg() const override;
        double max_angle_deg() const override;
        CVector response(double phi_deg) const override;

        const CMatrix &columns() const noexcept { return columns_; }

    private:
        CMatrix columns_;
        std::vector<double> angles_;
        CVector gains_;
    };

    // Tabulated patterns; off-grid angles interpolate re and im linearly between neighbours.
    class PatternTableSource final : public BeamSource
    {
    public:
        explicit PatternTableSource(BeamPatternSet patterns);

        int codeword_count() const override { return patterns_.codeword_count(); }
        double min_angle_deg() const override { return patterns_.grid().front(); }
        double max_angle_deg() const override { return patterns_.grid().back(); }
        CVector response(double phi_deg) const override;

    private:
        BeamPatternSet patterns_;
    };

    std::unique_ptr<BeamSource> ideal_source(const Codebook &codebook);
    std::unique_ptr<BeamSource> mcm_source(const Codebook &codebook, const CouplingSet &coupling);
    std::unique_ptr<BeamSource> nc_source(const PerturbedCodebook &codebook);
    std::unique_ptr<BeamSource> ci_source(const PerturbedCodebook &codebook, std::vector<double> angles_deg,
                                          const CorrectionCurve &correction);

    // Source corresponding to a calibrated model.
    std::unique_ptr<BeamSource> model_source(const CalibrationReport &report, const Codebook &codebook);
}
