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

#include "risbeam/beam_source.hpp"

#include <algorithm>

#include "risbeam/errors.hpp"
#include "risbeam/text_format.hpp"

namespace risbeam
{
    namespace
    {
        constexpr double range_eps = 1e-9;

        [[noreturn]] void out_of_range(double phi, double lo, double hi)
        {
            throw ExtrapolationError("angle " + format_double(phi) + " deg is outside the pattern range [" +
                                     format_double(lo) + ", " + format_double(hi) + "]");
        }

        // Index i and weight u so that value = (1-u) v[i] + u v[i+1].
        std::pair<std::size_t, double> bracket(const std::vector<double> &angles, double phi)
        {
            if (angles.size() == 1)
                return {0, 0.0};
            auto upper = std::upper_bound(angles.begin(), angles.end(), phi);
            std::size_t i = upper == angles.begin() ? 0 : static_cast<std::size_t>(upper - angles.begin()) - 1;
            i = std::min(i, angles.size() - 2);
            const double u = std::clamp((phi - angles[i]) / (angles[i + 1] - angles[i]), 0.0, 1.0);
            return {i, u};
        }
    }

    bool BeamSource::covers(double phi_deg) const
    {
        return phi_deg >= min_angle_deg() - range_eps && phi_deg <= max_angle_deg() + range_eps;
    }

    CodebookSource::CodebookSource(CMatrix effective_columns) : columns_(std::move(effective_columns))
    {
        if (columns_.cols() < 1 || columns_.rows() < 1)
            throw InvalidArgument("beam source needs at least one codeword and one element");
    }

    CodebookSource::CodebookSource(CMatrix effective_columns, std::vector<double> correction_angles_deg,
                                   CVector correction_gains)
        : columns_(std::move(effective_columns)), angles_(std::move(correction_angles_deg)),
          gains_(std::move(correction_gains))
    {
        if (columns_.cols() < 1 || columns_.rows() < 1)
            throw InvalidArgument("beam source needs at least one codeword and one element");
        if (angles_.empty() || angles_.size() != static_cast<std::size_t>(gains_.size()))
            throw InvalidArgument("correction angles and gains must be non-empty and equally long");
        AngleGrid check(angles_); // validates ordering and range
    }

    double CodebookSource::min_angle_deg() const
    {
        return angles_.empty() ? -90.0 : angles_.front();
    }

    double CodebookSource::max_angle_deg() const
    {
        return angles_.empty() ? 90.0 : angles_.back();
    }

    CVector CodebookSource::response(double phi_deg) const
    {
        if (!covers(phi_deg))
            out_of_range(phi_deg, min_angle_deg(), max_angle_deg());
        const double phi = std::clamp(phi_deg, -90.0, 90.0);
        CVector r = columns_.transpose() * steering_vector(phi, static_cast<int>(columns_.rows()));
        if (!angles_.empty())
        {
            const auto [i, u] = bracket(angles_, phi);
            const auto a = static_cast<Eigen::Index>(i);
            const cplx gamma = angles_.size() == 1 ? gains_(0) : (1.0 - u) * gains_(a) + u * gains_(a + 1);
            r *= gamma;
        }
        return r;
    }

    PatternTableSource::PatternTableSource(BeamPatternSet patterns) : patterns_(std::move(patterns)) {}

    CVector PatternTableSource::response(double phi_deg) const
    {
        if (!covers(phi_deg))
            out_of_range(phi_deg, min_angle_deg(), max_angle_deg());
        const auto &angles = patterns_.grid().angles();
        const auto [i, u] = bracket(angles, phi_deg);
        const auto a = static_cast<Eigen::Index>(i);
        const CMatrix &v = patterns_.values();
        if (angles.size() == 1 || u == 0.0)
            return v.row(a).transpose();
        if (u == 1.0)
            return v.row(a + 1).transpose();
        return ((1.0 - u) * v.row(a) + u * v.row(a + 1)).transpose();
    }

    std::unique_ptr<BeamSource> ideal_source(const Codebook &codebook)
    {
        return std::make_unique<CodebookSource>(codebook.columns);
    }

    std::unique_ptr<BeamSource> mcm_source(const Codebook &codebook, const CouplingSet &coupling)
    {
        if (coupling.size() != static_cast<std::size_t>(codebook.size()))
            throw InvalidArgument("coupling set size does not match the codebook");
        CMatrix eff(codebook.columns.rows(), codebook.columns.cols());
        for (int g = 0; g < codebook.size(); ++g)
            eff.col(g) = toeplitz_mcm(coupling[static_cast<std::size_t>(g)], codebook.elements()) * codebook.columns.col(g);
        return std::make_unique<CodebookSource>(std::move(eff));
    }

    std::unique_ptr<BeamSource> nc_source(const PerturbedCodebook &codebook)
    {
        return std::make_unique<CodebookSource>(codebook.columns());
    }

    std::unique_ptr<BeamSource> ci_source(const PerturbedCodebook &codebook, std::vector<double> angles_deg,
                                          const CorrectionCurve &correction)
    {
        return std::make_unique<CodebookSource>(codebook.columns(), std::move(angles_deg), correction.gains());
    }

    std::unique_ptr<BeamSource> model_source(const CalibrationReport &report, const Codebook &codebook)
    {
        switch (report.model)
        {
        case ModelKind::ideal:
            return ideal_source(codebook);
        case ModelKind::mcm:
        case ModelKind::mcm_twostep:
            if (!report.coupling)
                throw InvalidArgument("MCM report has no coupling coefficients");
            return mcm_source(codebook, *report.coupling);
        case ModelKind::nc:
            if (!report.codebook)
                throw InvalidArgument("NC report has no codebook");
            return nc_source(*report.codebook);
        case ModelKind::ci:
            if (!report.codebook || !report.correction)
                throw InvalidArgument("CI report lacks its codebook or correction curve");
            return ci_source(*report.codebook, report.correction_angles_deg, *report.correction);
        }
        throw InvalidArgument("unknown model kind");
    }
}
