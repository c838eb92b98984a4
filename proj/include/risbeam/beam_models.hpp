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

#include <optional>
#include <span>
#include <vector>

#include "risbeam/array_core.hpp"

namespace risbeam
{
    // Descriptive data carried alongside a pattern set. Needed to rebuild the
    // ideal codebook that produced the measurement.
    struct PatternMetadata
    {
        int elements = 0;
        std::vector<double> scan_angles_deg;
        double carrier_hz = 0.0;
        std::optional<int> phase_bits;

        bool operator==(const PatternMetadata &) const = default;
    };

    // Complex pattern samples: values(t, g) is codeword g observed at grid angle t.
    class BeamPatternSet
    {
    public:
        BeamPatternSet(AngleGrid grid, CMatrix values, PatternMetadata metadata = {});

        const AngleGrid &grid() const noexcept { return grid_; }
        const CMatrix &values() const noexcept { return values_; }
        const PatternMetadata &metadata() const noexcept { return metadata_; }
        std::size_t angle_count() const noexcept { return grid_.size(); }
        int codeword_count() const noexcept { return static_cast<int>(values_.cols()); }

        // Rows restricted to the given grid indices.
        BeamPatternSet subset(std::span<const std::size_t> indices) const;

    private:
        AngleGrid grid_;
        CMatrix values_;
        PatternMetadata metadata_;
    };

    // Nearest-neighbour mutual coupling terms of one codeword (order 2).
    struct CouplingPair
    {
        cplx first{0.0, 0.0};  // one element spacing
        cplx second{0.0, 0.0}; // two element spacings
    };

    // Per-codeword coupling coefficients, each magnitude below one.
    class CouplingSet
    {
    public:
        CouplingSet() = default;
        explicit CouplingSet(std::vector<CouplingPair> pairs);
        static CouplingSet uniform(CouplingPair pair, int codewords);

        std::size_t size() const noexcept { return pairs_.size(); }
        const CouplingPair &operator[](std::size_t g) const noexcept { return pairs_[g]; }
        const std::vector<CouplingPair> &pairs() const noexcept { return pairs_; }

    private:
        std::vector<CouplingPair> pairs_;
    };

    // Realized element coefficients, one unit-norm column per codeword.
    class PerturbedCodebook
    {
    public:
        explicit PerturbedCodebook(CMatrix columns, double norm_tol = 1e-10);

        const CMatrix &columns() const noexcept { return columns_; }
        int elements() const noexcept { return static_cast<int>(columns_.rows()); }
        int size() const noexcept { return static_cast<int>(columns_.cols()); }

        // Entrywise ratio to the ideal codebook (the multiplicative perturbation).
        CMatrix perturbation(const Codebook &ideal) const;

    private:
        CMatrix columns_;
    };

    // Complex per-angle gain applied to every codeword at that angle.
    class CorrectionCurve
    {
    public:
        explicit CorrectionCurve(CVector gains);
        static CorrectionCurve identity(std::size_t angles);

        const CVector &gains() const noexcept { return gains_; }
        std::size_t size() const noexcept { return static_cast<std::size_t>(gains_.size()); }

    private:
        CVector gains_;
    };

    // Symmetric banded Toeplitz with unit diagonal; N >= 3.
    CMatrix toeplitz_mcm(const CouplingPair &c, int elements);

    // Symmetric shift operator with ones on the +-distance off-diagonals.
    CMatrix band_shift(int elements, int distance);

    BeamPatternSet eval_ideal(const Codebook &codebook, const SteeringMatrix &steering);
    BeamPatternSet eval_mcm(const Codebook &codebook, const SteeringMatrix &steering, const CouplingSet &coupling);
    BeamPatternSet eval_nc(const PerturbedCodebook &codebook, const SteeringMatrix &steering);
    BeamPatternSet eval_ci(const PerturbedCodebook &codebook, const SteeringMatrix &steering,
                           const CorrectionCurve &correction);

    // Uniform weights on [start, stop], zero elsewhere.
    std::vector<double> window_weights(const AngleGrid &grid, double start_deg, double stop_deg);

    // Window weights raised towards boresight: 1 + boost * cos^2(phi) inside the window.
    std::vector<double> boresight_weights(const AngleGrid &grid, double start_deg, double stop_deg, double boost);

    // Weighted mean of per-angle squared row errors.
    double loss_l1(const BeamPatternSet &truth, const BeamPatternSet &model, std::span<const double> weights);

    // Same metric on raw matrices with matching shapes.
    double loss_l1(const CMatrix &truth, const CMatrix &model, std::span<const double> weights);
}
