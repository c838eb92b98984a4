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
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "risbeam/array_core.hpp"
#include "risbeam/beam_models.hpp"

namespace risbeam
{
    // Array under test and the chamber sampling grid.
    struct ArrayConfig
    {
        int elements = 16;
        std::vector<double> scan_angles_deg;
        std::optional<int> phase_bits = 2;
        double carrier_hz = 30e9;
        AngleGrid grid = make_angle_grid(-90.0, 90.0, 1.0);

        Codebook codebook() const;
        PatternMetadata metadata() const;
    };

    // Impairments injected into a forged chamber measurement.
    struct ImpairmentConfig
    {
        // Empty: no coupling. One pair: shared by all codewords. Otherwise one pair per codeword.
        std::vector<CouplingPair> coupling;
        double amplitude_jitter_std = 0.0; // linear, per element and codeword
        double phase_jitter_std_deg = 0.0;
        double element_exponent = 0.0;     // q in cos^q(phi)
        double ripple_std_db = 0.0;        // log-amplitude std of the chamber gain ripple
        double ripple_phase_std_deg = 0.0;
        double ripple_correlation_deg = 10.0;
        double noise_std_rel = 0.0;        // complex noise std relative to the noiseless peak magnitude
        std::uint64_t seed = 1;

        // The full impairment mix used by the acceptance runs.
        static ImpairmentConfig standard();

        void validate() const;
    };

    // Everything injected into one forged set, post-normalization.
    struct TruthRecord
    {
        CouplingSet coupling;
        PerturbedCodebook codebook;  // unit-norm realized coefficients
        CorrectionCurve correction;  // element pattern times chamber ripple, per grid angle
        CMatrix noise;                // additive noise realization (T x G_base)
        double noise_std = 0.0;       // absolute complex noise std
        std::uint64_t seed = 0;
    };

    // values(t, g) = correction_t * a(phi_t)^T C_g wtilde_g + noise(t, g); deterministic given the seed.
    std::pair<BeamPatternSet, TruthRecord> synth_ground_truth(const ArrayConfig &array, const ImpairmentConfig &impairments);

    // Unit-variance smooth Gaussian process sampled on the grid: white noise on a fine
    // lattice convolved with a Gaussian kernel of the given correlation length.
    Eigen::VectorXd smooth_gaussian_process(const AngleGrid &grid, double correlation_deg, std::mt19937_64 &rng);
}
