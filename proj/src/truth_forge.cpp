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

#include "risbeam/truth_forge.hpp"

#include <cmath>
#include <string>

#include "risbeam/errors.hpp"

namespace risbeam
{
    Codebook ArrayConfig::codebook() const
    {
        return build_codebook(scan_angles_deg, elements, phase_bits);
    }

    PatternMetadata ArrayConfig::metadata() const
    {
        PatternMetadata meta;
        meta.elements = elements;
        meta.scan_angles_deg = scan_angles_deg;
        meta.carrier_hz = carrier_hz;
        meta.phase_bits = phase_bits;
        return meta;
    }

    ImpairmentConfig ImpairmentConfig::standard()
    {
        ImpairmentConfig cfg;
        cfg.coupling = {CouplingPair{std::polar(0.10, pi / 4.0), cplx(0.02, 0.0)}};
        cfg.amplitude_jitter_std = 0.05;
        cfg.phase_jitter_std_deg = 10.0;
        cfg.element_exponent = 1.2;
        cfg.ripple_std_db = 0.5;
        cfg.ripple_phase_std_deg = 3.0;
        cfg.ripple_correlation_deg = 10.0;
        cfg.noise_std_rel = std::pow(10.0, -40.0 / 20.0);
        return cfg;
    }

    void ImpairmentConfig::validate() const
    {
        auto non_negative = [](double v, const char *name)
        {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InvalidArgument(std::string(name) + " must be a finite non-negative number");
        };
        non_negative(amplitude_jitter_std, "amplitude_jitter_std");
        non_negative(phase_jitter_std_deg, "phase_jitter_std_deg");
        non_negative(element_exponent, "element_exponent");
        non_negative(ripple_std_db, "ripple_std_db");
        non_negative(ripple_phase_std_deg, "ripple_phase_std_deg");
        non_negative(noise_std_rel, "noise_std_rel");
        if (!(ripple_correlation_deg > 0.0))
            throw InvalidArgument("ripple_correlation_deg must be positive");
        CouplingSet{coupling}; // magnitude check
    }

    Eigen::VectorXd smooth_gaussian_process(const AngleGrid &grid, double correlation_deg, std::mt19937_64 &rng)
    {
        if (!(correlation_deg > 0.0))
            throw InvalidArgument("correlation length must be positive");
        const double spacing = correlation_deg / 8.0;
        const double reach = 5.0 * correlation_deg;
        const double origin = grid.front() - reach;
        const auto lattice_size = static_cast<std::size_t>(std::ceil((grid.back() - grid.front() + 2.0 * reach) / spacing)) + 1;

        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> white(lattice_size);
        for (auto &z : white)
            z = normal(rng);

        Eigen::VectorXd process(static_cast<Eigen::Index>(grid.size()));
        for (std::size_t t = 0; t < grid.size(); ++t)
        {
            double acc = 0.0;
            double energy = 0.0;
            for (std::size_t i = 0; i < lattice_size; ++i)
            {
                const double offset = grid[t] - (origin + static_cast<double>(i) * spacing);
                if (std::abs(offset) > reach)
                    continue;
                const double k = std::exp(-offset * offset / (2.0 * correlation_deg * correlation_deg));
                acc += k * white[i];
                energy += k * k;
            }
            process(static_cast<Eigen::Index>(t)) = acc / std::sqrt(energy);
        }
        return process;
    }

    std::pair<BeamPatternSet, TruthRecord> synth_ground_truth(const ArrayConfig &array, const ImpairmentConfig &impairments)
    {
        impairments.validate();
        const Codebook ideal = array.codebook();
        const int n_elem = ideal.elements();
        const int n_code = ideal.size();
        const auto n_angle = static_cast<Eigen::Index>(array.grid.size());

        std::vector<CouplingPair> pairs;
        if (impairments.coupling.empty())
            pairs.assign(static_cast<std::size_t>(n_code), CouplingPair{});
        else if (impairments.coupling.size() == 1)
            pairs.assign(static_cast<std::size_t>(n_code), impairments.coupling.front());
        else if (impairments.coupling.size() == static_cast<std::size_t>(n_code))
            pairs = impairments.coupling;
        else
            throw InvalidArgument("coupling list must hold 0, 1 or " + std::to_string(n_code) + " pairs");
        CouplingSet coupling(std::move(pairs));

        // Draw order is part of the contract: jitter, ripple amplitude, ripple phase, noise.
        std::mt19937_64 rng(impairments.seed);
        std::normal_distribution<double> normal(0.0, 1.0);

        CMatrix realized(n_elem, n_code);
        const double phase_std = impairments.phase_jitter_std_deg * deg_to_rad;
        for (int g = 0; g < n_code; ++g)
        {
            for (int n = 0; n < n_elem; ++n)
            {
                const double amp = 1.0 + impairments.amplitude_jitter_std * normal(rng);
                const double phase = phase_std * normal(rng);
                realized(n, g) = ideal.columns(n, g) * std::polar(amp, phase);
            }
            realized.col(g).normalize();
        }
        PerturbedCodebook codebook(realized);

        const Eigen::VectorXd ripple_amp = smooth_gaussian_process(array.grid, impairments.ripple_correlation_deg, rng);
        const Eigen::VectorXd ripple_phase = smooth_gaussian_process(array.grid, impairments.ripple_correlation_deg, rng);
        const double nepers = impairments.ripple_std_db * std::log(10.0) / 20.0;
        const double ripple_rad = impairments.ripple_phase_std_deg * deg_to_rad;

        CVector gains(n_angle);
        for (Eigen::Index t = 0; t < n_angle; ++t)
        {
            const double element = std::pow(std::cos(array.grid[static_cast<std::size_t>(t)] * deg_to_rad),
                                            impairments.element_exponent);
            gains(t) = element * std::exp(cplx(nepers * ripple_amp(t), ripple_rad * ripple_phase(t)));
        }
        CorrectionCurve correction(gains);

        const SteeringMatrix steering(array.grid, n_elem);
        CMatrix coupled(n_elem, n_code);
        for (int g = 0; g < n_code; ++g)
            coupled.col(g) = toeplitz_mcm(coupling[static_cast<std::size_t>(g)], n_elem) * realized.col(g);
        CMatrix values = gains.asDiagonal() * (steering.matrix().transpose() * coupled);

        const double noise_std = impairments.noise_std_rel * values.cwiseAbs().maxCoeff();
        CMatrix noise(n_angle, n_code);
        for (Eigen::Index t = 0; t < n_angle; ++t)
            for (int g = 0; g < n_code; ++g)
            {
                const double re = normal(rng);
                const double im = normal(rng);
                noise(t, g) = cplx(re, im) * (noise_std / std::sqrt(2.0));
            }
        if (noise_std > 0.0)
            values += noise;

        TruthRecord record{std::move(coupling), std::move(codebook), std::move(correction), std::move(noise), noise_std,
                           impairments.seed};
        return {BeamPatternSet(array.grid, std::move(values), array.metadata()), std::move(record)};
    }
}
