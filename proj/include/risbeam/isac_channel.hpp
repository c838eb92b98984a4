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

#include <Eigen/Dense>

#include "risbeam/array_core.hpp"
#include "risbeam/beam_source.hpp"

namespace risbeam
{
    using Vec2 = Eigen::Vector2d;

    inline constexpr double speed_of_light = 299792458.0;
    inline constexpr double boltzmann = 1.380649e-23;

    struct SceneGeometry
    {
        Vec2 bs{0.0, 0.0};
        Vec2 ris{0.0, 6.0};
        Vec2 ris_boresight{0.0, -1.0};
        double c = speed_of_light;

        double bs_ris_distance() const { return (ris - bs).norm(); }
        void validate() const;
    };

    struct SignalConfig
    {
        double carrier_hz = 30e9;
        double bandwidth_hz = 200e6;
        int subcarriers = 128;
        int scan_count = 11;
        int repeats = 32;
        double noise_figure_db = 10.0;
        std::optional<CMatrix> pilots;            // G x K; all ones when empty
        std::optional<double> noise_variance_w;   // overrides the thermal value when set

        double subcarrier_spacing() const { return bandwidth_hz / subcarriers; }
        int schedule_length() const { return scan_count * repeats; }
        double wavelength(double c = speed_of_light) const { return c / carrier_hz; }
        double noise_variance() const;
        void validate() const;
    };

    // One UE observation: eta = [alpha_l, tau_l, alpha_r, tau_r, phi_A].
    struct ChannelParams
    {
        cplx alpha_l{0.0, 0.0};
        double tau_l = 0.0;
        cplx alpha_r{0.0, 0.0};
        double tau_r = 0.0;
        double phi_deg = 0.0; // RIS-side azimuth toward the UE, boresight-referenced
    };

    struct GeoParams
    {
        double tau_l = 0.0;
        double tau_r = 0.0;
        double phi_deg = 0.0;
    };

    // Signed angle from the RIS boresight to (s - p_r), positive toward +x for the default scene.
    GeoParams geo_params(const Vec2 &s, const SceneGeometry &geometry);

    // Free-space magnitudes with carrier phases -2 pi f_c tau.
    std::pair<cplx, cplx> path_gains(const Vec2 &s, const SceneGeometry &geometry, const SignalConfig &signal);

    ChannelParams channel_params(const Vec2 &s, const SceneGeometry &geometry, const SignalConfig &signal);

    // Entry k = exp(j 2 pi k df tau).
    CVector delay_response(double tau, int subcarriers, double spacing_hz);

    // Entry g = response of codeword (g mod scan_count) at phi, tiled over the repeats.
    CVector beam_schedule(const BeamSource &source, double phi_deg, int scan_count, int repeats);

    // vec((alpha_l 1 d_l^T + alpha_r b d_r^T) .* X) with the subcarrier index running fastest.
    CVector noise_free_signal(const ChannelParams &eta, const CVector &beam, const SignalConfig &signal);

    // k_B * 290 K * B * 10^(NF/10), watts.
    double noise_power(double noise_figure_db, double bandwidth_hz);

    CVector simulate_received(const ChannelParams &eta, const CVector &beam, const SignalConfig &signal,
                              std::uint64_t seed);
}
