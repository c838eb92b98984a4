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

#include "risbeam/isac_channel.hpp"

#include <cmath>
#include <random>

#include "risbeam/errors.hpp"

namespace risbeam
{
    namespace
    {
        constexpr double min_distance = 1e-9;
        constexpr double reference_temperature = 290.0;
    }

    void SceneGeometry::validate() const
    {
        if (!bs.allFinite() || !ris.allFinite() || !ris_boresight.allFinite())
            throw InvalidArgument("scene positions must be finite");
        if (std::abs(ris_boresight.norm() - 1.0) > 1e-9)
            throw InvalidArgument("RIS boresight must be a unit vector");
        if ((ris - bs).norm() < min_distance)
            throw GeometryError("RIS and BS positions coincide");
        if (!(c > 0.0))
            throw InvalidArgument("speed of light must be positive");
    }

    double SignalConfig::noise_variance() const
    {
        return noise_variance_w ? *noise_variance_w : noise_power(noise_figure_db, bandwidth_hz);
    }

    void SignalConfig::validate() const
    {
        if (!(carrier_hz > 0.0) || !(bandwidth_hz > 0.0))
            throw InvalidArgument("carrier and bandwidth must be positive");
        if (subcarriers < 1 || scan_count < 1 || repeats < 1)
            throw InvalidArgument("subcarriers, scan count and repeats must be >= 1");
        if (pilots && (pilots->rows() != schedule_length() || pilots->cols() != subcarriers))
            throw InvalidArgument("pilot matrix must be G x K");
        if (noise_variance_w && !(*noise_variance_w >= 0.0))
            throw InvalidArgument("noise variance must be non-negative");
    }

    GeoParams geo_params(const Vec2 &s, const SceneGeometry &geometry)
    {
        const double dl = (s - geometry.bs).norm();
        const Vec2 d = s - geometry.ris;
        const double d2 = d.norm();
        if (dl < min_distance)
            throw GeometryError("UE coincides with the BS");
        if (d2 < min_distance)
            throw GeometryError("UE coincides with the RIS");
        const Vec2 &b = geometry.ris_boresight;
        const double cross = b.x() * d.y() - b.y() * d.x();
        const double dot = b.dot(d);
        GeoParams out;
        out.tau_l = dl / geometry.c;
        out.tau_r = (geometry.bs_ris_distance() + d2) / geometry.c;
        out.phi_deg = std::atan2(cross, dot) / deg_to_rad;
        return out;
    }

    std::pair<cplx, cplx> path_gains(const Vec2 &s, const SceneGeometry &geometry, const SignalConfig &signal)
    {
        const auto geo = geo_params(s, geometry);
        const double lambda = signal.wavelength(geometry.c);
        const double dl = (s - geometry.bs).norm();
        const double d1 = geometry.bs_ris_distance();
        const double d2 = (s - geometry.ris).norm();
        const double mag_l = lambda / (4.0 * pi * dl);
        const double mag_r = lambda * lambda / ((4.0 * pi) * (4.0 * pi) * d1 * d2);
        return {std::polar(mag_l, -2.0 * pi * signal.carrier_hz * geo.tau_l),
                std::polar(mag_r, -2.0 * pi * signal.carrier_hz * geo.tau_r)};
    }

    ChannelParams channel_params(const Vec2 &s, const SceneGeometry &geometry, const SignalConfig &signal)
    {
        const auto geo = geo_params(s, geometry);
        const auto [al, ar] = path_gains(s, geometry, signal);
        return {al, geo.tau_l, ar, geo.tau_r, geo.phi_deg};
    }

    CVector delay_response(double tau, int subcarriers, double spacing_hz)
    {
        if (subcarriers < 1)
            throw InvalidArgument("delay response needs at least one subcarrier");
        CVector d(subcarriers);
        for (int k = 0; k < subcarriers; ++k)
            d(k) = std::polar(1.0, 2.0 * pi * k * spacing_hz * tau);
        return d;
    }

    CVector beam_schedule(const BeamSource &source, double phi_deg, int scan_count, int repeats)
    {
        if (scan_count != source.codeword_count())
            throw InvalidArgument("scan count " + std::to_string(scan_count) + " does not match the beam source (" +
                                  std::to_string(source.codeword_count()) + " codewords)");
        if (repeats < 1)
            throw InvalidArgument("repeats must be >= 1");
        const CVector base = source.response(phi_deg);
        CVector out(static_cast<Eigen::Index>(scan_count) * repeats);
        for (int r = 0; r < repeats; ++r)
            out.segment(static_cast<Eigen::Index>(r) * scan_count, scan_count) = base;
        return out;
    }

    CVector noise_free_signal(const ChannelParams &eta, const CVector &beam, const SignalConfig &signal)
    {
        const int k_count = signal.subcarriers;
        if (beam.size() < 1)
            throw InvalidArgument("beam vector is empty");
        if (signal.pilots && (signal.pilots->rows() != beam.size() || signal.pilots->cols() != k_count))
            throw InvalidArgument("pilot matrix shape does not match the beam schedule");
        const CVector dl = delay_response(eta.tau_l, k_count, signal.subcarrier_spacing());
        const CVector dr = delay_response(eta.tau_r, k_count, signal.subcarrier_spacing());
        CVector mu(beam.size() * k_count);
        for (Eigen::Index g = 0; g < beam.size(); ++g)
            for (int k = 0; k < k_count; ++k)
            {
                cplx v = eta.alpha_l * dl(k) + eta.alpha_r * beam(g) * dr(k);
                if (signal.pilots)
                    v *= (*signal.pilots)(g, k);
                mu(g * k_count + k) = v;
            }
        return mu;
    }

    double noise_power(double noise_figure_db, double bandwidth_hz)
    {
        if (!(bandwidth_hz > 0.0))
            throw InvalidArgument("bandwidth must be positive");
        return boltzmann * reference_temperature * bandwidth_hz * std::pow(10.0, noise_figure_db / 10.0);
    }

    CVector simulate_received(const ChannelParams &eta, const CVector &beam, const SignalConfig &signal,
                              std::uint64_t seed)
    {
        CVector y = noise_free_signal(eta, beam, signal);
        const double var = signal.noise_variance();
        if (var == 0.0)
            return y;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(var / 2.0));
        for (Eigen::Index i = 0; i < y.size(); ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            y(i) += cplx(re, im);
        }
        return y;
    }
}
