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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "risbeam/beam_source.hpp"
#include "risbeam/isac_channel.hpp"

namespace risbeam
{
    struct PseudoTrueOptions
    {
        int max_iterations = 500;
        double tolerance = 1e-12;    // relative residual change between sweeps
        double tau_step_ns = 0.05;   // initial line-search step for both delays
        double phi_step_deg = 0.05;  // initial line-search step for the angle
        double tau_tol_ns = 1e-9;    // line-search resolution
        double phi_tol_deg = 1e-10;

        void validate() const;
    };

    struct PseudoTrueResult
    {
        ChannelParams eta_true;
        ChannelParams eta0;
        double residual = 0.0;         // ||mu_bar - mu(eta0)||^2
        double initial_residual = 0.0; // same at the true delays and angle (gains re-fitted)
        double relative_change = 0.0;  // of the residual over the final sweep
        int iterations = 0;
        bool converged = false;
    };

    // Misspecified fit: mu_bar from the true source at the true state, model signal from
    // the model source; gains are projected out in closed form.
    PseudoTrueResult pseudo_true(const BeamSource &truth, const BeamSource &model, const Vec2 &s,
                                 const SceneGeometry &geometry, const SignalConfig &signal,
                                 const PseudoTrueOptions &options = {});

    // Unit-balanced Gauss-Newton inverse of geo_params.
    Vec2 locate(double tau_l, double tau_r, double phi_deg, const SceneGeometry &geometry);

    struct AlbResult
    {
        double alb = 0.0;
        Vec2 s0{0.0, 0.0};
        PseudoTrueResult fit;
    };

    AlbResult alb(const Vec2 &s, const BeamSource &truth, const BeamSource &model, const SceneGeometry &geometry,
                  const SignalConfig &signal, const PseudoTrueOptions &options = {});

    // Inclusive rectangular grid of UE positions.
    struct SceneRegion
    {
        double x_min = -5.0;
        double x_max = 5.0;
        double y_min = -4.0;
        double y_max = 6.0;
        double step = 0.25;

        int nx() const;
        int ny() const;
        void validate() const;
    };

    struct AlbCell
    {
        double x = 0.0;
        double y = 0.0;
        bool valid = false;
        double alb = 0.0;     // NaN when invalid
        double phi_deg = 0.0; // true RIS-side angle (NaN when undefined)
        Vec2 s0{0.0, 0.0};
        std::string status;   // empty when valid
    };

    struct AlbGrid
    {
        SceneRegion region;
        std::vector<AlbCell> cells; // row-major: y outer, x inner

        std::vector<double> valid_values() const;
    };

    // Evaluates every cell, up to `jobs` worker threads (0 = hardware concurrency).
    AlbGrid alb_grid(const SceneRegion &region, const BeamSource &truth, const BeamSource &model,
                     const SceneGeometry &geometry, const SignalConfig &signal, unsigned jobs = 1,
                     const PseudoTrueOptions &options = {});

    // Right-continuous empirical CDF: fraction of values <= each threshold.
    std::vector<std::pair<double, double>> cdf(std::span<const double> values, std::span<const double> thresholds);

    void write_alb_csv(const AlbGrid &grid, const std::filesystem::path &path);

    // Valid ALB values from an ALB CSV.
    std::vector<double> read_alb_values(const std::filesystem::path &path);

    void write_cdf_csv(const std::vector<std::pair<double, double>> &points, const std::filesystem::path &path);
}
