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

#include "risbeam/array_core.hpp"

#include <cmath>
#include <string>

#include "risbeam/errors.hpp"

namespace risbeam
{
    namespace
    {
        void require_angle(double phi_deg, const char *what)
        {
            if (!std::isfinite(phi_deg) || phi_deg < -90.0 || phi_deg > 90.0)
                throw InvalidArgument(std::string(what) + " must lie in [-90, 90] degrees, got " + std::to_string(phi_deg));
        }

        void require_elements(int elements)
        {
            if (elements < 1)
                throw InvalidArgument("element count must be >= 1");
        }
    }

    AngleGrid::AngleGrid(std::vector<double> angles_deg) : angles_(std::move(angles_deg))
    {
        if (angles_.empty())
            throw InvalidArgument("angle grid must contain at least one angle");
        for (std::size_t t = 0; t < angles_.size(); ++t)
        {
            require_angle(angles_[t], "grid angle");
            if (t > 0 && !(angles_[t] > angles_[t - 1]))
                throw InvalidArgument("grid angles must be strictly increasing (index " + std::to_string(t) + ")");
        }
    }

    std::optional<std::size_t> AngleGrid::find(double angle_deg, double tol) const
    {
        for (std::size_t t = 0; t < angles_.size(); ++t)
            if (std::abs(angles_[t] - angle_deg) <= tol)
                return t;
        return std::nullopt;
    }

    AngleGrid make_angle_grid(double start_deg, double stop_deg, double step_deg)
    {
        if (!(step_deg > 0.0))
            throw InvalidArgument("angle step must be positive");
        require_angle(start_deg, "grid start");
        require_angle(stop_deg, "grid stop");
        if (start_deg > stop_deg)
            throw InvalidArgument("grid start must not exceed grid stop");

        // Guard the floor against representation error, e.g. (40 - -40) / 0.1.
        const double span = (stop_deg - start_deg) / step_deg;
        const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;

        std::vector<double> angles(count);
        for (std::size_t t = 0; t < count; ++t)
            angles[t] = std::min(start_deg + static_cast<double>(t) * step_deg, stop_deg);
        return AngleGrid(std::move(angles));
    }

    CVector steering_vector(double phi_deg, int elements)
    {
        require_elements(elements);
        require_angle(phi_deg, "steering angle");
        const double spatial = pi * std::sin(phi_deg * deg_to_rad);
        CVector a(elements);
        for (int n = 0; n < elements; ++n)
            a(n) = std::polar(1.0, spatial * n);
        return a;
    }

    SteeringMatrix::SteeringMatrix(const AngleGrid &grid, int elements) : grid_(grid)
    {
        require_elements(elements);
        entries_.resize(elements, static_cast<Eigen::Index>(grid.size()));
        for (std::size_t t = 0; t < grid.size(); ++t)
            entries_.col(static_cast<Eigen::Index>(t)) = steering_vector(grid[t], elements);
    }

    SteeringMatrix::SteeringMatrix(AngleGrid grid, CMatrix entries)
        : grid_(std::move(grid)), entries_(std::move(entries)) {}

    SteeringMatrix SteeringMatrix::subset(std::span<const std::size_t> indices) const
    {
        std::vector<double> angles;
        CMatrix sub(entries_.rows(), static_cast<Eigen::Index>(indices.size()));
        for (std::size_t i = 0; i < indices.size(); ++i)
        {
            if (indices[i] >= grid_.size())
                throw InvalidArgument("steering subset index out of range");
            angles.push_back(grid_[indices[i]]);
            sub.col(static_cast<Eigen::Index>(i)) = entries_.col(static_cast<Eigen::Index>(indices[i]));
        }
        return SteeringMatrix(AngleGrid(std::move(angles)), std::move(sub));
    }

    SteeringMatrix steering_matrix(const AngleGrid &grid, int elements)
    {
        return SteeringMatrix(grid, elements);
    }

    CVector ideal_codeword(double scan_deg, int elements)
    {
        require_elements(elements);
        require_angle(scan_deg, "scan angle");
        const double spatial = pi * std::sin(scan_deg * deg_to_rad);
        const double amplitude = 1.0 / std::sqrt(static_cast<double>(elements));
        CVector w(elements);
        for (int n = 0; n < elements; ++n)
            w(n) = std::polar(amplitude, -spatial * n);
        return w;
    }

    CVector quantize_codeword(const CVector &w, int phase_bits)
    {
        if (phase_bits < 1 || phase_bits > 8)
            throw InvalidArgument("phase_bits must be in [1, 8]");
        if (w.size() == 0)
            throw InvalidArgument("cannot quantize an empty codeword");

        const int levels = 1 << phase_bits;
        const double step = 2.0 * pi / levels;
        const double amplitude = 1.0 / std::sqrt(static_cast<double>(w.size()));

        CVector q(w.size());
        for (Eigen::Index n = 0; n < w.size(); ++n)
        {
            if (w(n) == cplx(0.0, 0.0))
                throw InvalidArgument("zero codeword entry at element " + std::to_string(n) + " has no phase");
            double phase = std::arg(w(n));
            if (phase < 0.0)
                phase += 2.0 * pi;
            const double x = phase / step;
            double level = std::floor(x);
            if (x - level > 0.5)
                level += 1.0;
            const int k = static_cast<int>(level) % levels;
            q(n) = std::polar(amplitude, k * step);
        }
        return q;
    }

    Codebook build_codebook(std::span<const double> scan_angles_deg, int elements,
                            std::optional<int> phase_bits)
    {
        require_elements(elements);
        if (scan_angles_deg.empty())
            throw InvalidArgument("codebook needs at least one scan angle");

        Codebook codebook;
        codebook.columns.resize(elements, static_cast<Eigen::Index>(scan_angles_deg.size()));
        codebook.scan_angles.assign(scan_angles_deg.begin(), scan_angles_deg.end());
        codebook.phase_bits = phase_bits;
        for (std::size_t g = 0; g < scan_angles_deg.size(); ++g)
        {
            CVector w = ideal_codeword(scan_angles_deg[g], elements);
            if (phase_bits)
                w = quantize_codeword(w, *phase_bits);
            codebook.columns.col(static_cast<Eigen::Index>(g)) = w;
        }
        return codebook;
    }
}
