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

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace risbeam
{
    using cplx = std::complex<double>;
    using CVector = Eigen::VectorXcd;
    using CMatrix = Eigen::MatrixXcd;

    inline constexpr double pi = 3.14159265358979323846;
    inline constexpr double deg_to_rad = pi / 180.0;

    // Ordered azimuth samples in degrees, measured from array boresight.
    // Strictly increasing, all within [-90, 90], at least one sample.
    class AngleGrid
    {
    public:
        explicit AngleGrid(std::vector<double> angles_deg);

        std::size_t size() const noexcept { return angles_.size(); }
        double operator[](std::size_t t) const noexcept { return angles_[t]; }
        double front() const noexcept { return angles_.front(); }
        double back() const noexcept { return angles_.back(); }
        const std::vector<double> &angles() const noexcept { return angles_; }

        // Index of the grid sample equal to angle_deg within tol, if any.
        std::optional<std::size_t> find(double angle_deg, double tol = 1e-9) const;

        bool operator==(const AngleGrid &other) const = default;

    private:
        std::vector<double> angles_;
    };

    // Inclusive arithmetic sequence start, start+step, ... not exceeding stop.
    AngleGrid make_angle_grid(double start_deg, double stop_deg, double step_deg);

    // Element n (n = 0..N-1) equals exp(j*pi*n*sin(phi)); half-wavelength line array.
    CVector steering_vector(double phi_deg, int elements);

    // Steering vectors of a grid stacked as columns (N x T).
    class SteeringMatrix
    {
    public:
        SteeringMatrix(const AngleGrid &grid, int elements);

        const CMatrix &matrix() const noexcept { return entries_; }
        const AngleGrid &grid() const noexcept { return grid_; }
        int elements() const noexcept { return static_cast<int>(entries_.rows()); }
        std::size_t angle_count() const noexcept { return grid_.size(); }

        // Returns the steering matrix of the subset of angles given by indices.
        SteeringMatrix subset(std::span<const std::size_t> indices) const;

    private:
        SteeringMatrix(AngleGrid grid, CMatrix entries);

        AngleGrid grid_;
        CMatrix entries_;
    };

    SteeringMatrix steering_matrix(const AngleGrid &grid, int elements);

    // Unit-norm codeword steering to scan_deg: (1/sqrt(N)) exp(-j*pi*n*sin(scan)).
    CVector ideal_codeword(double scan_deg, int elements);

    // Replaces each entry by (1/sqrt(N)) exp(j*theta_q), theta_q the nearest of the
    // 2^bits uniformly spaced phases. Exact ties go to the smaller phase.
    CVector quantize_codeword(const CVector &w, int phase_bits);

    struct Codebook
    {
        CMatrix columns;                // N x G_base, unit-norm columns
        std::vector<double> scan_angles; // degrees, one per column
        std::optional<int> phase_bits;   // empty when unquantized

        int elements() const noexcept { return static_cast<int>(columns.rows()); }
        int size() const noexcept { return static_cast<int>(columns.cols()); }
    };

    Codebook build_codebook(std::span<const double> scan_angles_deg, int elements,
                            std::optional<int> phase_bits);
}
