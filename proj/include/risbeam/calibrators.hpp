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
#include <string>
#include <string_view>
#include <vector>

#include "risbeam/array_core.hpp"
#include "risbeam/beam_models.hpp"

namespace risbeam
{
    enum class ModelKind
    {
        ideal,
        mcm,         // structured direct solver
        mcm_twostep, // vectorized two-step solver
        nc,
        ci,
    };

    std::string to_string(ModelKind kind);
    ModelKind model_kind_from_string(std::string_view name);

    // Coupling estimates with per-codeword diagnostics.
    struct McmFit
    {
        CouplingSet coupling;
        std::vector<double> residual;  // ||b_g - A^T C_g w_g|| per codeword
        std::vector<double> condition; // regressor condition number per codeword
        std::vector<std::string> warnings;
    };

    // Fit weights throughout: one non-negative weight per truth grid angle applied to the
    // squared row residuals; an empty span means uniform weights over the whole grid.

    // Column-wise least squares, unit-normalized afterwards.
    PerturbedCodebook calibrate_nc(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                   std::span<const double> fit_weights = {});

    // Per codeword: min over (c1, c2) of ||b_g - A^T (w_g + c1 S1 w_g + c2 S2 w_g)||.
    McmFit calibrate_mcm_direct(const BeamPatternSet &truth, const SteeringMatrix &steering, const Codebook &codebook,
                                std::span<const double> fit_weights = {});

    // Minimum-norm estimate of M_g = A^T C_g, then a real-valued fit of the band
    // coefficients through the selection matrix.
    McmFit calibrate_mcm_twostep(const BeamPatternSet &truth, const SteeringMatrix &steering, const Codebook &codebook);

    // N^2 x 3 selection matrix mapping vec(C) (column-major) onto [1, c1, c2].
    Eigen::MatrixXd mcm_selection_matrix(int elements);

    enum class Stage1Solver
    {
        normalized_ls,  // least squares solution projected onto the unit sphere
        constrained_ls, // exact minimizer under the unit-norm constraint
    };

    // Stage 1 of the combined-impacts fit: codebook update for a fixed correction curve.
    PerturbedCodebook ci_stage_w(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                 const CorrectionCurve &correction,
                                 Stage1Solver solver = Stage1Solver::normalized_ls,
                                 std::span<const double> fit_weights = {});

    struct GammaFit
    {
        CorrectionCurve curve;
        std::vector<std::size_t> degenerate; // grid indices where the model row vanished (gain set to 1)
    };

    // Stage 2: independent complex scalar least squares per angle.
    GammaFit ci_stage_gamma(const BeamPatternSet &truth, const SteeringMatrix &steering,
                            const PerturbedCodebook &codebook);

    struct CiOptions
    {
        int max_iterations = 100;
        double tolerance = 1e-8; // relative loss change between sweeps
        std::optional<CMatrix> initial_codebook; // default: ideal codebook rebuilt from pattern metadata
        std::optional<CVector> initial_correction; // default: all ones
        Stage1Solver stage1 = Stage1Solver::normalized_ls;
        bool extrapolate = true; // accelerated sweeps, accepted only when they lower the loss

        void validate() const;
    };

    struct CalibrationReport
    {
        ModelKind model = ModelKind::ideal;
        std::optional<CouplingSet> coupling;
        std::optional<PerturbedCodebook> codebook;
        std::optional<CorrectionCurve> correction;
        std::vector<double> correction_angles_deg; // grid the correction curve is sampled on
        double l1 = 0.0;
        std::vector<double> loss_history; // weighted fit objective after each sweep
        int iterations = 0;
        double seconds = 0.0;
        bool converged = true;
        std::vector<std::string> warnings;
    };

    // Alternates the two stages from the configured initial point.
    CalibrationReport calibrate_ci(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                   const CiOptions &options = {}, std::span<const double> fit_weights = {});

    // Fits ideal, MCM (direct), NC and CI with the fit weights and scores each with the
    // metric weights.
    std::vector<CalibrationReport> run_all_models(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                                  const Codebook &codebook, std::span<const double> metric_weights,
                                                  const CiOptions &options = {},
                                                  std::span<const double> fit_weights = {});

    // Fits just one model; report L1 uses the metric weights.
    CalibrationReport calibrate_model(ModelKind kind, const BeamPatternSet &truth, const SteeringMatrix &steering,
                                      const Codebook &codebook, std::span<const double> metric_weights,
                                      const CiOptions &options = {}, std::span<const double> fit_weights = {});

    // Pattern set predicted by a calibrated model on the steering grid.
    BeamPatternSet evaluate_model(const CalibrationReport &report, const Codebook &codebook,
                                  const SteeringMatrix &steering);

    // Correction gain of a CI report at an arbitrary angle: linear interpolation in
    // re/im between the fitted samples. Throws outside the fitted range.
    cplx correction_at(const CalibrationReport &report, double angle_deg);

    namespace detail
    {
        // Least squares solution per right-hand-side column; throws IllPosedError when the
        // normal matrix condition number exceeds max_condition.
        CMatrix column_least_squares(const CMatrix &design, const CMatrix &rhs, double max_condition = 1e10);

        // min ||b - M w|| subject to ||w|| = 1.
        CVector unit_norm_least_squares(const CMatrix &design, const CVector &rhs);
    }
}
