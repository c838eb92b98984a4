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

#include "risbeam/calibrators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "risbeam/errors.hpp"
#include "risbeam/text_format.hpp"

namespace risbeam
{
    namespace
    {
        using Clock = std::chrono::steady_clock;

        double seconds_since(Clock::time_point start)
        {
            return std::chrono::duration<double>(Clock::now() - start).count();
        }

        double condition_number(const CMatrix &m)
        {
            Eigen::JacobiSVD<CMatrix> svd(m);
            const auto &s = svd.singularValues();
            if (s.size() == 0 || s(s.size() - 1) == 0.0)
                return std::numeric_limits<double>::infinity();
            return s(0) / s(s.size() - 1);
        }

        void require_shapes(const BeamPatternSet &truth, const SteeringMatrix &steering)
        {
            if (truth.grid() != steering.grid())
                throw InvalidArgument("truth grid and steering grid differ");
        }

        void require_codebook(const BeamPatternSet &truth, const SteeringMatrix &steering, const Codebook &codebook)
        {
            require_shapes(truth, steering);
            if (codebook.elements() != steering.elements())
                throw InvalidArgument("codebook element count does not match the steering matrix");
            if (codebook.size() != truth.codeword_count())
                throw InvalidArgument("codebook has " + std::to_string(codebook.size()) + " codewords, truth has " +
                                      std::to_string(truth.codeword_count()));
        }

        // Square roots of the fit weights, or ones when none are given.
        Eigen::VectorXd root_weights(std::span<const double> weights, std::size_t angles)
        {
            if (weights.empty())
                return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(angles));
            if (weights.size() != angles)
                throw InvalidArgument("fit weights must have one entry per grid angle");
            Eigen::VectorXd root(static_cast<Eigen::Index>(angles));
            double total = 0.0;
            for (std::size_t t = 0; t < angles; ++t)
            {
                if (!(weights[t] >= 0.0) || !std::isfinite(weights[t]))
                    throw InvalidArgument("fit weights must be finite and non-negative");
                root(static_cast<Eigen::Index>(t)) = std::sqrt(weights[t]);
                total += weights[t];
            }
            if (!(total > 0.0))
                throw InvalidArgument("fit weights sum to zero");
            return root;
        }

        CMatrix scale_rows(const Eigen::VectorXd &root, const CMatrix &m)
        {
            return root.cast<cplx>().asDiagonal() * m;
        }

        CMatrix normalize_columns(CMatrix m)
        {
            for (Eigen::Index g = 0; g < m.cols(); ++g)
            {
                const double n = m.col(g).norm();
                if (!(n > 0.0) || !std::isfinite(n))
                    throw IllPosedError("least squares solution for codeword " + std::to_string(g) + " is zero");
                m.col(g) /= n;
            }
            return m;
        }

        // Weighted mean squared row error (the quantity each sweep minimizes).
        double ci_objective(const CMatrix &truth, const CMatrix &at, const CMatrix &w, const CVector &gamma,
                            const Eigen::VectorXd &root)
        {
            const CMatrix model = gamma.asDiagonal() * (at * w);
            return scale_rows(root, truth - model).squaredNorm() / root.squaredNorm();
        }

        Codebook initial_codebook_from(const BeamPatternSet &truth)
        {
            const auto &meta = truth.metadata();
            if (meta.scan_angles_deg.empty())
                throw InvalidArgument("pattern metadata lists no scan angles; an initial codebook is required");
            return build_codebook(meta.scan_angles_deg, meta.elements, meta.phase_bits);
        }
    }

    std::string to_string(ModelKind kind)
    {
        switch (kind)
        {
        case ModelKind::ideal: return "ideal";
        case ModelKind::mcm: return "mcm";
        case ModelKind::mcm_twostep: return "mcm-twostep";
        case ModelKind::nc: return "nc";
        case ModelKind::ci: return "ci";
        }
        return "unknown";
    }

    ModelKind model_kind_from_string(std::string_view name)
    {
        if (name == "ideal") return ModelKind::ideal;
        if (name == "mcm") return ModelKind::mcm;
        if (name == "mcm-twostep") return ModelKind::mcm_twostep;
        if (name == "nc") return ModelKind::nc;
        if (name == "ci") return ModelKind::ci;
        throw InvalidArgument("unknown model '" + std::string(name) + "' (expected ideal, mcm, mcm-twostep, nc or ci)");
    }

    namespace detail
    {
        CMatrix column_least_squares(const CMatrix &design, const CMatrix &rhs, double max_condition)
        {
            if (design.rows() != rhs.rows())
                throw InvalidArgument("least squares shapes disagree");
            if (design.rows() < design.cols())
                throw IllPosedError("underdetermined least squares: " + std::to_string(design.rows()) +
                                    " samples for " + std::to_string(design.cols()) + " unknowns");
            const double cond = condition_number(design);
            if (!(cond * cond < max_condition))
                throw IllPosedError("design matrix is rank deficient (normal-matrix condition " +
                                    format_double(cond * cond) + ")");
            return design.colPivHouseholderQr().solve(rhs);
        }

        CVector unit_norm_least_squares(const CMatrix &design, const CVector &rhs)
        {
            const CMatrix h = design.adjoint() * design;
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
            const Eigen::VectorXd &lambda = eig.eigenvalues(); // ascending
            const CMatrix &v = eig.eigenvectors();
            const CVector beta = v.adjoint() * (design.adjoint() * rhs);
            const double beta_norm = beta.norm();
            const double lmin = lambda(0);
            if (beta_norm == 0.0)
                return v.col(0);

            auto secular = [&](double mu) {
                double s = 0.0;
                for (Eigen::Index i = 0; i < beta.size(); ++i)
                {
                    const double d = lambda(i) - mu;
                    s += std::norm(beta(i)) / (d * d);
                }
                return s;
            };
            auto solution = [&](double mu) {
                CVector y(beta.size());
                for (Eigen::Index i = 0; i < beta.size(); ++i)
                    y(i) = beta(i) / (lambda(i) - mu);
                return CVector(v * y);
            };

            // f(mu) increases on (-inf, lmin); f(lmin - |beta|) <= 1.
            double lo = lmin - beta_norm;
            double hi = lmin;
            const double probe = lmin - 1e-14 * std::max(1.0, std::abs(lmin) + beta_norm);
            if (secular(probe) < 1.0)
            {
                // Hard case: beta has (almost) no weight on the smallest eigenvector.
                CVector y(beta.size());
                y(0) = 0.0;
                double rest = 0.0;
                for (Eigen::Index i = 1; i < beta.size(); ++i)
                {
                    const double d = lambda(i) - lmin;
                    y(i) = d > 0.0 ? beta(i) / d : cplx(0.0);
                    rest += std::norm(y(i));
                }
                y(0) = std::sqrt(std::max(0.0, 1.0 - rest));
                CVector w = v * y;
                return w / w.norm();
            }
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it)
            {
                const double mid = 0.5 * (lo + hi);
                if (secular(mid) > 1.0)
                    hi = mid;
                else
                    lo = mid;
            }
            CVector w = solution(lo);
            return w / w.norm();
        }
    }

    PerturbedCodebook calibrate_nc(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                   std::span<const double> fit_weights)
    {
        require_shapes(truth, steering);
        const auto root = root_weights(fit_weights, truth.angle_count());
        const CMatrix at = scale_rows(root, steering.matrix().transpose());
        return PerturbedCodebook(normalize_columns(detail::column_least_squares(at, scale_rows(root, truth.values()))));
    }

    McmFit calibrate_mcm_direct(const BeamPatternSet &truth, const SteeringMatrix &steering, const Codebook &codebook,
                                std::span<const double> fit_weights)
    {
        require_codebook(truth, steering, codebook);
        const auto root_w = root_weights(fit_weights, truth.angle_count());
        if ((root_w.array() > 0.0).count() < 2)
            throw IllPosedError("coupling fit needs at least two weighted angle samples");
        const int n = steering.elements();
        if (n < 3)
            throw InvalidArgument("coupling fit needs at least three elements");
        const CMatrix at = scale_rows(root_w, steering.matrix().transpose());
        const CMatrix b = scale_rows(root_w, truth.values());
        const CMatrix s1 = band_shift(n, 1);
        const CMatrix s2 = band_shift(n, 2);

        McmFit fit;
        std::vector<CouplingPair> pairs;
        for (int g = 0; g < codebook.size(); ++g)
        {
            const CVector w = codebook.columns.col(g);
            const CVector r = b.col(g) - at * w;
            CMatrix x(at.rows(), 2);
            x.col(0) = at * (s1 * w);
            x.col(1) = at * (s2 * w);
            const double cond = condition_number(x);
            fit.condition.push_back(cond);
            if (!(cond < 1e8))
                fit.warnings.push_back("codeword " + std::to_string(g) + ": coupling regressors nearly collinear (condition " +
                                       format_double(cond) + ")");
            const CVector c = x.completeOrthogonalDecomposition().solve(r);
            fit.residual.push_back((r - x * c).norm());
            pairs.push_back({c(0), c(1)});
        }
        fit.coupling = CouplingSet(std::move(pairs));
        return fit;
    }

    Eigen::MatrixXd mcm_selection_matrix(int elements)
    {
        if (elements < 3)
            throw InvalidArgument("selection matrix needs at least three elements");
        const int n = elements;
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n * n, 3);
        for (int col = 0; col < n; ++col)
            for (int row = 0; row < n; ++row)
            {
                const int d = std::abs(row - col);
                if (d <= 2)
                    j(col * n + row, d) = 1.0;
            }
        return j;
    }

    McmFit calibrate_mcm_twostep(const BeamPatternSet &truth, const SteeringMatrix &steering, const Codebook &codebook)
    {
        require_codebook(truth, steering, codebook);
        const int n = steering.elements();
        const CMatrix at = steering.matrix().transpose();
        const Eigen::Index t_count = at.rows();
        const Eigen::Index len = t_count * n;

        // D = (I_N kron A^T) J, one column per band; column k is vec(A^T unvec(J_k)).
        const Eigen::MatrixXd j = mcm_selection_matrix(n);
        CMatrix d(len, 3);
        for (int k = 0; k < 3; ++k)
        {
            const Eigen::MatrixXd c = Eigen::Map<const Eigen::MatrixXd>(j.col(k).data(), n, n);
            const CMatrix prod = at * c.cast<cplx>();
            d.col(k) = Eigen::Map<const CVector>(prod.data(), len);
        }
        Eigen::MatrixXd dr(2 * len, 6);
        dr << d.real(), -d.imag(), d.imag(), d.real();
        const Eigen::MatrixXd normal = dr.transpose() * dr;
        const double cond = condition_number(normal.cast<cplx>());
        if (!(cond < 1e14))
            throw IllPosedError("two-step coupling system is singular (condition " + format_double(cond) + ")");
        const auto factor = normal.ldlt();

        const CMatrix s1 = band_shift(n, 1);
        const CMatrix s2 = band_shift(n, 2);
        McmFit fit;
        std::vector<CouplingPair> pairs;
        for (int g = 0; g < codebook.size(); ++g)
        {
            const CVector w = codebook.columns.col(g);
            const CVector b = truth.values().col(g);
            // Minimum-Frobenius-norm solution of M w = b.
            const CMatrix m_hat = b * w.adjoint() / w.squaredNorm();
            const Eigen::Map<const CVector> m_vec(m_hat.data(), len);
            Eigen::VectorXd mr(2 * len);
            mr << m_vec.real(), m_vec.imag();
            const Eigen::VectorXd c_hat = factor.solve(dr.transpose() * mr);
            const cplx c1(c_hat(1), c_hat(4));
            const cplx c2(c_hat(2), c_hat(5));
            pairs.push_back({c1, c2});
            const CVector model = at * (w + c1 * (s1 * w) + c2 * (s2 * w));
            fit.residual.push_back((b - model).norm());
            fit.condition.push_back(std::sqrt(cond));
        }
        fit.coupling = CouplingSet(std::move(pairs));
        return fit;
    }

    PerturbedCodebook ci_stage_w(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                 const CorrectionCurve &correction, Stage1Solver solver,
                                 std::span<const double> fit_weights)
    {
        require_shapes(truth, steering);
        if (correction.size() != truth.angle_count())
            throw InvalidArgument("correction curve length does not match the grid");
        const CVector &gamma = correction.gains();
        for (Eigen::Index t = 0; t < gamma.size(); ++t)
            if (gamma(t) == cplx(0.0))
                throw IllPosedError("correction gain is zero at " + format_double(truth.grid()[static_cast<std::size_t>(t)]) +
                                    " deg");
        const auto root = root_weights(fit_weights, truth.angle_count());
        const CMatrix design = scale_rows(root, gamma.asDiagonal() * steering.matrix().transpose());
        const CMatrix rhs = scale_rows(root, truth.values());
        if (solver == Stage1Solver::normalized_ls)
            return PerturbedCodebook(normalize_columns(detail::column_least_squares(design, rhs)));

        if (design.rows() < design.cols())
            throw IllPosedError("underdetermined stage-1 problem");
        CMatrix w(design.cols(), truth.values().cols());
        for (Eigen::Index g = 0; g < w.cols(); ++g)
            w.col(g) = detail::unit_norm_least_squares(design, rhs.col(g));
        return PerturbedCodebook(std::move(w));
    }

    GammaFit ci_stage_gamma(const BeamPatternSet &truth, const SteeringMatrix &steering, const PerturbedCodebook &codebook)
    {
        require_shapes(truth, steering);
        if (codebook.size() != truth.codeword_count() || codebook.elements() != steering.elements())
            throw InvalidArgument("codebook shape does not match truth and steering");
        const CMatrix r = steering.matrix().transpose() * codebook.columns();
        const CMatrix &b = truth.values();
        CVector gamma(r.rows());
        std::vector<std::size_t> degenerate;
        // Rows this far below the strongest one only carry rounding noise.
        const double floor = 1e-24 * r.rowwise().squaredNorm().maxCoeff();
        for (Eigen::Index t = 0; t < r.rows(); ++t)
        {
            const double rr = r.row(t).squaredNorm();
            const cplx num = r.row(t).dot(b.row(t)); // sum conj(r) * b
            if (!(rr > floor) || num == cplx(0.0))
            {
                gamma(t) = 1.0;
                degenerate.push_back(static_cast<std::size_t>(t));
                continue;
            }
            gamma(t) = num / rr;
        }
        return {CorrectionCurve(std::move(gamma)), std::move(degenerate)};
    }

    void CiOptions::validate() const
    {
        if (max_iterations < 1)
            throw InvalidArgument("CI max_iterations must be >= 1");
        if (!(tolerance > 0.0))
            throw InvalidArgument("CI tolerance must be > 0");
    }

    CalibrationReport calibrate_ci(const BeamPatternSet &truth, const SteeringMatrix &steering, const CiOptions &options,
                                   std::span<const double> fit_weights)
    {
        options.validate();
        require_shapes(truth, steering);
        const auto root = root_weights(fit_weights, truth.angle_count());
        const auto start = Clock::now();
        const CMatrix at = steering.matrix().transpose();
        const CMatrix &b = truth.values();
        const double scale = scale_rows(root, b).squaredNorm() / root.squaredNorm();
        if (!(scale > 0.0))
            throw IllPosedError("truth patterns are identically zero");

        CMatrix w = options.initial_codebook ? *options.initial_codebook : initial_codebook_from(truth).columns;
        if (w.rows() != steering.elements() || w.cols() != truth.codeword_count())
            throw InvalidArgument("initial codebook shape does not match the truth set");
        CVector gamma = options.initial_correction ? *options.initial_correction
                                                   : CVector(CVector::Ones(static_cast<Eigen::Index>(truth.angle_count())));
        if (static_cast<std::size_t>(gamma.size()) != truth.angle_count())
            throw InvalidArgument("initial correction length does not match the grid");

        CalibrationReport report;
        report.model = ModelKind::ci;
        report.converged = false;
        std::optional<double> prev;
        std::vector<std::size_t> degenerate;

        for (int it = 0; it < options.max_iterations; ++it)
        {
            const auto w_new = ci_stage_w(truth, steering, CorrectionCurve(gamma), options.stage1, fit_weights);
            auto g_new = ci_stage_gamma(truth, steering, w_new);
            CMatrix w_next = w_new.columns();
            CVector gamma_next = g_new.curve.gains();
            double loss = ci_objective(b, at, w_next, gamma_next, root);
            auto degenerate_next = g_new.degenerate;

            if (options.extrapolate && prev)
            {
                const double step = 1.0 + std::cbrt(static_cast<double>(it));
                CMatrix w_ext = w + step * (w_next - w);
                bool usable = true;
                for (Eigen::Index g = 0; g < w_ext.cols(); ++g)
                {
                    const double nrm = w_ext.col(g).norm();
                    if (!(nrm > 0.0))
                        usable = false;
                    else
                        w_ext.col(g) /= nrm;
                }
                if (usable)
                {
                    const PerturbedCodebook ext(w_ext);
                    auto g_ext = ci_stage_gamma(truth, steering, ext);
                    const double loss_ext = ci_objective(b, at, w_ext, g_ext.curve.gains(), root);
                    if (loss_ext < loss)
                    {
                        w_next = std::move(w_ext);
                        gamma_next = g_ext.curve.gains();
                        loss = loss_ext;
                        degenerate_next = std::move(g_ext.degenerate);
                    }
                }
            }

            if (prev && loss > *prev)
            {
                report.warnings.push_back("sweep " + std::to_string(it + 1) +
                                          " did not decrease the loss; kept the previous iterate");
                report.converged = (loss - *prev) <= options.tolerance * *prev;
                break;
            }
            w = std::move(w_next);
            gamma = std::move(gamma_next);
            degenerate = std::move(degenerate_next);
            report.loss_history.push_back(loss);
            report.iterations = it + 1;
            if (loss <= 1e-30 * scale || (prev && (*prev - loss) <= options.tolerance * *prev))
            {
                report.converged = true;
                break;
            }
            prev = loss;
        }
        if (!report.converged && report.warnings.empty())
            report.warnings.push_back("reached max_iterations without meeting the tolerance");
        if (!degenerate.empty())
            report.warnings.push_back(std::to_string(degenerate.size()) + " angle(s) with vanishing model response; gain set to 1");

        report.codebook = PerturbedCodebook(std::move(w));
        report.correction = CorrectionCurve(std::move(gamma));
        report.correction_angles_deg = truth.grid().angles();
        report.l1 = report.loss_history.empty() ? 0.0 : report.loss_history.back();
        report.seconds = seconds_since(start);
        return report;
    }

    CalibrationReport calibrate_model(ModelKind kind, const BeamPatternSet &truth, const SteeringMatrix &steering,
                                      const Codebook &codebook, std::span<const double> metric_weights,
                                      const CiOptions &options, std::span<const double> fit_weights)
    {
        require_codebook(truth, steering, codebook);
        const auto start = Clock::now();
        CalibrationReport report;
        report.model = kind;
        switch (kind)
        {
        case ModelKind::ideal:
            break;
        case ModelKind::mcm:
        case ModelKind::mcm_twostep:
        {
            auto fit = kind == ModelKind::mcm ? calibrate_mcm_direct(truth, steering, codebook, fit_weights)
                                              : calibrate_mcm_twostep(truth, steering, codebook);
            report.coupling = std::move(fit.coupling);
            report.warnings = std::move(fit.warnings);
            break;
        }
        case ModelKind::nc:
            report.codebook = calibrate_nc(truth, steering, fit_weights);
            break;
        case ModelKind::ci:
        {
            CiOptions opts = options;
            if (!opts.initial_codebook)
                opts.initial_codebook = codebook.columns;
            report = calibrate_ci(truth, steering, opts, fit_weights);
            break;
        }
        }
        report.iterations = std::max(report.iterations, kind == ModelKind::ideal ? 0 : 1);
        report.l1 = loss_l1(truth, evaluate_model(report, codebook, steering), metric_weights);
        report.seconds = seconds_since(start);
        return report;
    }

    std::vector<CalibrationReport> run_all_models(const BeamPatternSet &truth, const SteeringMatrix &steering,
                                                  const Codebook &codebook, std::span<const double> metric_weights,
                                                  const CiOptions &options, std::span<const double> fit_weights)
    {
        std::vector<CalibrationReport> reports;
        for (auto kind : {ModelKind::ideal, ModelKind::mcm, ModelKind::nc, ModelKind::ci})
            reports.push_back(calibrate_model(kind, truth, steering, codebook, metric_weights, options, fit_weights));
        return reports;
    }

    cplx correction_at(const CalibrationReport &report, double angle_deg)
    {
        if (!report.correction)
            throw InvalidArgument("report has no correction curve");
        const auto &angles = report.correction_angles_deg;
        const auto &gains = report.correction->gains();
        if (angles.empty() || angles.size() != static_cast<std::size_t>(gains.size()))
            throw InvalidArgument("correction curve and its angles are inconsistent");
        constexpr double eps = 1e-9;
        if (angle_deg < angles.front() - eps || angle_deg > angles.back() + eps)
            throw InvalidArgument("angle " + format_double(angle_deg) + " deg is outside the calibrated range [" +
                                  format_double(angles.front()) + ", " + format_double(angles.back()) + "]");
        if (angles.size() == 1)
            return gains(0);
        auto upper = std::upper_bound(angles.begin(), angles.end(), angle_deg);
        std::size_t i = upper == angles.begin() ? 0 : static_cast<std::size_t>(upper - angles.begin()) - 1;
        i = std::min(i, angles.size() - 2);
        const double u = std::clamp((angle_deg - angles[i]) / (angles[i + 1] - angles[i]), 0.0, 1.0);
        const auto a = static_cast<Eigen::Index>(i);
        return (1.0 - u) * gains(a) + u * gains(a + 1);
    }

    BeamPatternSet evaluate_model(const CalibrationReport &report, const Codebook &codebook, const SteeringMatrix &steering)
    {
        switch (report.model)
        {
        case ModelKind::ideal:
            return eval_ideal(codebook, steering);
        case ModelKind::mcm:
        case ModelKind::mcm_twostep:
            if (!report.coupling)
                throw InvalidArgument("MCM report has no coupling coefficients");
            return eval_mcm(codebook, steering, *report.coupling);
        case ModelKind::nc:
            if (!report.codebook)
                throw InvalidArgument("NC report has no codebook");
            return eval_nc(*report.codebook, steering);
        case ModelKind::ci:
        {
            if (!report.codebook)
                throw InvalidArgument("CI report has no codebook");
            CVector gamma(static_cast<Eigen::Index>(steering.angle_count()));
            for (std::size_t t = 0; t < steering.angle_count(); ++t)
                gamma(static_cast<Eigen::Index>(t)) = correction_at(report, steering.grid()[t]);
            return eval_ci(*report.codebook, steering, CorrectionCurve(std::move(gamma)));
        }
        }
        throw InvalidArgument("unknown model kind");
    }
}
