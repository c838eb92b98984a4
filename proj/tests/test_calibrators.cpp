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

#include <cmath>
#include <random>

#include <catch_amalgamated.hpp>

#include "risbeam/calibrators.hpp"
#include "risbeam/errors.hpp"
#include "risbeam/json_io.hpp"
#include "risbeam/truth_forge.hpp"

using namespace risbeam;
using Catch::Matchers::WithinAbs;

namespace
{
    ArrayConfig standard_array()
    {
        ArrayConfig a;
        for (int s = -50; s <= 50; s += 10)
            a.scan_angles_deg.push_back(s);
        return a;
    }

    CMatrix random_unit_columns(int n, int g, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        CMatrix m(n, g);
        for (int c = 0; c < g; ++c)
        {
            for (int r = 0; r < n; ++r)
                m(r, c) = cplx(nd(rng), nd(rng));
            m.col(c).normalize();
        }
        return m;
    }

    double max_abs(const CMatrix &m)
    {
        return m.cwiseAbs().maxCoeff();
    }

    double relative_residual(const BeamPatternSet &truth, const BeamPatternSet &model)
    {
        return (truth.values() - model.values()).norm() / truth.values().norm();
    }

    // Forged CI-family truth without coupling or noise.
    std::pair<BeamPatternSet, TruthRecord> ci_truth()
    {
        auto imp = ImpairmentConfig::standard();
        imp.coupling.clear();
        imp.noise_std_rel = 0.0;
        return synth_ground_truth(standard_array(), imp);
    }
}

TEST_CASE("NC recovers the ideal codebook from ideal patterns")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto w = calibrate_nc(eval_ideal(cb, a), a);
    CHECK(max_abs(w.columns() - cb.columns) < 1e-8);
}

TEST_CASE("NC recovers a random perturbed codebook on an 81-angle grid")
{
    const auto grid = make_angle_grid(-40, 40, 1);
    const SteeringMatrix a(grid, 16);
    const PerturbedCodebook truth_w(random_unit_columns(16, 11, 17));
    const auto w = calibrate_nc(eval_nc(truth_w, a), a);
    CHECK(max_abs(w.columns() - truth_w.columns()) < 1e-8);
}

TEST_CASE("NC rejects underdetermined grids")
{
    const auto grid = make_angle_grid(-70, 70, 10); // 15 angles for 16 elements
    REQUIRE(grid.size() == 15);
    const SteeringMatrix a(grid, 16);
    const PerturbedCodebook w(random_unit_columns(16, 3, 1));
    CHECK_THROWS_AS(calibrate_nc(eval_nc(w, a), a), IllPosedError);
}

TEST_CASE("NC least-squares residual is orthogonal to the model space")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto [truth, rec] = synth_ground_truth(array, ImpairmentConfig::standard());
    const CMatrix at = a.matrix().transpose();
    const CMatrix raw = detail::column_least_squares(at, truth.values());
    for (int g = 0; g < truth.codeword_count(); ++g)
    {
        const CVector r = truth.values().col(g) - at * raw.col(g);
        const CVector inner = at.adjoint() * r;
        CHECK(inner.cwiseAbs().maxCoeff() < 1e-8 * truth.values().col(g).norm());
    }
    // Normalized columns are what calibrate_nc returns.
    const auto w = calibrate_nc(truth, a);
    for (int g = 0; g < w.size(); ++g)
        CHECK(max_abs(w.columns().col(g) - raw.col(g) / raw.col(g).norm()) < 1e-12);
}

TEST_CASE("MCM direct solver: oracle recovery")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();

    ImpairmentConfig none;
    const auto [ideal, r0] = synth_ground_truth(array, none);
    const auto fit0 = calibrate_mcm_direct(ideal, a, cb);
    for (const auto &p : fit0.coupling.pairs())
    {
        CHECK(std::abs(p.first) < 1e-10);
        CHECK(std::abs(p.second) < 1e-10);
    }

    ImpairmentConfig imp;
    const CouplingPair c{std::polar(0.1, pi / 4), 0.02};
    imp.coupling = {c};
    const auto [coupled, r1] = synth_ground_truth(array, imp);
    const auto fit = calibrate_mcm_direct(coupled, a, cb);
    REQUIRE(fit.coupling.size() == 11);
    for (const auto &p : fit.coupling.pairs())
    {
        CHECK(std::abs(p.first - c.first) < 1e-6);
        CHECK(std::abs(p.second - c.second) < 1e-6);
    }
    CHECK(fit.warnings.empty());
}

TEST_CASE("MCM direct residual never exceeds the ideal-model residual")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        auto imp = ImpairmentConfig::standard();
        imp.seed = seed;
        const auto [truth, rec] = synth_ground_truth(array, imp);
        const auto fit = calibrate_mcm_direct(truth, a, cb);
        const auto ideal = eval_ideal(cb, a);
        for (int g = 0; g < cb.size(); ++g)
            CHECK(fit.residual[static_cast<std::size_t>(g)] <= (truth.values().col(g) - ideal.values().col(g)).norm() + 1e-12);
    }
}

TEST_CASE("MCM direct solver warns on collinear regressors")
{
    // Centre-element codeword on a +-phi grid: both band regressors share one direction.
    Codebook cb;
    cb.columns = CMatrix::Zero(5, 1);
    cb.columns(2, 0) = 1.0;
    cb.scan_angles = {0.0};
    const SteeringMatrix a(AngleGrid({-30.0, 30.0}), 5);
    const auto truth = eval_ideal(cb, a);
    const auto fit = calibrate_mcm_direct(truth, a, cb);
    CHECK_FALSE(fit.warnings.empty());
    CHECK(fit.condition.front() > 1e8);
}

TEST_CASE("selection matrix band counts")
{
    for (int n : {3, 4, 16})
    {
        const auto j = mcm_selection_matrix(n);
        CHECK(j.rows() == n * n);
        CHECK(j.col(0).sum() == n);
        CHECK(j.col(1).sum() == 2 * (n - 1));
        CHECK(j.col(2).sum() == 2 * (n - 2));
        CHECK((j.rowwise().sum().array() <= 1.0).all());
    }
    // J maps [1, c1, c2] onto vec(C) in column-major order.
    const auto j = mcm_selection_matrix(4);
    const Eigen::Vector3cd coeffs(1.0, cplx(0.1, 0.2), cplx(0.03, -0.01));
    const CVector vec_c = j.cast<cplx>() * coeffs;
    const auto c = toeplitz_mcm({coeffs(1), coeffs(2)}, 4);
    CHECK(max_abs(Eigen::Map<const CMatrix>(vec_c.data(), 4, 4) - c) == 0.0);
}

TEST_CASE("MCM two-step solver reports coefficients and residuals")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    ImpairmentConfig imp;
    imp.coupling = {{std::polar(0.1, pi / 4), 0.02}};
    const auto [truth, rec] = synth_ground_truth(array, imp);
    const auto two = calibrate_mcm_twostep(truth, a, cb);
    const auto direct = calibrate_mcm_direct(truth, a, cb);
    REQUIRE(two.residual.size() == 11);
    for (std::size_t g = 0; g < 11; ++g)
    {
        CHECK(std::isfinite(two.residual[g]));
        CHECK(direct.residual[g] <= two.residual[g] + 1e-12);
    }
}

// The minimum-norm first step M = b w^H / |w|^2 is rank one and generally not of the
// form A^T C; the second-step projection therefore cannot return the injected
// coefficients. Kept as expected failures to document the limitation.
TEST_CASE("MCM two-step solver recovers zero coupling", "[!shouldfail]")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto [truth, rec] = synth_ground_truth(array, ImpairmentConfig{});
    const auto fit = calibrate_mcm_twostep(truth, a, cb);
    for (const auto &p : fit.coupling.pairs())
    {
        CHECK(std::abs(p.first) < 1e-8);
        CHECK(std::abs(p.second) < 1e-8);
    }
}

TEST_CASE("MCM two-step and direct solvers agree on coupling-only truth", "[!shouldfail]")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    ImpairmentConfig imp;
    imp.coupling = {{std::polar(0.1, pi / 4), 0.02}};
    const auto [truth, rec] = synth_ground_truth(array, imp);
    const auto two = calibrate_mcm_twostep(truth, a, cb);
    const auto direct = calibrate_mcm_direct(truth, a, cb);
    for (std::size_t g = 0; g < 11; ++g)
    {
        CHECK(std::abs(two.coupling[g].first - direct.coupling[g].first) < 1e-4);
        CHECK(std::abs(two.coupling[g].second - direct.coupling[g].second) < 1e-4);
    }
}

TEST_CASE("CI stage 1")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto ideal = eval_ideal(cb, a);

    const auto w1 = ci_stage_w(ideal, a, CorrectionCurve::identity(181));
    CHECK(max_abs(w1.columns() - cb.columns) < 1e-10);
    const auto w2 = ci_stage_w(ideal, a, CorrectionCurve(CVector::Constant(181, 2.0)));
    CHECK(max_abs(w2.columns() - w1.columns()) < 1e-12);

    const auto [truth, rec] = ci_truth();
    const auto w = ci_stage_w(truth, a, rec.correction);
    CHECK(relative_residual(truth, eval_ci(w, a, rec.correction)) < 1e-8);
    for (int g = 0; g < w.size(); ++g)
    {
        // Equal up to a unit-modulus scalar per column.
        const cplx s = w.columns().col(g).dot(rec.codebook.columns().col(g));
        CHECK_THAT(std::abs(s), WithinAbs(1.0, 1e-8));
    }

    CVector gamma = CVector::Ones(181);
    gamma(120) = 0.0;
    CHECK_THROWS_AS(CorrectionCurve(gamma), InvalidArgument);
}

TEST_CASE("constrained stage 1 minimizes under the unit-norm constraint")
{
    const auto [truth, rec] = ci_truth();
    const SteeringMatrix a(truth.grid(), 16);
    // Perturbed gains make normalization after LS sub-optimal.
    CVector g = rec.correction.gains();
    for (Eigen::Index t = 0; t < g.size(); ++t)
        g(t) *= 1.0 + 0.2 * std::sin(0.3 * static_cast<double>(t));
    const CorrectionCurve curve(g);
    const auto wn = ci_stage_w(truth, a, curve, Stage1Solver::normalized_ls);
    const auto wc = ci_stage_w(truth, a, curve, Stage1Solver::constrained_ls);
    const CMatrix m = g.asDiagonal() * a.matrix().transpose();
    for (int col = 0; col < wc.size(); ++col)
    {
        CHECK_THAT(wc.columns().col(col).norm(), WithinAbs(1.0, 1e-12));
        const double rc = (truth.values().col(col) - m * wc.columns().col(col)).norm();
        const double rn = (truth.values().col(col) - m * wn.columns().col(col)).norm();
        CHECK(rc <= rn + 1e-12);
    }
}

TEST_CASE("CI stage 2")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const PerturbedCodebook w(random_unit_columns(16, 11, 23));
    const auto exact = eval_nc(w, a);
    const auto g1 = ci_stage_gamma(exact, a, w);
    CHECK((g1.curve.gains().array() - cplx(1.0)).abs().maxCoeff() < 1e-12);
    CHECK(g1.degenerate.empty());

    CMatrix doubled = exact.values();
    doubled.row(70) *= 2.0;
    const auto g2 = ci_stage_gamma(BeamPatternSet(array.grid, doubled), a, w);
    for (Eigen::Index t = 0; t < 181; ++t)
        CHECK(std::abs(g2.curve.gains()(t) - cplx(t == 70 ? 2.0 : 1.0)) < 1e-12);

    const auto [truth, rec] = ci_truth();
    const auto g3 = ci_stage_gamma(truth, a, rec.codebook);
    CHECK((g3.curve.gains() - rec.correction.gains()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("CI stage 2 flags vanishing model rows")
{
    Codebook cb;
    cb.columns = CMatrix::Constant(2, 1, 1.0 / std::sqrt(2.0));
    cb.scan_angles = {0.0};
    const SteeringMatrix a(AngleGrid({0.0, 90.0}), 2);
    CMatrix values(2, 1);
    values << 1.0, 0.5;
    const auto fit = ci_stage_gamma(BeamPatternSet(a.grid(), values), a, PerturbedCodebook(cb.columns));
    REQUIRE(fit.degenerate.size() == 1);
    CHECK(fit.degenerate.front() == 1);
    CHECK(fit.curve.gains()(1) == cplx(1.0));
}

TEST_CASE("calibrate_ci reconstructs CI-family truth with monotone loss")
{
    const auto [truth, rec] = ci_truth();
    const SteeringMatrix a(truth.grid(), 16);
    for (auto solver : {Stage1Solver::normalized_ls, Stage1Solver::constrained_ls})
    {
        CiOptions opts;
        opts.stage1 = solver;
        const auto report = calibrate_ci(truth, a, opts);
        REQUIRE(report.codebook);
        REQUIRE(report.correction);
        CHECK(report.iterations <= 100);
        CHECK(relative_residual(truth, eval_ci(*report.codebook, a, *report.correction)) < 1e-6);
        for (std::size_t i = 1; i < report.loss_history.size(); ++i)
            CHECK(report.loss_history[i] <= report.loss_history[i - 1]);
        CHECK(std::isfinite(report.seconds));
    }
}

TEST_CASE("calibrate_ci on ideal patterns stops within two sweeps")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto report = calibrate_ci(eval_ideal(cb, a), a);
    CHECK(report.iterations <= 2);
    CHECK(report.converged);
    CHECK((report.correction->gains().array() - cplx(1.0)).abs().maxCoeff() < 1e-10);
    CHECK(max_abs(report.codebook->columns() - cb.columns) < 1e-10);
}

TEST_CASE("CI options validation")
{
    CiOptions o;
    o.max_iterations = 0;
    CHECK_THROWS_AS(o.validate(), InvalidArgument);
    o = {};
    o.tolerance = 0.0;
    CHECK_THROWS_AS(o.validate(), InvalidArgument);
}

TEST_CASE("run_all_models on impairment-free truth")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto truth = eval_ideal(cb, a);
    const auto w = window_weights(array.grid, -40, 40);
    const auto reports = run_all_models(truth, a, cb, w);
    REQUIRE(reports.size() == 4);
    CHECK(reports[0].model == ModelKind::ideal);
    CHECK(reports[1].model == ModelKind::mcm);
    CHECK(reports[2].model == ModelKind::nc);
    CHECK(reports[3].model == ModelKind::ci);
    for (const auto &r : reports)
    {
        CHECK(r.l1 < 1e-10);
        CHECK(std::isfinite(r.seconds));
        CHECK(r.seconds >= 0.0);
    }
}

TEST_CASE("model families nest on full-impairment truth")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto w = window_weights(array.grid, -40, 40);
    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        auto imp = ImpairmentConfig::standard();
        imp.seed = seed;
        const auto [truth, rec] = synth_ground_truth(array, imp);
        const auto reports = run_all_models(truth, a, cb, w);
        const double ideal = reports[0].l1, nc = reports[2].l1, ci = reports[3].l1;
        CHECK(ci < nc);
        CHECK(nc <= ideal);
        for (std::size_t i = 1; i < reports[3].loss_history.size(); ++i)
            CHECK(reports[3].loss_history[i] <= reports[3].loss_history[i - 1]);
    }
}

TEST_CASE("metric-weighted fitting only changes the fit, not the scoring")
{
    const auto array = standard_array();
    const SteeringMatrix a(array.grid, 16);
    const auto cb = array.codebook();
    const auto w = window_weights(array.grid, -40, 40);
    const auto [truth, rec] = synth_ground_truth(array, ImpairmentConfig::standard());
    const auto full = calibrate_model(ModelKind::mcm, truth, a, cb, w);
    const auto windowed = calibrate_model(ModelKind::mcm, truth, a, cb, w, {}, w);
    const double ideal = loss_l1(truth, eval_ideal(cb, a), w);
    // The windowed fit minimizes exactly the metric, and c = 0 is feasible.
    CHECK(windowed.l1 <= ideal);
    CHECK(windowed.l1 <= full.l1 + 1e-12);
}

TEST_CASE("calibration reports survive a JSON round trip")
{
    const auto [truth, rec] = ci_truth();
    const SteeringMatrix a(truth.grid(), 16);
    const auto cb = standard_array().codebook();
    const auto w = window_weights(truth.grid(), -40, 40);
    for (auto kind : {ModelKind::ideal, ModelKind::mcm, ModelKind::nc, ModelKind::ci})
    {
        const auto report = calibrate_model(kind, truth, a, cb, w);
        const auto back = report_from_json(nlohmann::json::parse(report_to_json(report).dump()));
        CHECK(back.model == kind);
        CHECK(back.l1 == report.l1);
        CHECK(back.loss_history == report.loss_history);
        CHECK(loss_l1(truth, evaluate_model(back, cb, a), w) == report.l1);
    }
    CHECK_THROWS_AS(model_kind_from_string("bogus"), InvalidArgument);
}

TEST_CASE("unit-norm least squares beats projected least squares")
{
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial)
    {
        CMatrix m(12, 4);
        CVector b(12);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = cplx(nd(rng), nd(rng));
        for (Eigen::Index i = 0; i < b.size(); ++i)
            b(i) = cplx(nd(rng), nd(rng)) * 3.0;
        const CVector wc = detail::unit_norm_least_squares(m, b);
        CVector wn = m.colPivHouseholderQr().solve(b);
        wn.normalize();
        CHECK_THAT(wc.norm(), WithinAbs(1.0, 1e-12));
        CHECK((b - m * wc).norm() <= (b - m * wn).norm() + 1e-12);
    }
}
