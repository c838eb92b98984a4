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
#include <filesystem>
#include <fstream>
#include <random>

#include <catch_amalgamated.hpp>

#include "risbeam/beam_source.hpp"
#include "risbeam/calibrators.hpp"
#include "risbeam/errors.hpp"
#include "risbeam/mismatch.hpp"
#include "risbeam/truth_forge.hpp"

using namespace risbeam;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    ArrayConfig standard_array()
    {
        ArrayConfig a;
        for (int s = -50; s <= 50; s += 10)
            a.scan_angles_deg.push_back(s);
        return a;
    }

    SignalConfig small_signal()
    {
        SignalConfig s;
        s.subcarriers = 32;
        s.repeats = 4;
        return s;
    }

    const BeamPatternSet &forged_truth()
    {
        static const BeamPatternSet truth = synth_ground_truth(standard_array(), ImpairmentConfig::standard()).first;
        return truth;
    }

    class ScaledSource final : public BeamSource
    {
    public:
        ScaledSource(const BeamSource &inner, cplx scale) : inner_(inner), scale_(scale) {}
        int codeword_count() const override { return inner_.codeword_count(); }
        double min_angle_deg() const override { return inner_.min_angle_deg(); }
        double max_angle_deg() const override { return inner_.max_angle_deg(); }
        CVector response(double phi_deg) const override { return scale_ * inner_.response(phi_deg); }

    private:
        const BeamSource &inner_;
        cplx scale_;
    };

    Vec2 random_scene_point(std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(-4.0, 6.0);
        for (;;)
        {
            const Vec2 s(ux(rng), uy(rng));
            if (s.norm() > 0.1 && (s - Vec2(0.0, 6.0)).norm() > 0.1)
                return s;
        }
    }
}

TEST_CASE("pseudo-true fit with matched sources is the true state")
{
    const PatternTableSource truth(forged_truth());
    const SceneGeometry geo;
    const auto sig = small_signal();
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i)
    {
        const Vec2 s = random_scene_point(rng);
        const auto fit = pseudo_true(truth, truth, s, geo, sig);
        CHECK(std::abs(fit.eta0.tau_l - fit.eta_true.tau_l) < 1e-15);
        CHECK(std::abs(fit.eta0.tau_r - fit.eta_true.tau_r) < 1e-15);
        CHECK(std::abs(fit.eta0.phi_deg - fit.eta_true.phi_deg) < 1e-9);
        CHECK(fit.relative_change < 1e-12);
        CHECK(fit.converged);
        CHECK(alb(s, truth, truth, geo, sig).alb < 1e-6);
    }
}

TEST_CASE("pseudo-true residual never exceeds the residual at the truth")
{
    const auto cb = standard_array().codebook();
    const PatternTableSource truth(forged_truth());
    const auto ideal = ideal_source(cb);
    const SceneGeometry geo;
    const auto sig = small_signal();
    for (const Vec2 &s : {Vec2(3.0, 2.0), Vec2(-4.0, -3.0), Vec2(1.0, 5.0)})
    {
        const auto fit = pseudo_true(truth, *ideal, s, geo, sig);
        CHECK(fit.residual <= fit.initial_residual);
        CHECK(fit.initial_residual > 0.0);
        CHECK(fit.iterations <= 500);
    }
    // Mismatch actually moves the angle.
    const auto fit = pseudo_true(truth, *ideal, Vec2(3.0, 2.0), geo, sig);
    CHECK(fit.eta0.phi_deg != fit.eta_true.phi_deg);
}

TEST_CASE("locate inverts geo_params")
{
    const SceneGeometry geo;
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i)
    {
        const Vec2 s = random_scene_point(rng);
        const auto p = geo_params(s, geo);
        worst = std::max(worst, (locate(p.tau_l, p.tau_r, p.phi_deg, geo) - s).norm());
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("locate is stable against a 1 ns delay error")
{
    const SceneGeometry geo;
    const Vec2 s(3.0, 2.0);
    const auto p = geo_params(s, geo);
    const Vec2 moved = locate(p.tau_l + 1e-9, p.tau_r, p.phi_deg, geo);
    CHECK((moved - s).norm() < 0.5);
    CHECK((moved - s).norm() > 0.0);
}

TEST_CASE("locate rejects infeasible delays")
{
    const SceneGeometry geo;
    CHECK_THROWS_AS(locate(1e-8, 5.0 / speed_of_light, 0.0, geo), GeometryError);
    CHECK_THROWS_AS(locate(-1e-9, 11.0 / speed_of_light, 0.0, geo), GeometryError);
}

TEST_CASE("ALB is invariant to global complex scaling")
{
    const auto cb = standard_array().codebook();
    const PatternTableSource truth(forged_truth());
    const auto ideal = ideal_source(cb);
    const SceneGeometry geo;
    const auto sig = small_signal();
    const Vec2 s(-2.0, 1.0);
    const double base = alb(s, truth, *ideal, geo, sig).alb;
    REQUIRE(base > 1e-5);
    const cplx k = std::polar(3.7, 1.1);
    // Scaled pilots scale the true and the model signal alike.
    auto scaled = sig;
    scaled.pilots = CMatrix::Constant(sig.schedule_length(), sig.subcarriers, k);
    // The delay/angle valley is flat enough that the fitted state is resolved to ~1e-8 m.
    CHECK_THAT(alb(s, truth, *ideal, geo, scaled).alb, WithinAbs(base, 1e-7));
    // A scaled model beam is absorbed by the RIS gain.
    const ScaledSource sm(*ideal, k);
    CHECK_THAT(alb(s, truth, sm, geo, sig).alb, WithinAbs(base, 1e-7));
}

TEST_CASE("CI-calibrated model beats the ideal model at [3, 2]")
{
    const auto array = standard_array();
    const auto cb = array.codebook();
    const auto &truth = forged_truth();
    const SteeringMatrix a(truth.grid(), 16);
    const auto report = calibrate_model(ModelKind::ci, truth, a, cb, window_weights(truth.grid(), -40, 40));
    const PatternTableSource truth_src(truth);
    const auto ci = model_source(report, cb);
    const auto ideal = ideal_source(cb);
    const SceneGeometry geo;
    const SignalConfig sig;
    const double a_ci = alb(Vec2(3.0, 2.0), truth_src, *ci, geo, sig).alb;
    const double a_ideal = alb(Vec2(3.0, 2.0), truth_src, *ideal, geo, sig).alb;
    CHECK(a_ci < a_ideal);
}

TEST_CASE("empirical CDF")
{
    const std::vector<double> v{1, 2, 3, 4};
    const std::vector<double> q{0.5, 2.5, 4.0, 9.0};
    const auto c = cdf(v, q);
    REQUIRE(c.size() == 4);
    CHECK(c[0].second == 0.0);
    CHECK(c[1].second == 0.5);
    CHECK(c[2].second == 1.0);
    CHECK(c[3].second == 1.0);
    CHECK(c[1].first == 2.5);

    std::mt19937_64 rng(3);
    std::exponential_distribution<double> ex;
    std::vector<double> vals(200), th(50);
    for (auto &x : vals)
        x = ex(rng);
    for (std::size_t i = 0; i < th.size(); ++i)
        th[i] = 0.1 * static_cast<double>(i);
    const auto curve = cdf(vals, th);
    for (std::size_t i = 0; i < curve.size(); ++i)
    {
        CHECK(curve[i].second >= 0.0);
        CHECK(curve[i].second <= 1.0);
        if (i > 0)
            CHECK(curve[i].second >= curve[i - 1].second);
    }
    CHECK_THROWS_AS(cdf(std::vector<double>{}, q), InvalidArgument);
    CHECK_THROWS_AS(cdf(std::vector<double>{1.0, NAN}, q), InvalidArgument);
}

TEST_CASE("scene region grid arithmetic")
{
    const SceneRegion def;
    CHECK(def.nx() == 41);
    CHECK(def.ny() == 41);
    SceneRegion acc{-5.0, 5.0, -4.0, 6.0, 0.5};
    CHECK(acc.nx() * acc.ny() == 441);
    SceneRegion bad = def;
    bad.step = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("ALB grid flags degenerate cells and is thread-count independent")
{
    const PatternTableSource truth(forged_truth());
    const auto ideal = ideal_source(standard_array().codebook());
    const SceneGeometry geo;
    const auto sig = small_signal();
    const SceneRegion region{-4.0, 4.0, -2.0, 6.0, 2.0};

    const auto one = alb_grid(region, truth, *ideal, geo, sig, 1);
    const auto many = alb_grid(region, truth, *ideal, geo, sig, 4);
    REQUIRE(one.cells.size() == 25);
    REQUIRE(many.cells.size() == 25);
    int invalid = 0;
    for (std::size_t i = 0; i < one.cells.size(); ++i)
    {
        const auto &c = one.cells[i];
        CHECK(c.x == many.cells[i].x);
        CHECK(c.y == many.cells[i].y);
        CHECK(c.valid == many.cells[i].valid);
        if (c.valid)
        {
            CHECK(c.alb >= 0.0);
            CHECK(c.alb == many.cells[i].alb);
            CHECK(c.status.empty());
        }
        else
        {
            ++invalid;
            CHECK(std::isnan(c.alb));
            CHECK_FALSE(c.status.empty());
            CHECK(c.x == 0.0);
            CHECK((c.y == 0.0 || c.y == 6.0));
        }
    }
    CHECK(invalid == 2);
    CHECK(one.valid_values().size() == 23);
    // y outer, x inner.
    CHECK(one.cells[1].x == -2.0);
    CHECK(one.cells[1].y == -2.0);
    CHECK(one.cells[5].y == 0.0);
}

TEST_CASE("matched ALB grid is near zero everywhere")
{
    const PatternTableSource truth(forged_truth());
    const SceneRegion region{-4.0, 4.0, -2.0, 6.0, 2.0};
    const auto grid = alb_grid(region, truth, truth, SceneGeometry{}, small_signal(), 2);
    for (double v : grid.valid_values())
        CHECK(v < 1e-6);
}

TEST_CASE("ALB and CDF CSV files")
{
    const auto dir = std::filesystem::temp_directory_path() / "risbeam_test_mismatch";
    std::filesystem::create_directories(dir);
    AlbGrid g;
    g.region = SceneRegion{0.0, 1.0, 0.0, 0.0, 1.0};
    AlbCell a;
    a.x = 0.0;
    a.valid = false;
    a.alb = NAN;
    a.status = "UE coincides with the BS";
    AlbCell b;
    b.x = 1.0;
    b.valid = true;
    b.alb = 0.1 + 0.2;
    g.cells = {a, b};
    write_alb_csv(g, dir / "alb.csv");
    const auto values = read_alb_values(dir / "alb.csv");
    REQUIRE(values.size() == 1);
    CHECK(values[0] == 0.1 + 0.2);

    write_cdf_csv({{0.5, 0.25}, {1.0, 1.0}}, dir / "cdf.csv");
    std::ifstream in(dir / "cdf.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "threshold_m,fraction");

    std::ofstream bad(dir / "bad.csv");
    bad << "x_m,y_m,alb_m,valid\n0,0,1\n";
    bad.close();
    try
    {
        read_alb_values(dir / "bad.csv");
        FAIL("malformed ALB CSV accepted");
    }
    catch (const ParseError &e)
    {
        CHECK(e.line() == 2);
    }
    std::filesystem::remove_all(dir);
}
