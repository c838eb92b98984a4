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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "risbeam/commands.hpp"
#include "risbeam/errors.hpp"

namespace
{
    struct Common
    {
        std::string config;
        std::uint64_t seed = 0;
        unsigned jobs = 1;
        std::string out;
        CLI::Option *seed_opt = nullptr;
        CLI::Option *jobs_opt = nullptr;
    };

    CLI::App *add_common(CLI::App &app, const std::string &name, const std::string &help, Common &c, bool out_required)
    {
        auto *sub = app.add_subcommand(name, help);
        sub->add_option("--config", c.config, "Scene config JSON (default: $RISBEAM_CONFIG, else built-in defaults)");
        c.seed_opt = sub->add_option("--seed", c.seed, "RNG seed override");
        c.jobs_opt = sub->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)");
        auto *out = sub->add_option("--out", c.out, "Output path");
        if (out_required)
            out->required();
        return sub;
    }

    risbeam::SceneConfig config_of(const Common &c)
    {
        std::optional<std::filesystem::path> path;
        if (!c.config.empty())
            path = c.config;
        std::optional<std::uint64_t> seed;
        if (c.seed_opt && c.seed_opt->count())
            seed = c.seed;
        std::optional<unsigned> jobs;
        if (c.jobs_opt && c.jobs_opt->count())
            jobs = c.jobs;
        return risbeam::resolve_config(path, seed, jobs);
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"risbeam: RIS beam pattern calibration and model-mismatch analysis"};
    app.require_subcommand(1);

    Common synth_c, cal_c, eval_c, alb_c, cdf_c;
    std::string patterns, model = "all", report, alb_model = "ideal", alb_csv;
    double step = 0.0;

    auto *synth = add_common(app, "synth", "Forge a ground-truth pattern set", synth_c, true);

    auto *cal = add_common(app, "calibrate", "Fit beam models to a pattern set", cal_c, true);
    cal->add_option("--patterns", patterns, "Pattern CSV")->required();
    cal->add_option("--model", model, "ideal | mcm | mcm-twostep | nc | ci | all")->capture_default_str();

    auto *eval = add_common(app, "eval", "Score calibration reports with the L1 metric", eval_c, false);
    eval->add_option("--patterns", patterns, "Pattern CSV")->required();
    eval->add_option("--report", report, "Calibration report JSON (default: ideal model only)");

    auto *albm = add_common(app, "alb-map", "ALB over the scene grid", alb_c, true);
    albm->add_option("--patterns", patterns, "Ground-truth pattern CSV")->required();
    albm->add_option("--report", report, "Calibration report JSON");
    albm->add_option("--model", alb_model, "truth | ideal | mcm | mcm-twostep | nc | ci")->capture_default_str();

    auto *cdfc = add_common(app, "cdf", "Empirical CDF of an ALB map", cdf_c, true);
    cdfc->add_option("--alb", alb_csv, "ALB CSV from alb-map")->required();
    auto *step_opt = cdfc->add_option("--step", step, "Uniform threshold spacing in meters");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (synth->parsed())
        {
            risbeam::cmd_synth(config_of(synth_c), synth_c.out, std::cerr);
        }
        else if (cal->parsed())
        {
            risbeam::cmd_calibrate(config_of(cal_c), patterns, model, cal_c.out, std::cerr);
        }
        else if (eval->parsed())
        {
            std::optional<std::filesystem::path> rep, out;
            if (!report.empty())
                rep = report;
            if (!eval_c.out.empty())
                out = eval_c.out;
            risbeam::cmd_eval(config_of(eval_c), patterns, rep, out, std::cout);
        }
        else if (albm->parsed())
        {
            std::optional<std::filesystem::path> rep;
            if (!report.empty())
                rep = report;
            risbeam::cmd_alb_map(config_of(alb_c), patterns, rep, alb_model, alb_c.out, std::cerr);
        }
        else if (cdfc->parsed())
        {
            std::optional<double> s;
            if (step_opt->count())
                s = step;
            risbeam::cmd_cdf(alb_csv, cdf_c.out, s, std::cerr);
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
