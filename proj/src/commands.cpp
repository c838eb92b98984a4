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

#include "risbeam/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "risbeam/errors.hpp"
#include "risbeam/json_io.hpp"
#include "risbeam/pattern_io.hpp"
#include "risbeam/text_format.hpp"

namespace risbeam
{
    namespace
    {
        BeamPatternSet load_truth(const std::filesystem::path &patterns)
        {
            if (!std::filesystem::exists(patterns))
                throw Error("pattern file '" + patterns.string() + "' does not exist");
            return load_patterns(patterns);
        }

        Codebook codebook_of(const BeamPatternSet &set)
        {
            const auto &meta = set.metadata();
            if (meta.scan_angles_deg.empty())
                throw InvalidArgument("pattern metadata lists no scan angles");
            return build_codebook(meta.scan_angles_deg, meta.elements, meta.phase_bits);
        }

        std::vector<CalibrationReport> load_reports(const std::filesystem::path &path)
        {
            if (!std::filesystem::exists(path))
                throw Error("report file '" + path.string() + "' does not exist");
            return reports_from_json(read_json_file(path));
        }

        double median(std::vector<double> v)
        {
            if (v.empty())
                return std::nan("");
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }
    }

    SceneConfig resolve_config(const std::optional<std::filesystem::path> &config_path,
                               std::optional<std::uint64_t> seed, std::optional<unsigned> jobs)
    {
        SceneConfig cfg;
        if (config_path)
        {
            cfg = load_scene_config(*config_path);
        }
        else if (const char *env = std::getenv(config_env_var); env && *env)
        {
            cfg = load_scene_config(env);
        }
        if (seed)
        {
            cfg.seed = *seed;
            cfg.impairments.seed = *seed;
        }
        if (jobs)
            cfg.jobs = *jobs;
        return cfg;
    }

    std::filesystem::path truth_path(const std::filesystem::path &csv_path)
    {
        auto p = csv_path;
        p.replace_extension(".truth.json");
        return p;
    }

    void cmd_synth(const SceneConfig &config, const std::filesystem::path &out, std::ostream &log)
    {
        auto [set, truth] = synth_ground_truth(config.array, config.impairments);
        save_patterns(set, out);
        nlohmann::json j;
        j["truth"] = truth_to_json(truth, set.grid());
        j["config"] = scene_config_to_json(config);
        write_json_file(truth_path(out), j);
        log << "wrote " << out.string() << " (" << set.angle_count() << " angles x " << set.codeword_count()
            << " codewords), " << metadata_path(out).string() << ", " << truth_path(out).string() << '\n';
    }

    void cmd_calibrate(const SceneConfig &config, const std::filesystem::path &patterns, const std::string &model,
                       const std::filesystem::path &out, std::ostream &log)
    {
        const auto truth = load_truth(patterns);
        const auto codebook = codebook_of(truth);
        const SteeringMatrix steering(truth.grid(), codebook.elements());
        const auto metric = config.metric_weights(truth.grid());
        const auto fit = config.fit_weights(truth.grid());

        std::vector<CalibrationReport> reports;
        if (model == "all")
            reports = run_all_models(truth, steering, codebook, metric, config.ci, fit);
        else
            reports.push_back(calibrate_model(model_kind_from_string(model), truth, steering, codebook, metric,
                                              config.ci, fit));

        nlohmann::json j;
        if (model == "all")
        {
            j["reports"] = nlohmann::json::array();
            for (const auto &r : reports)
                j["reports"].push_back(report_to_json(r));
        }
        else
        {
            j = report_to_json(reports.front());
        }
        write_json_file(out, j);
        for (const auto &r : reports)
        {
            log << to_string(r.model) << ": L1 = " << format_double(r.l1) << ", iterations " << r.iterations << '\n';
            for (const auto &w : r.warnings)
                log << "  warning: " << w << '\n';
        }
        log << "wrote " << out.string() << '\n';
    }

    void cmd_eval(const SceneConfig &config, const std::filesystem::path &patterns,
                  const std::optional<std::filesystem::path> &report, const std::optional<std::filesystem::path> &out,
                  std::ostream &log)
    {
        const auto truth = load_truth(patterns);
        const auto codebook = codebook_of(truth);
        const SteeringMatrix steering(truth.grid(), codebook.elements());
        const auto metric = config.metric_weights(truth.grid());

        std::vector<CalibrationReport> reports;
        if (report)
            reports = load_reports(*report);
        else
            reports.push_back(CalibrationReport{});

        nlohmann::json j = nlohmann::json::array();
        for (const auto &r : reports)
        {
            const double l1 = loss_l1(truth, evaluate_model(r, codebook, steering), metric);
            j.push_back({{"model", to_string(r.model)}, {"l1", l1}});
            log << to_string(r.model) << ": L1 = " << format_double(l1) << '\n';
        }
        if (out)
        {
            write_json_file(*out, j);
            log << "wrote " << out->string() << '\n';
        }
    }

    void cmd_alb_map(const SceneConfig &config, const std::filesystem::path &patterns,
                     const std::optional<std::filesystem::path> &report, const std::string &model,
                     const std::filesystem::path &out, std::ostream &log)
    {
        const auto truth = load_truth(patterns);
        const auto codebook = codebook_of(truth);
        SignalConfig signal = config.signal;
        signal.scan_count = truth.codeword_count();
        signal.carrier_hz = truth.metadata().carrier_hz > 0.0 ? truth.metadata().carrier_hz : signal.carrier_hz;

        const PatternTableSource truth_source(truth);
        std::unique_ptr<BeamSource> model_src;
        if (model == "truth")
        {
            model_src = std::make_unique<PatternTableSource>(truth);
        }
        else if (model == "ideal")
        {
            model_src = ideal_source(codebook);
        }
        else
        {
            if (!report)
                throw InvalidArgument("model '" + model + "' needs --report");
            const auto kind = model_kind_from_string(model);
            const auto reports = load_reports(*report);
            auto it = std::find_if(reports.begin(), reports.end(), [&](const auto &r) { return r.model == kind; });
            if (it == reports.end())
                throw InvalidArgument("report '" + report->string() + "' has no '" + model + "' model");
            model_src = model_source(*it, codebook);
        }

        const auto grid = alb_grid(config.region, truth_source, *model_src, config.geometry, signal, config.jobs,
                                   config.pseudo_true);
        write_alb_csv(grid, out);
        const auto values = grid.valid_values();
        const std::size_t invalid = grid.cells.size() - values.size();
        log << "model " << model << ": " << grid.cells.size() << " cells, " << invalid << " invalid, median ALB "
            << format_double(median(values)) << " m\n";
        for (const auto &c : grid.cells)
            if (!c.valid)
                log << "  cell (" << format_double(c.x) << ", " << format_double(c.y) << "): " << c.status << '\n';
        log << "wrote " << out.string() << '\n';
    }

    void cmd_cdf(const std::filesystem::path &alb_csv, const std::filesystem::path &out, std::optional<double> step,
                 std::ostream &log)
    {
        const auto values = read_alb_values(alb_csv);
        if (values.empty())
            throw InvalidArgument("'" + alb_csv.string() + "' has no valid ALB cells");
        std::vector<double> thresholds;
        double vmax = *std::max_element(values.begin(), values.end());
        if (step)
        {
            if (!(*step > 0.0))
                throw InvalidArgument("CDF step must be positive");
            const auto n = static_cast<std::size_t>(std::ceil(vmax / *step - 1e-12));
            for (std::size_t i = 0; i <= n; ++i)
                thresholds.push_back(static_cast<double>(i) * *step);
        }
        else
        {
            thresholds = values;
            std::sort(thresholds.begin(), thresholds.end());
            thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
        }
        write_cdf_csv(cdf(values, thresholds), out);
        log << "wrote " << out.string() << " (" << thresholds.size() << " thresholds from " << values.size()
            << " cells)\n";
    }
}
