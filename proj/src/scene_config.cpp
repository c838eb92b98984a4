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

#include "risbeam/scene_config.hpp"

#include <initializer_list>
#include <string>

#include "risbeam/errors.hpp"
#include "risbeam/json_io.hpp"

namespace risbeam
{
    using nlohmann::json;

    namespace
    {
        void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
        {
            if (!j.is_object())
                throw InvalidArgument(where + " must be a JSON object");
            for (const auto &item : j.items())
            {
                bool ok = false;
                for (const char *a : allowed)
                    ok = ok || item.key() == a;
                if (!ok)
                    throw InvalidArgument("unknown key '" + item.key() + "' in " + where);
            }
        }

        template <class T>
        void read(const json &j, const char *key, T &target)
        {
            if (j.contains(key))
                target = j.at(key).get<T>();
        }

        Vec2 read_vec2(const json &j, const std::string &where)
        {
            if (!j.is_array() || j.size() != 2)
                throw InvalidArgument(where + " must be an [x, y] pair");
            return {j[0].get<double>(), j[1].get<double>()};
        }

        json vec2_json(const Vec2 &v)
        {
            return json::array({v.x(), v.y()});
        }

        std::vector<double> default_scans()
        {
            std::vector<double> s;
            for (int a = -50; a <= 50; a += 10)
                s.push_back(a);
            return s;
        }

        void parse_array(const json &j, SceneConfig &cfg)
        {
            check_keys(j, {"elements", "scan_angles_deg", "phase_bits", "carrier_hz", "grid"}, "array");
            read(j, "elements", cfg.array.elements);
            read(j, "scan_angles_deg", cfg.array.scan_angles_deg);
            if (j.contains("phase_bits"))
            {
                if (j.at("phase_bits").is_null())
                    cfg.array.phase_bits.reset();
                else
                    cfg.array.phase_bits = j.at("phase_bits").get<int>();
            }
            read(j, "carrier_hz", cfg.array.carrier_hz);
            if (j.contains("grid"))
            {
                const json &g = j.at("grid");
                check_keys(g, {"start_deg", "stop_deg", "step_deg"}, "array.grid");
                double start = -90.0, stop = 90.0, step = 1.0;
                read(g, "start_deg", start);
                read(g, "stop_deg", stop);
                read(g, "step_deg", step);
                cfg.array.grid = make_angle_grid(start, stop, step);
            }
        }

        void parse_impairments(const json &j, ImpairmentConfig &imp)
        {
            check_keys(j,
                       {"coupling", "amplitude_jitter_std", "phase_jitter_std_deg", "element_exponent", "ripple_std_db",
                        "ripple_phase_std_deg", "ripple_correlation_deg", "noise_std_rel"},
                       "impairments");
            if (j.contains("coupling"))
            {
                imp.coupling.clear();
                for (const auto &item : j.at("coupling"))
                {
                    check_keys(item, {"c1", "c2"}, "impairments.coupling entry");
                    CouplingPair p;
                    if (item.contains("c1"))
                        p.first = complex_from_json(item.at("c1"));
                    if (item.contains("c2"))
                        p.second = complex_from_json(item.at("c2"));
                    imp.coupling.push_back(p);
                }
            }
            read(j, "amplitude_jitter_std", imp.amplitude_jitter_std);
            read(j, "phase_jitter_std_deg", imp.phase_jitter_std_deg);
            read(j, "element_exponent", imp.element_exponent);
            read(j, "ripple_std_db", imp.ripple_std_db);
            read(j, "ripple_phase_std_deg", imp.ripple_phase_std_deg);
            read(j, "ripple_correlation_deg", imp.ripple_correlation_deg);
            read(j, "noise_std_rel", imp.noise_std_rel);
        }
    }

    SceneConfig::SceneConfig()
    {
        array.scan_angles_deg = default_scans();
    }

    std::vector<double> SceneConfig::metric_weights(const AngleGrid &grid) const
    {
        return boresight_boost > 0.0 ? boresight_weights(grid, metric_start_deg, metric_stop_deg, boresight_boost)
                                     : window_weights(grid, metric_start_deg, metric_stop_deg);
    }

    std::vector<double> SceneConfig::fit_weights(const AngleGrid &grid) const
    {
        if (fit == FitWeighting::full)
            return {};
        return metric_weights(grid);
    }

    void SceneConfig::validate() const
    {
        if (array.elements < 1)
            throw InvalidArgument("array.elements must be >= 1");
        if (array.scan_angles_deg.empty())
            throw InvalidArgument("array.scan_angles_deg must not be empty");
        impairments.validate();
        if (!(metric_start_deg <= metric_stop_deg))
            throw InvalidArgument("metric window is inverted");
        if (!(boresight_boost >= 0.0))
            throw InvalidArgument("metric.boresight_boost must be >= 0");
        ci.validate();
        signal.validate();
        if (signal.scan_count != static_cast<int>(array.scan_angles_deg.size()))
            throw InvalidArgument("signal scan count must equal the number of scan angles");
        geometry.validate();
        region.validate();
        pseudo_true.validate();
    }

    SceneConfig scene_config_from_json(const json &j)
    {
        check_keys(j,
                   {"seed", "array", "impairments", "metric", "fit", "ci", "signal", "scene", "region", "pseudo_true",
                    "jobs"},
                   "scene config");
        SceneConfig cfg;
        try
        {
            read(j, "seed", cfg.seed);
            if (j.contains("array"))
                parse_array(j.at("array"), cfg);
            if (j.contains("impairments"))
                parse_impairments(j.at("impairments"), cfg.impairments);
            if (j.contains("metric"))
            {
                const json &m = j.at("metric");
                check_keys(m, {"start_deg", "stop_deg", "boresight_boost"}, "metric");
                read(m, "start_deg", cfg.metric_start_deg);
                read(m, "stop_deg", cfg.metric_stop_deg);
                read(m, "boresight_boost", cfg.boresight_boost);
            }
            if (j.contains("fit"))
            {
                const json &f = j.at("fit");
                check_keys(f, {"weights"}, "fit");
                if (f.contains("weights"))
                {
                    const auto w = f.at("weights").get<std::string>();
                    if (w == "full")
                        cfg.fit = FitWeighting::full;
                    else if (w == "metric")
                        cfg.fit = FitWeighting::metric;
                    else
                        throw InvalidArgument("fit.weights must be 'full' or 'metric'");
                }
            }
            if (j.contains("ci"))
            {
                const json &c = j.at("ci");
                check_keys(c, {"max_iterations", "tolerance", "stage1", "extrapolate"}, "ci");
                read(c, "max_iterations", cfg.ci.max_iterations);
                read(c, "tolerance", cfg.ci.tolerance);
                read(c, "extrapolate", cfg.ci.extrapolate);
                if (c.contains("stage1"))
                {
                    const auto s = c.at("stage1").get<std::string>();
                    if (s == "normalized")
                        cfg.ci.stage1 = Stage1Solver::normalized_ls;
                    else if (s == "constrained")
                        cfg.ci.stage1 = Stage1Solver::constrained_ls;
                    else
                        throw InvalidArgument("ci.stage1 must be 'normalized' or 'constrained'");
                }
            }
            if (j.contains("signal"))
            {
                const json &s = j.at("signal");
                check_keys(s, {"bandwidth_hz", "subcarriers", "repeats", "noise_figure_db", "noise_variance_w"}, "signal");
                read(s, "bandwidth_hz", cfg.signal.bandwidth_hz);
                read(s, "subcarriers", cfg.signal.subcarriers);
                read(s, "repeats", cfg.signal.repeats);
                read(s, "noise_figure_db", cfg.signal.noise_figure_db);
                if (s.contains("noise_variance_w"))
                    cfg.signal.noise_variance_w = s.at("noise_variance_w").get<double>();
            }
            if (j.contains("scene"))
            {
                const json &s = j.at("scene");
                check_keys(s, {"bs", "ris", "ris_boresight"}, "scene");
                if (s.contains("bs"))
                    cfg.geometry.bs = read_vec2(s.at("bs"), "scene.bs");
                if (s.contains("ris"))
                    cfg.geometry.ris = read_vec2(s.at("ris"), "scene.ris");
                if (s.contains("ris_boresight"))
                    cfg.geometry.ris_boresight = read_vec2(s.at("ris_boresight"), "scene.ris_boresight");
            }
            if (j.contains("region"))
            {
                const json &r = j.at("region");
                check_keys(r, {"x_min", "x_max", "y_min", "y_max", "step"}, "region");
                read(r, "x_min", cfg.region.x_min);
                read(r, "x_max", cfg.region.x_max);
                read(r, "y_min", cfg.region.y_min);
                read(r, "y_max", cfg.region.y_max);
                read(r, "step", cfg.region.step);
            }
            if (j.contains("pseudo_true"))
            {
                const json &p = j.at("pseudo_true");
                check_keys(p, {"max_iterations", "tolerance"}, "pseudo_true");
                read(p, "max_iterations", cfg.pseudo_true.max_iterations);
                read(p, "tolerance", cfg.pseudo_true.tolerance);
            }
            read(j, "jobs", cfg.jobs);
        }
        catch (const json::exception &e)
        {
            throw InvalidArgument(std::string("scene config: ") + e.what());
        }
        cfg.impairments.seed = cfg.seed;
        cfg.signal.carrier_hz = cfg.array.carrier_hz;
        cfg.signal.scan_count = static_cast<int>(cfg.array.scan_angles_deg.size());
        cfg.validate();
        return cfg;
    }

    json scene_config_to_json(const SceneConfig &cfg)
    {
        json j;
        j["seed"] = cfg.seed;
        j["array"] = {{"elements", cfg.array.elements},
                      {"scan_angles_deg", cfg.array.scan_angles_deg},
                      {"phase_bits", cfg.array.phase_bits ? json(*cfg.array.phase_bits) : json(nullptr)},
                      {"carrier_hz", cfg.array.carrier_hz}};
        const auto &grid = cfg.array.grid;
        j["array"]["grid"] = {{"start_deg", grid.front()},
                              {"stop_deg", grid.back()},
                              {"step_deg", grid.size() > 1 ? (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1) : 1.0}};
        json coupling = json::array();
        for (const auto &p : cfg.impairments.coupling)
            coupling.push_back({{"c1", complex_to_json(p.first)}, {"c2", complex_to_json(p.second)}});
        const auto &imp = cfg.impairments;
        j["impairments"] = {{"coupling", coupling},
                            {"amplitude_jitter_std", imp.amplitude_jitter_std},
                            {"phase_jitter_std_deg", imp.phase_jitter_std_deg},
                            {"element_exponent", imp.element_exponent},
                            {"ripple_std_db", imp.ripple_std_db},
                            {"ripple_phase_std_deg", imp.ripple_phase_std_deg},
                            {"ripple_correlation_deg", imp.ripple_correlation_deg},
                            {"noise_std_rel", imp.noise_std_rel}};
        j["metric"] = {{"start_deg", cfg.metric_start_deg},
                       {"stop_deg", cfg.metric_stop_deg},
                       {"boresight_boost", cfg.boresight_boost}};
        j["fit"] = {{"weights", cfg.fit == FitWeighting::full ? "full" : "metric"}};
        j["ci"] = {{"max_iterations", cfg.ci.max_iterations},
                   {"tolerance", cfg.ci.tolerance},
                   {"stage1", cfg.ci.stage1 == Stage1Solver::normalized_ls ? "normalized" : "constrained"},
                   {"extrapolate", cfg.ci.extrapolate}};
        j["signal"] = {{"bandwidth_hz", cfg.signal.bandwidth_hz},
                       {"subcarriers", cfg.signal.subcarriers},
                       {"repeats", cfg.signal.repeats},
                       {"noise_figure_db", cfg.signal.noise_figure_db}};
        if (cfg.signal.noise_variance_w)
            j["signal"]["noise_variance_w"] = *cfg.signal.noise_variance_w;
        j["scene"] = {{"bs", vec2_json(cfg.geometry.bs)},
                      {"ris", vec2_json(cfg.geometry.ris)},
                      {"ris_boresight", vec2_json(cfg.geometry.ris_boresight)}};
        j["region"] = {{"x_min", cfg.region.x_min},
                       {"x_max", cfg.region.x_max},
                       {"y_min", cfg.region.y_min},
                       {"y_max", cfg.region.y_max},
                       {"step", cfg.region.step}};
        j["pseudo_true"] = {{"max_iterations", cfg.pseudo_true.max_iterations},
                            {"tolerance", cfg.pseudo_true.tolerance}};
        j["jobs"] = cfg.jobs;
        return j;
    }

    SceneConfig load_scene_config(const std::filesystem::path &path)
    {
        const json j = read_json_file(path);
        try
        {
            return scene_config_from_json(j);
        }
        catch (const InvalidArgument &e)
        {
            throw InvalidArgument(path.string() + ": " + e.what());
        }
    }
}
