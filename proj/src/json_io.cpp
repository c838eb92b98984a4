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

#include "risbeam/json_io.hpp"

#include <cmath>
#include <fstream>

#include "risbeam/errors.hpp"

namespace risbeam
{
    using nlohmann::json;

    json metadata_to_json(const PatternMetadata &metadata)
    {
        json j;
        j["elements"] = metadata.elements;
        j["scan_angles_deg"] = metadata.scan_angles_deg;
        j["carrier_hz"] = metadata.carrier_hz;
        j["phase_bits"] = metadata.phase_bits ? json(*metadata.phase_bits) : json(nullptr);
        return j;
    }

    PatternMetadata metadata_from_json(const json &j)
    {
        if (!j.is_object())
            throw InvalidArgument("metadata must be a JSON object");
        for (const auto &[key, value] : j.items())
        {
            (void)value;
            if (key != "elements" && key != "scan_angles_deg" && key != "carrier_hz" && key != "phase_bits")
                throw InvalidArgument("unknown metadata key '" + key + "'");
        }
        PatternMetadata m;
        m.elements = j.at("elements").get<int>();
        if (m.elements < 1)
            throw InvalidArgument("metadata elements must be >= 1");
        m.scan_angles_deg = j.at("scan_angles_deg").get<std::vector<double>>();
        m.carrier_hz = j.value("carrier_hz", 0.0);
        if (j.contains("phase_bits") && !j.at("phase_bits").is_null())
            m.phase_bits = j.at("phase_bits").get<int>();
        return m;
    }

    json complex_to_json(cplx z)
    {
        return json::array({z.real(), z.imag()});
    }

    cplx complex_from_json(const json &j)
    {
        if (!j.is_array() || j.size() != 2)
            throw InvalidArgument("complex value must be a [re, im] pair");
        return {j[0].get<double>(), j[1].get<double>()};
    }

    json vector_to_json(const CVector &v)
    {
        json out = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i)
            out.push_back(complex_to_json(v(i)));
        return out;
    }

    CVector vector_from_json(const json &j)
    {
        if (!j.is_array())
            throw InvalidArgument("complex vector must be an array");
        CVector v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i)
            v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
        return v;
    }

    json matrix_to_json(const CMatrix &m)
    {
        json out = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            out.push_back(vector_to_json(m.row(r).transpose()));
        return out;
    }

    CMatrix matrix_from_json(const json &j)
    {
        if (!j.is_array() || j.empty())
            throw InvalidArgument("complex matrix must be a non-empty array of rows");
        const auto cols = j[0].size();
        CMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < j.size(); ++r)
        {
            if (j[r].size() != cols)
                throw InvalidArgument("complex matrix rows have unequal lengths");
            m.row(static_cast<Eigen::Index>(r)) = vector_from_json(j[r]).transpose();
        }
        return m;
    }

    json coupling_to_json(const CouplingSet &coupling)
    {
        json out = json::array();
        for (const auto &p : coupling.pairs())
            out.push_back({{"c1", complex_to_json(p.first)}, {"c2", complex_to_json(p.second)}});
        return out;
    }

    CouplingSet coupling_from_json(const json &j)
    {
        std::vector<CouplingPair> pairs;
        for (const auto &item : j)
            pairs.push_back({complex_from_json(item.at("c1")), complex_from_json(item.at("c2"))});
        return CouplingSet(std::move(pairs));
    }

    json truth_to_json(const TruthRecord &truth, const AngleGrid &grid)
    {
        json j;
        j["seed"] = truth.seed;
        j["coupling"] = coupling_to_json(truth.coupling);
        j["codebook"] = matrix_to_json(truth.codebook.columns());
        j["correction"] = {{"angles_deg", grid.angles()}, {"gains", vector_to_json(truth.correction.gains())}};
        j["noise_std"] = truth.noise_std;
        j["noise_rms"] = truth.noise.size() ? truth.noise.norm() / std::sqrt(static_cast<double>(truth.noise.size())) : 0.0;
        return j;
    }

    json report_to_json(const CalibrationReport &report)
    {
        json j;
        j["model"] = to_string(report.model);
        if (report.coupling)
            j["coupling"] = coupling_to_json(*report.coupling);
        if (report.codebook)
            j["codebook"] = matrix_to_json(report.codebook->columns());
        if (report.correction)
            j["correction"] = {{"angles_deg", report.correction_angles_deg},
                               {"gains", vector_to_json(report.correction->gains())}};
        j["l1"] = report.l1;
        j["loss_history"] = report.loss_history;
        j["iterations"] = report.iterations;
        j["seconds"] = report.seconds;
        j["converged"] = report.converged;
        j["warnings"] = report.warnings;
        j["mcrb"] = nullptr; // misspecified CRB term, not computed
        return j;
    }

    CalibrationReport report_from_json(const json &j)
    {
        CalibrationReport r;
        r.model = model_kind_from_string(j.at("model").get<std::string>());
        if (j.contains("coupling"))
            r.coupling = coupling_from_json(j.at("coupling"));
        if (j.contains("codebook"))
            r.codebook = PerturbedCodebook(matrix_from_json(j.at("codebook")), 1e-8);
        if (j.contains("correction"))
        {
            const auto &c = j.at("correction");
            r.correction_angles_deg = c.at("angles_deg").get<std::vector<double>>();
            r.correction = CorrectionCurve(vector_from_json(c.at("gains")));
            if (r.correction->size() != r.correction_angles_deg.size())
                throw InvalidArgument("correction gains and angles differ in length");
        }
        r.l1 = j.value("l1", 0.0);
        r.loss_history = j.value("loss_history", std::vector<double>{});
        r.iterations = j.value("iterations", 0);
        r.seconds = j.value("seconds", 0.0);
        r.converged = j.value("converged", true);
        r.warnings = j.value("warnings", std::vector<std::string>{});
        return r;
    }

    std::vector<CalibrationReport> reports_from_json(const json &j)
    {
        std::vector<CalibrationReport> out;
        if (j.is_object() && j.contains("reports"))
        {
            for (const auto &item : j.at("reports"))
                out.push_back(report_from_json(item));
        }
        else
        {
            out.push_back(report_from_json(j));
        }
        return out;
    }

    json read_json_file(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error("cannot open '" + path.string() + "'");
        try
        {
            return json::parse(in);
        }
        catch (const json::exception &e)
        {
            throw ParseError(path.string(), 0, e.what());
        }
    }

    void write_json_file(const std::filesystem::path &path, const json &j)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error("cannot write '" + path.string() + "'");
        out << j.dump(2) << '\n';
        if (!out)
            throw Error("write failed for '" + path.string() + "'");
    }
}
