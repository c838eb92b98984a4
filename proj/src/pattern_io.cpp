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

#include "risbeam/pattern_io.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "risbeam/errors.hpp"
#include "risbeam/json_io.hpp"
#include "risbeam/text_format.hpp"

namespace risbeam
{
    namespace
    {
        constexpr const char *header = "angle_deg,codeword,re,im";

        std::vector<std::string> split_fields(const std::string &line)
        {
            std::vector<std::string> fields;
            std::string field;
            std::istringstream in(line);
            while (std::getline(in, field, ','))
                fields.push_back(field);
            if (!line.empty() && line.back() == ',')
                fields.emplace_back();
            return fields;
        }
    }

    std::filesystem::path metadata_path(const std::filesystem::path &csv_path)
    {
        auto p = csv_path;
        p.replace_extension(".json");
        return p;
    }

    void save_patterns(const BeamPatternSet &set, const std::filesystem::path &csv_path)
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out)
            throw Error("cannot write " + csv_path.string());
        out << header << '\n';
        const auto &values = set.values();
        for (std::size_t t = 0; t < set.angle_count(); ++t)
            for (int g = 0; g < set.codeword_count(); ++g)
            {
                const cplx v = values(static_cast<Eigen::Index>(t), g);
                out << format_double(set.grid()[t]) << ',' << g << ',' << format_double(v.real()) << ','
                    << format_double(v.imag()) << '\n';
            }
        if (!out)
            throw Error("failed while writing " + csv_path.string());

        const auto meta_path = metadata_path(csv_path);
        std::ofstream meta(meta_path, std::ios::binary);
        if (!meta)
            throw Error("cannot write " + meta_path.string());
        meta << metadata_to_json(set.metadata()).dump(2) << '\n';
    }

    BeamPatternSet load_patterns(const std::filesystem::path &csv_path)
    {
        const std::string source = csv_path.string();
        std::ifstream in(csv_path, std::ios::binary);
        if (!in)
            throw ParseError(source, 0, "cannot open pattern file");

        std::string line;
        std::size_t line_no = 0;
        if (!std::getline(in, line))
            throw ParseError(source, 1, "missing header");
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line != header)
            throw ParseError(source, line_no, std::string("expected header '") + header + "'");

        std::vector<double> angles;
        std::vector<std::vector<cplx>> rows;
        int codewords = -1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            const auto fields = split_fields(line);
            if (fields.size() != 4)
                throw ParseError(source, line_no, "expected 4 fields, found " + std::to_string(fields.size()));
            double angle = 0.0;
            long long g = 0;
            double re = 0.0;
            double im = 0.0;
            try
            {
                angle = parse_double(fields[0]);
                g = parse_integer(fields[1]);
                re = parse_double(fields[2]);
                im = parse_double(fields[3]);
            }
            catch (const InvalidArgument &e)
            {
                throw ParseError(source, line_no, e.what());
            }
            if (!std::isfinite(angle) || !std::isfinite(re) || !std::isfinite(im))
                throw ParseError(source, line_no, "non-finite value");

            if (g == 0)
            {
                if (!rows.empty())
                {
                    if (codewords < 0)
                        codewords = static_cast<int>(rows.back().size());
                    else if (static_cast<int>(rows.back().size()) != codewords)
                        throw ParseError(source, line_no - 1, "angle block has " + std::to_string(rows.back().size()) +
                                                                  " codewords, expected " + std::to_string(codewords));
                    if (!(angle > angles.back()))
                        throw ParseError(source, line_no, "angles must be strictly increasing (duplicate or unsorted angle " +
                                                              fields[0] + ")");
                }
                angles.push_back(angle);
                rows.emplace_back();
            }
            else
            {
                if (rows.empty() || g != static_cast<long long>(rows.back().size()))
                    throw ParseError(source, line_no, "codeword index " + std::to_string(g) + " out of order");
                if (angle != angles.back())
                    throw ParseError(source, line_no, "angle changes inside a codeword block");
                if (codewords >= 0 && g >= codewords)
                    throw ParseError(source, line_no, "codeword index " + std::to_string(g) + " exceeds count " +
                                                          std::to_string(codewords));
            }
            rows.back().emplace_back(re, im);
        }
        if (rows.empty())
            throw ParseError(source, line_no, "pattern file has no data rows");
        if (codewords < 0)
            codewords = static_cast<int>(rows.back().size());
        else if (static_cast<int>(rows.back().size()) != codewords)
            throw ParseError(source, line_no, "last angle block has " + std::to_string(rows.back().size()) +
                                                  " codewords, expected " + std::to_string(codewords));

        CMatrix values(static_cast<Eigen::Index>(rows.size()), codewords);
        for (std::size_t t = 0; t < rows.size(); ++t)
            for (int g = 0; g < codewords; ++g)
                values(static_cast<Eigen::Index>(t), g) = rows[t][static_cast<std::size_t>(g)];

        const auto meta_path = metadata_path(csv_path);
        std::ifstream meta_in(meta_path, std::ios::binary);
        if (!meta_in)
            throw ParseError(meta_path.string(), 0, "cannot open metadata sidecar");
        PatternMetadata metadata;
        try
        {
            metadata = metadata_from_json(nlohmann::json::parse(meta_in));
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ParseError(meta_path.string(), 0, e.what());
        }
        if (!metadata.scan_angles_deg.empty() && static_cast<int>(metadata.scan_angles_deg.size()) != codewords)
            throw ParseError(meta_path.string(), 0, "metadata lists " + std::to_string(metadata.scan_angles_deg.size()) +
                                                        " scan angles but the file has " + std::to_string(codewords) + " codewords");

        try
        {
            return BeamPatternSet(AngleGrid(std::move(angles)), std::move(values), std::move(metadata));
        }
        catch (const InvalidArgument &e)
        {
            throw ParseError(source, 0, e.what());
        }
    }
}
