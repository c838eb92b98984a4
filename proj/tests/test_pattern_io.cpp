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

#include <filesystem>
#include <fstream>
#include <string>

#include <catch_amalgamated.hpp>

#include "risbeam/errors.hpp"
#include "risbeam/json_io.hpp"
#include "risbeam/pattern_io.hpp"
#include "risbeam/truth_forge.hpp"

using namespace risbeam;
namespace fs = std::filesystem;

namespace
{
    fs::path scratch_dir()
    {
        auto dir = fs::temp_directory_path() / "risbeam_pattern_io";
        fs::create_directories(dir);
        return dir;
    }

    fs::path write_case(const std::string &name, const std::string &csv, bool with_meta = true, int scans = 2)
    {
        const auto path = scratch_dir() / (name + ".csv");
        std::ofstream(path) << csv;
        if (with_meta)
        {
            PatternMetadata meta;
            meta.elements = 4;
            for (int g = 0; g < scans; ++g)
                meta.scan_angles_deg.push_back(10.0 * g);
            std::ofstream(metadata_path(path)) << metadata_to_json(meta).dump();
        }
        else
        {
            fs::remove(metadata_path(path));
        }
        return path;
    }

    std::size_t parse_error_line(const fs::path &path)
    {
        try
        {
            load_patterns(path);
        }
        catch (const ParseError &e)
        {
            return e.line();
        }
        FAIL("expected a ParseError for " << path);
        return 0;
    }
}

TEST_CASE("pattern files round-trip exactly")
{
    ArrayConfig array;
    for (int s = -50; s <= 50; s += 10)
        array.scan_angles_deg.push_back(s);
    const auto [set, truth] = synth_ground_truth(array, ImpairmentConfig::standard());
    const auto path = scratch_dir() / "roundtrip.csv";
    save_patterns(set, path);
    const auto back = load_patterns(path);
    CHECK(back.grid() == set.grid());
    CHECK(back.values() == set.values());
    CHECK(back.metadata() == set.metadata());
    CHECK((back.values() - set.values()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("sidecar path shares the basename")
{
    CHECK(metadata_path("dir/truth.csv") == fs::path("dir/truth.json"));
}

TEST_CASE("malformed pattern files name the offending line")
{
    const std::string header = "angle_deg,codeword,re,im\n";
    CHECK(parse_error_line(write_case("dup", header + "0,0,1,0\n0,1,1,0\n0,0,1,0\n0,1,1,0\n")) == 4);
    CHECK(parse_error_line(write_case("unsorted", header + "5,0,1,0\n5,1,1,0\n0,0,1,0\n0,1,1,0\n")) == 4);
    CHECK(parse_error_line(write_case("fields", header + "0,0,1\n")) == 2);
    CHECK(parse_error_line(write_case("number", header + "0,0,1,x\n")) == 2);
    CHECK(parse_error_line(write_case("header", "angle,codeword,re,im\n0,0,1,0\n")) == 1);
    CHECK(parse_error_line(write_case("inconsistent", header + "0,0,1,0\n0,1,1,0\n5,0,1,0\n10,0,1,0\n10,1,1,0\n")) > 0);
    CHECK(parse_error_line(write_case("codeword_order", header + "0,1,1,0\n0,0,1,0\n")) == 2);
}

TEST_CASE("header-only files and missing sidecars are rejected")
{
    const auto empty = write_case("empty", "angle_deg,codeword,re,im\n");
    CHECK_THROWS_AS(load_patterns(empty), ParseError);
    try
    {
        load_patterns(empty);
    }
    catch (const ParseError &e)
    {
        CHECK(std::string(e.what()).find("no data rows") != std::string::npos);
    }
    const auto nometa = write_case("nometa", "angle_deg,codeword,re,im\n0,0,1,0\n0,1,1,0\n", false);
    CHECK_THROWS_AS(load_patterns(nometa), ParseError);
    const auto mismatch = write_case("scan_mismatch", "angle_deg,codeword,re,im\n0,0,1,0\n0,1,1,0\n", true, 3);
    CHECK_THROWS_AS(load_patterns(mismatch), ParseError);
}

TEST_CASE("metadata JSON rejects unknown keys")
{
    nlohmann::json j = {{"elements", 16}, {"scan_angles_deg", {0.0}}, {"carrier_hz", 3e10}, {"phase_bits", 2}, {"extra", 1}};
    CHECK_THROWS_AS(metadata_from_json(j), InvalidArgument);
    j.erase("extra");
    const auto m = metadata_from_json(j);
    CHECK(m.elements == 16);
    CHECK(m.phase_bits == 2);
    j["phase_bits"] = nullptr;
    CHECK_FALSE(metadata_from_json(j).phase_bits.has_value());
}
