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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace risbeam
{
    // Base of every error thrown by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Precondition violation: bad sizes, out-of-range angles, invalid options.
    class InvalidArgument : public Error
    {
    public:
        using Error::Error;
    };

    // A least-squares problem without a unique solution.
    class IllPosedError : public Error
    {
    public:
        using Error::Error;
    };

    // Geometrically impossible inputs (coincident points, infeasible delays).
    class GeometryError : public Error
    {
    public:
        using Error::Error;
    };

    // Beam lookup outside the angular range a pattern source covers.
    class ExtrapolationError : public Error
    {
    public:
        using Error::Error;
    };

    // Solver did not reach its stopping criterion.
    class ConvergenceError : public Error
    {
    public:
        using Error::Error;
    };

    // Malformed input file; line is 1-based, 0 when the problem is not tied to a line.
    class ParseError : public Error
    {
    public:
        ParseError(std::string source, std::size_t line, const std::string &what)
            : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
              source_(std::move(source)), line_(line) {}

        const std::string &source() const noexcept { return source_; }
        std::size_t line() const noexcept { return line_; }

    private:
        std::string source_;
        std::size_t line_;
    };
}
