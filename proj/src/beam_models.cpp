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

#include "risbeam/beam_models.hpp"

#include <cmath>
#include <string>

#include "risbeam/errors.hpp"

namespace risbeam
{
    namespace
    {
        PatternMetadata metadata_of(const Codebook &codebook)
        {
            PatternMetadata meta;
            meta.elements = codebook.elements();
            meta.scan_angles_deg = codebook.scan_angles;
            meta.phase_bits = codebook.phase_bits;
            return meta;
        }

        void require_elements(int codebook_elements, const SteeringMatrix &steering)
        {
            if (codebook_elements != steering.elements())
                throw InvalidArgument("codebook has " + std::to_string(codebook_elements) +
                                      " elements but steering matrix has " + std::to_string(steering.elements()));
        }
    }

    BeamPatternSet::BeamPatternSet(AngleGrid grid, CMatrix values, PatternMetadata metadata)
        : grid_(std::move(grid)), values_(std::move(values)), metadata_(std::move(metadata))
    {
        if (static_cast<std::size_t>(values_.rows()) != grid_.size())
            throw InvalidArgument("pattern rows (" + std::to_string(values_.rows()) +
                                  ") do not match grid size (" + std::to_string(grid_.size()) + ")");
        if (values_.cols() < 1)
            throw InvalidArgument("pattern set needs at least one codeword");
        if (!values_.allFinite())
            throw InvalidArgument("pattern set contains non-finite values");
    }

    BeamPatternSet BeamPatternSet::subset(std::span<const std::size_t> indices) const
    {
        std::vector<double> angles;
        CMatrix rows(static_cast<Eigen::Index>(indices.size()), values_.cols());
        for (std::size_t i = 0; i < indices.size(); ++i)
        {
            if (indices[i] >= grid_.size())
                throw InvalidArgument("pattern subset index out of range");
            angles.push_back(grid_[indices[i]]);
            rows.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(indices[i]));
        }
        return BeamPatternSet(AngleGrid(std::move(angles)), std::move(rows), metadata_);
    }

    CouplingSet::CouplingSet(std::vector<CouplingPair> pairs) : pairs_(std::move(pairs))
    {
        for (std::size_t g = 0; g < pairs_.size(); ++g)
        {
            const auto &p = pairs_[g];
            if (!(std::abs(p.first) < 1.0) || !(std::abs(p.second) < 1.0))
                throw InvalidArgument("coupling coefficients of codeword " + std::to_string(g) +
                                      " must have magnitude below 1");
        }
    }

    CouplingSet CouplingSet::uniform(CouplingPair pair, int codewords)
    {
        return CouplingSet(std::vector<CouplingPair>(static_cast<std::size_t>(codewords), pair));
    }

    PerturbedCodebook::PerturbedCodebook(CMatrix columns, double norm_tol) : columns_(std::move(columns))
    {
        if (columns_.size() == 0)
            throw InvalidArgument("perturbed codebook is empty");
        for (Eigen::Index g = 0; g < columns_.cols(); ++g)
        {
            const double norm = columns_.col(g).norm();
            if (!(std::abs(norm - 1.0) <= norm_tol))
                throw InvalidArgument("perturbed codeword " + std::to_string(g) + " has norm " +
                                      std::to_string(norm) + ", expected 1");
        }
    }

    CMatrix PerturbedCodebook::perturbation(const Codebook &ideal) const
    {
        if (ideal.columns.rows() != columns_.rows() || ideal.columns.cols() != columns_.cols())
            throw InvalidArgument("ideal codebook shape does not match");
        return columns_.cwiseQuotient(ideal.columns);
    }

    CorrectionCurve::CorrectionCurve(CVector gains) : gains_(std::move(gains))
    {
        if (gains_.size() == 0)
            throw InvalidArgument("correction curve is empty");
        for (Eigen::Index t = 0; t < gains_.size(); ++t)
            if (!std::isfinite(gains_(t).real()) || !std::isfinite(gains_(t).imag()) || gains_(t) == cplx(0.0, 0.0))
                throw InvalidArgument("correction gain at index " + std::to_string(t) + " must be finite and non-zero");
    }

    CorrectionCurve CorrectionCurve::identity(std::size_t angles)
    {
        return CorrectionCurve(CVector::Ones(static_cast<Eigen::Index>(angles)));
    }

    CMatrix band_shift(int elements, int distance)
    {
        CMatrix s = CMatrix::Zero(elements, elements);
        for (int n = 0; n + distance < elements; ++n)
        {
            s(n, n + distance) = 1.0;
            s(n + distance, n) = 1.0;
        }
        return s;
    }

    CMatrix toeplitz_mcm(const CouplingPair &c, int elements)
    {
        if (elements < 3)
            throw InvalidArgument("mutual coupling matrix needs at least 3 elements");
        CMatrix m = CMatrix::Identity(elements, elements);
        for (int n = 0; n < elements; ++n)
        {
            if (n + 1 < elements)
                m(n, n + 1) = m(n + 1, n) = c.first;
            if (n + 2 < elements)
                m(n, n + 2) = m(n + 2, n) = c.second;
        }
        return m;
    }

    BeamPatternSet eval_ideal(const Codebook &codebook, const SteeringMatrix &steering)
    {
        require_elements(codebook.elements(), steering);
        return BeamPatternSet(steering.grid(), steering.matrix().transpose() * codebook.columns, metadata_of(codebook));
    }

    BeamPatternSet eval_mcm(const Codebook &codebook, const SteeringMatrix &steering, const CouplingSet &coupling)
    {
        require_elements(codebook.elements(), steering);
        if (coupling.size() != static_cast<std::size_t>(codebook.size()))
            throw InvalidArgument("coupling set has " + std::to_string(coupling.size()) + " codewords, codebook has " +
                                  std::to_string(codebook.size()));
        CMatrix coupled(codebook.elements(), codebook.size());
        for (int g = 0; g < codebook.size(); ++g)
            coupled.col(g) = toeplitz_mcm(coupling[static_cast<std::size_t>(g)], codebook.elements()) * codebook.columns.col(g);
        return BeamPatternSet(steering.grid(), steering.matrix().transpose() * coupled, metadata_of(codebook));
    }

    BeamPatternSet eval_nc(const PerturbedCodebook &codebook, const SteeringMatrix &steering)
    {
        require_elements(codebook.elements(), steering);
        PatternMetadata meta;
        meta.elements = codebook.elements();
        return BeamPatternSet(steering.grid(), steering.matrix().transpose() * codebook.columns(), std::move(meta));
    }

    BeamPatternSet eval_ci(const PerturbedCodebook &codebook, const SteeringMatrix &steering,
                           const CorrectionCurve &correction)
    {
        require_elements(codebook.elements(), steering);
        if (correction.size() != steering.angle_count())
            throw InvalidArgument("correction curve length does not match the angle grid");
        PatternMetadata meta;
        meta.elements = codebook.elements();
        CMatrix values = correction.gains().asDiagonal() * (steering.matrix().transpose() * codebook.columns());
        return BeamPatternSet(steering.grid(), std::move(values), std::move(meta));
    }

    std::vector<double> window_weights(const AngleGrid &grid, double start_deg, double stop_deg)
    {
        std::vector<double> w(grid.size(), 0.0);
        for (std::size_t t = 0; t < grid.size(); ++t)
            if (grid[t] >= start_deg - 1e-9 && grid[t] <= stop_deg + 1e-9)
                w[t] = 1.0;
        return w;
    }

    std::vector<double> boresight_weights(const AngleGrid &grid, double start_deg, double stop_deg, double boost)
    {
        if (boost < 0.0)
            throw InvalidArgument("boresight boost must be non-negative");
        auto w = window_weights(grid, start_deg, stop_deg);
        for (std::size_t t = 0; t < grid.size(); ++t)
        {
            const double c = std::cos(grid[t] * deg_to_rad);
            w[t] *= 1.0 + boost * c * c;
        }
        return w;
    }

    double loss_l1(const CMatrix &truth, const CMatrix &model, std::span<const double> weights)
    {
        if (truth.rows() != model.rows() || truth.cols() != model.cols())
            throw InvalidArgument("pattern shapes differ");
        if (weights.size() != static_cast<std::size_t>(truth.rows()))
            throw InvalidArgument("weight count does not match the angle count");
        double numerator = 0.0;
        double denominator = 0.0;
        for (std::size_t t = 0; t < weights.size(); ++t)
        {
            if (!(weights[t] >= 0.0))
                throw InvalidArgument("weights must be non-negative");
            if (weights[t] == 0.0)
                continue;
            const auto row = static_cast<Eigen::Index>(t);
            numerator += weights[t] * (truth.row(row) - model.row(row)).squaredNorm();
            denominator += weights[t];
        }
        if (!(denominator > 0.0))
            throw InvalidArgument("weights must not all be zero");
        return numerator / denominator;
    }

    double loss_l1(const BeamPatternSet &truth, const BeamPatternSet &model, std::span<const double> weights)
    {
        if (!(truth.grid() == model.grid()))
            throw InvalidArgument("pattern sets are sampled on different grids");
        if (truth.codeword_count() != model.codeword_count())
            throw InvalidArgument("pattern sets have different codeword counts");
        return loss_l1(truth.values(), model.values(), weights);
    }
}
