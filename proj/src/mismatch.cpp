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

#include "risbeam/mismatch.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "risbeam/errors.hpp"
#include "risbeam/text_format.hpp"

namespace risbeam
{
    namespace
    {
        constexpr double ns = 1e-9;
        constexpr double golden = 0.6180339887498949;

        // Noise-free signal model restricted to one period of the schedule when the pilots
        // repeat with the scan period (each retained row then carries weight `repeats`).
        class SignalFit
        {
        public:
            SignalFit(const BeamSource &model, const SignalConfig &signal) : model_(model), signal_(signal)
            {
                const int gb = signal.scan_count;
                rows_ = signal.schedule_length();
                weight_ = 1.0;
                bool periodic = true;
                if (signal.pilots)
                {
                    const CMatrix &x = *signal.pilots;
                    for (Eigen::Index g = gb; g < x.rows() && periodic; ++g)
                        periodic = x.row(g) == x.row(g % gb);
                }
                if (periodic)
                {
                    rows_ = gb;
                    weight_ = static_cast<double>(signal.repeats);
                }
                pilots_ = signal.pilots ? CMatrix(signal.pilots->topRows(rows_))
                                        : CMatrix(CMatrix::Ones(rows_, signal.subcarriers));
            }

            // Compressed noise-free signal (rows x K, row-major) for given channel parameters.
            CVector signal_of(const BeamSource &source, const ChannelParams &eta) const
            {
                const CVector b = source.response(eta.phi_deg);
                const CVector dl = delay_response(eta.tau_l, signal_.subcarriers, signal_.subcarrier_spacing());
                const CVector dr = delay_response(eta.tau_r, signal_.subcarriers, signal_.subcarrier_spacing());
                const int k_count = signal_.subcarriers;
                CVector mu(static_cast<Eigen::Index>(rows_) * k_count);
                for (int g = 0; g < rows_; ++g)
                    for (int k = 0; k < k_count; ++k)
                        mu(g * k_count + k) = (eta.alpha_l * dl(k) + eta.alpha_r * b(g % b.size()) * dr(k)) * pilots_(g, k);
                return mu;
            }

            void set_target(CVector target)
            {
                target_ = std::move(target);
                target_energy_ = weight_ * target_.squaredNorm();
            }

            double target_energy() const { return target_energy_; }

            // Residual with the gains projected out; fills the fitted gains and, on request,
            // the weighted residual entries stacked as [re; im].
            double evaluate(double tau_l, double tau_r, double phi_deg, cplx &alpha_l, cplx &alpha_r,
                            Eigen::VectorXd *entries = nullptr) const
            {
                const CVector b = model_.response(phi_deg);
                const int k_count = signal_.subcarriers;
                const double df = signal_.subcarrier_spacing();
                const CVector dl = delay_response(tau_l, k_count, df);
                const CVector dr = delay_response(tau_r, k_count, df);

                double uu = 0.0, vv = 0.0;
                cplx uv = 0.0, um = 0.0, vm = 0.0;
                for (int g = 0; g < rows_; ++g)
                {
                    const cplx bg = b(g % b.size());
                    for (int k = 0; k < k_count; ++k)
                    {
                        const cplx x = pilots_(g, k);
                        const cplx u = dl(k) * x;
                        const cplx v = bg * dr(k) * x;
                        const cplx m = target_(g * k_count + k);
                        uu += std::norm(u);
                        vv += std::norm(v);
                        uv += std::conj(u) * v;
                        um += std::conj(u) * m;
                        vm += std::conj(v) * m;
                    }
                }
                const double det = uu * vv - std::norm(uv);
                if (det > 1e-12 * uu * vv)
                {
                    alpha_l = (vv * um - uv * vm) / det;
                    alpha_r = (uu * vm - std::conj(uv) * um) / det;
                }
                else if (uu >= vv && uu > 0.0)
                {
                    alpha_l = um / uu;
                    alpha_r = 0.0;
                }
                else if (vv > 0.0)
                {
                    alpha_l = 0.0;
                    alpha_r = vm / vv;
                }
                else
                {
                    alpha_l = alpha_r = 0.0;
                }

                const Eigen::Index n = static_cast<Eigen::Index>(rows_) * k_count;
                const double root = std::sqrt(weight_);
                if (entries)
                    entries->resize(2 * n);
                double r2 = 0.0;
                for (int g = 0; g < rows_; ++g)
                {
                    const cplx bg = b(g % b.size());
                    for (int k = 0; k < k_count; ++k)
                    {
                        const cplx x = pilots_(g, k);
                        const Eigen::Index i = static_cast<Eigen::Index>(g) * k_count + k;
                        const cplx r = target_(i) - (alpha_l * dl(k) + alpha_r * bg * dr(k)) * x;
                        r2 += std::norm(r);
                        if (entries)
                        {
                            (*entries)(i) = root * r.real();
                            (*entries)(n + i) = root * r.imag();
                        }
                    }
                }
                return weight_ * r2;
            }

        private:
            const BeamSource &model_;
            const SignalConfig &signal_;
            int rows_ = 0;
            double weight_ = 1.0;
            CMatrix pilots_;
            CVector target_;
            double target_energy_ = 0.0;
        };

        using Point = std::array<double, 3>; // tau_l [ns], tau_r [ns], phi [deg] offsets

        struct LineResult
        {
            double t = 0.0;
            double f = 0.0;
        };

        // Bracket then golden-section search of f(t) starting from t = 0 with value f0.
        template <class F>
        LineResult line_search(F &&f, double f0, double step, double tol)
        {
            LineResult best{0.0, f0};
            auto probe = [&](double t) {
                const double v = f(t);
                if (v < best.f)
                    best = {t, v};
                return v;
            };

            double lo = -step, hi = step;
            const double fp = probe(step);
            double dir = 0.0;
            if (fp < f0)
                dir = 1.0;
            else if (probe(-step) < f0)
                dir = -1.0;
            if (dir != 0.0)
            {
                double prev = 0.0, cur = dir * step, fcur = best.f;
                for (int i = 0; i < 60; ++i)
                {
                    const double next = cur + (cur - prev) / golden;
                    const double fn = probe(next);
                    if (!(fn < fcur))
                    {
                        lo = std::min(prev, next);
                        hi = std::max(prev, next);
                        break;
                    }
                    prev = cur;
                    cur = next;
                    fcur = fn;
                    lo = std::min(prev, cur);
                    hi = std::max(prev, cur);
                }
            }

            double a = lo, b = hi;
            double c = b - golden * (b - a), d = a + golden * (b - a);
            double fc = probe(c), fd = probe(d);
            while (b - a > tol)
            {
                if (fc < fd)
                {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - golden * (b - a);
                    fc = probe(c);
                }
                else
                {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + golden * (b - a);
                    fd = probe(d);
                }
            }
            return best;
        }

        double wrap_angle(double rad)
        {
            return std::remainder(rad, 2.0 * pi);
        }
    }

    void PseudoTrueOptions::validate() const
    {
        if (max_iterations < 1)
            throw InvalidArgument("pseudo-true max_iterations must be >= 1");
        if (!(tolerance > 0.0) || !(tau_step_ns > 0.0) || !(phi_step_deg > 0.0) || !(tau_tol_ns > 0.0) ||
            !(phi_tol_deg > 0.0))
            throw InvalidArgument("pseudo-true steps and tolerances must be positive");
    }

    PseudoTrueResult pseudo_true(const BeamSource &truth, const BeamSource &model, const Vec2 &s,
                                 const SceneGeometry &geometry, const SignalConfig &signal,
                                 const PseudoTrueOptions &options)
    {
        options.validate();
        signal.validate();
        if (truth.codeword_count() != signal.scan_count || model.codeword_count() != signal.scan_count)
            throw InvalidArgument("beam sources must provide one response per scan angle");

        PseudoTrueResult result;
        result.eta_true = channel_params(s, geometry, signal);
        const auto &eta = result.eta_true;
        if (!truth.covers(eta.phi_deg) || !model.covers(eta.phi_deg))
            throw ExtrapolationError("true angle " + format_double(eta.phi_deg) + " deg is outside the beam sources' range");

        SignalFit fit(model, signal);
        fit.set_target(fit.signal_of(truth, eta));
        const double phi_lo = model.min_angle_deg();
        const double phi_hi = model.max_angle_deg();

        auto cost = [&](const Point &x, cplx &al, cplx &ar) {
            const double phi = std::clamp(eta.phi_deg + x[2], phi_lo, phi_hi);
            return fit.evaluate(eta.tau_l + x[0] * ns, eta.tau_r + x[1] * ns, phi, al, ar);
        };
        auto cost_only = [&](const Point &x) {
            cplx al, ar;
            return cost(x, al, ar);
        };
        auto entries = [&](const Point &x) {
            cplx al, ar;
            Eigen::VectorXd r;
            const double phi = std::clamp(eta.phi_deg + x[2], phi_lo, phi_hi);
            fit.evaluate(eta.tau_l + x[0] * ns, eta.tau_r + x[1] * ns, phi, al, ar, &r);
            return r;
        };

        Point x{0.0, 0.0, 0.0};
        double f = cost_only(x);
        if (!std::isfinite(f))
            throw Error("pseudo-true residual is not finite at the true parameters");
        result.initial_residual = f;
        const double floor = 1e-24 * fit.target_energy();

        std::array<double, 3> step{options.tau_step_ns, options.tau_step_ns, options.phi_step_deg};
        const std::array<double, 3> tol{options.tau_tol_ns, options.tau_tol_ns, options.phi_tol_deg};

        result.converged = f <= floor;
        for (int it = 0; it < options.max_iterations && !result.converged; ++it)
        {
            const double f_start = f;
            const Point x_start = x;
            for (int i = 0; i < 3; ++i)
            {
                auto along = [&](double t) {
                    Point y = x;
                    y[static_cast<std::size_t>(i)] += t;
                    return cost_only(y);
                };
                const auto i_u = static_cast<std::size_t>(i);
                const auto r = line_search(along, f, step[i_u], tol[i_u]);
                if (r.f < f)
                {
                    x[i_u] += r.t;
                    f = r.f;
                    step[i_u] = std::max(2.0 * std::abs(r.t), 10.0 * tol[i_u]);
                }
                else
                {
                    step[i_u] = std::max(0.5 * step[i_u], 10.0 * tol[i_u]);
                }
            }

            // Search along the net displacement of the sweep.
            Point dir{x[0] - x_start[0], x[1] - x_start[1], x[2] - x_start[2]};
            if (dir[0] != 0.0 || dir[1] != 0.0 || dir[2] != 0.0)
            {
                const Point base = x;
                auto along = [&](double t) {
                    Point y{base[0] + t * dir[0], base[1] + t * dir[1], base[2] + t * dir[2]};
                    return cost_only(y);
                };
                const double scale = std::max({std::abs(dir[0]) / tol[0], std::abs(dir[1]) / tol[1], std::abs(dir[2]) / tol[2]});
                const auto r = line_search(along, f, 1.0, std::max(1e-12, 1.0 / scale));
                if (r.f < f)
                {
                    x = {base[0] + r.t * dir[0], base[1] + r.t * dir[1], base[2] + r.t * dir[2]};
                    f = r.f;
                }
            }

            // Gauss-Newton step on the projected residual; the delay/angle valley is too
            // narrow for coordinate moves alone to reach its floor.
            {
                const Eigen::VectorXd r0 = entries(x);
                Eigen::MatrixXd jac(r0.size(), 3);
                for (std::size_t i = 0; i < 3; ++i)
                {
                    constexpr double h = 1e-5;
                    Point up = x, down = x;
                    up[i] += h;
                    down[i] -= h;
                    jac.col(static_cast<Eigen::Index>(i)) = (entries(up) - entries(down)) / (2.0 * h);
                }
                const Eigen::Vector3d delta = -jac.completeOrthogonalDecomposition().solve(r0);
                if (delta.allFinite())
                {
                    double t = 1.0;
                    for (int k = 0; k < 12; ++k, t *= 0.5)
                    {
                        const Point y{x[0] + t * delta(0), x[1] + t * delta(1), x[2] + t * delta(2)};
                        const double fy = cost_only(y);
                        if (fy < f)
                        {
                            x = y;
                            f = fy;
                            break;
                        }
                    }
                }
            }

            result.iterations = it + 1;
            result.relative_change = f_start > 0.0 ? (f_start - f) / f_start : 0.0;
            if (!std::isfinite(f))
                throw Error("pseudo-true residual became non-finite");
            if (f <= floor || result.relative_change < options.tolerance)
                result.converged = true;
        }

        cplx al, ar;
        result.residual = cost(x, al, ar);
        result.eta0 = {al, eta.tau_l + x[0] * ns, ar, eta.tau_r + x[1] * ns,
                       std::clamp(eta.phi_deg + x[2], phi_lo, phi_hi)};
        return result;
    }

    Vec2 locate(double tau_l, double tau_r, double phi_deg, const SceneGeometry &geometry)
    {
        geometry.validate();
        if (!std::isfinite(tau_l) || !std::isfinite(tau_r) || !std::isfinite(phi_deg) || tau_l < 0.0)
            throw GeometryError("channel parameters must be finite with non-negative delays");
        const double c = geometry.c;
        const double d1 = geometry.bs_ris_distance();
        const double rho = c * tau_r - d1; // RIS-UE range implied by the reflected delay
        if (!(rho > 0.0))
            throw GeometryError("reflected delay is shorter than the BS-RIS distance");
        const double range_l = c * tau_l;
        const double phi = phi_deg * deg_to_rad;

        // Start: BS range circle intersected with the RIS bearing ray.
        const Vec2 &b = geometry.ris_boresight;
        const Vec2 u(b.x() * std::cos(phi) - b.y() * std::sin(phi), b.x() * std::sin(phi) + b.y() * std::cos(phi));
        const Vec2 rb = geometry.ris - geometry.bs;
        const double half_b = u.dot(rb);
        const double disc = half_b * half_b - (rb.squaredNorm() - range_l * range_l);
        double t0 = rho;
        if (disc >= 0.0)
        {
            const double sq = std::sqrt(disc);
            double best = std::numeric_limits<double>::infinity();
            for (double t : {-half_b - sq, -half_b + sq})
                if (t > 0.0 && std::abs(t - rho) < best)
                {
                    best = std::abs(t - rho);
                    t0 = t;
                }
        }
        Vec2 s = geometry.ris + t0 * u;

        auto residuals = [&](const Vec2 &p, Eigen::Matrix<double, 3, 2> *jac) {
            const Vec2 dl = p - geometry.bs;
            const Vec2 dr = p - geometry.ris;
            const double nl = dl.norm();
            const double nr = dr.norm();
            if (nl < 1e-12 || nr < 1e-12)
                throw GeometryError("position iterate coincides with the BS or RIS");
            const double ang = std::atan2(b.x() * dr.y() - b.y() * dr.x(), b.dot(dr));
            Eigen::Vector3d r(nl - range_l, d1 + nr - c * tau_r, rho * wrap_angle(ang - phi));
            if (jac)
            {
                jac->row(0) = (dl / nl).transpose();
                jac->row(1) = (dr / nr).transpose();
                jac->row(2) = rho * Eigen::RowVector2d(-dr.y(), dr.x()) / (nr * nr);
            }
            return r;
        };

        Eigen::Matrix<double, 3, 2> jac;
        Eigen::Vector3d r = residuals(s, &jac);
        double cost = r.squaredNorm();
        for (int it = 0; it < 100; ++it)
        {
            const Vec2 delta = jac.colPivHouseholderQr().solve(-r);
            if (!delta.allFinite())
                throw ConvergenceError("position fit produced a non-finite step");
            double lambda = 1.0;
            Vec2 trial;
            Eigen::Vector3d r_trial;
            double cost_trial = 0.0;
            bool accepted = false;
            for (int h = 0; h < 30; ++h)
            {
                trial = s + lambda * delta;
                try
                {
                    r_trial = residuals(trial, nullptr);
                    cost_trial = r_trial.squaredNorm();
                    if (cost_trial <= cost)
                    {
                        accepted = true;
                        break;
                    }
                }
                catch (const GeometryError &)
                {
                }
                lambda *= 0.5;
            }
            if (!accepted)
                return s; // no descent possible from here: stationary to working precision
            const double moved = (trial - s).norm();
            s = trial;
            r = residuals(s, &jac);
            cost = r.squaredNorm();
            if (moved <= 1e-13 * (1.0 + s.norm()) || cost == 0.0)
                return s;
        }
        throw ConvergenceError("position fit did not converge in 100 iterations");
    }

    AlbResult alb(const Vec2 &s, const BeamSource &truth, const BeamSource &model, const SceneGeometry &geometry,
                  const SignalConfig &signal, const PseudoTrueOptions &options)
    {
        AlbResult out;
        out.fit = pseudo_true(truth, model, s, geometry, signal, options);
        out.s0 = locate(out.fit.eta0.tau_l, out.fit.eta0.tau_r, out.fit.eta0.phi_deg, geometry);
        out.alb = (s - out.s0).norm();
        return out;
    }

    int SceneRegion::nx() const
    {
        return static_cast<int>(std::floor((x_max - x_min) / step + 1e-9)) + 1;
    }

    int SceneRegion::ny() const
    {
        return static_cast<int>(std::floor((y_max - y_min) / step + 1e-9)) + 1;
    }

    void SceneRegion::validate() const
    {
        if (!(step > 0.0))
            throw InvalidArgument("grid step must be positive");
        if (!(x_min <= x_max) || !(y_min <= y_max))
            throw InvalidArgument("scene region bounds are inverted");
    }

    std::vector<double> AlbGrid::valid_values() const
    {
        std::vector<double> v;
        for (const auto &c : cells)
            if (c.valid)
                v.push_back(c.alb);
        return v;
    }

    AlbGrid alb_grid(const SceneRegion &region, const BeamSource &truth, const BeamSource &model,
                     const SceneGeometry &geometry, const SignalConfig &signal, unsigned jobs,
                     const PseudoTrueOptions &options)
    {
        region.validate();
        geometry.validate();
        signal.validate();
        options.validate();
        const int nx = region.nx();
        const int ny = region.ny();
        AlbGrid grid;
        grid.region = region;
        grid.cells.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));

        auto run_cell = [&](std::size_t idx) {
            AlbCell &cell = grid.cells[idx];
            const int ix = static_cast<int>(idx % static_cast<std::size_t>(nx));
            const int iy = static_cast<int>(idx / static_cast<std::size_t>(nx));
            cell.x = std::min(region.x_min + ix * region.step, region.x_max);
            cell.y = std::min(region.y_min + iy * region.step, region.y_max);
            cell.alb = std::numeric_limits<double>::quiet_NaN();
            cell.phi_deg = std::numeric_limits<double>::quiet_NaN();
            const Vec2 s(cell.x, cell.y);
            try
            {
                cell.phi_deg = geo_params(s, geometry).phi_deg;
                const auto r = alb(s, truth, model, geometry, signal, options);
                cell.alb = r.alb;
                cell.s0 = r.s0;
                cell.valid = std::isfinite(r.alb);
                if (!cell.valid)
                    cell.status = "non-finite ALB";
            }
            catch (const std::exception &e)
            {
                cell.valid = false;
                cell.alb = std::numeric_limits<double>::quiet_NaN();
                cell.status = e.what();
            }
        };

        if (jobs == 0)
            jobs = std::max(1u, std::thread::hardware_concurrency());
        const std::size_t total = grid.cells.size();
        jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, total));
        if (jobs <= 1)
        {
            for (std::size_t i = 0; i < total; ++i)
                run_cell(i);
            return grid;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (unsigned w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < total; i = next++)
                    run_cell(i);
            });
        for (auto &t : workers)
            t.join();
        return grid;
    }

    std::vector<std::pair<double, double>> cdf(std::span<const double> values, std::span<const double> thresholds)
    {
        if (values.empty())
            throw InvalidArgument("CDF needs at least one value");
        std::vector<double> sorted(values.begin(), values.end());
        for (double v : sorted)
            if (!std::isfinite(v))
                throw InvalidArgument("CDF values must be finite");
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::pair<double, double>> out;
        out.reserve(thresholds.size());
        const double n = static_cast<double>(sorted.size());
        for (double t : thresholds)
        {
            const auto count = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
            out.emplace_back(t, static_cast<double>(count) / n);
        }
        return out;
    }

    void write_alb_csv(const AlbGrid &grid, const std::filesystem::path &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error("cannot write '" + path.string() + "'");
        out << "x_m,y_m,alb_m,valid\n";
        for (const auto &c : grid.cells)
            out << format_double(c.x) << ',' << format_double(c.y) << ','
                << (c.valid ? format_double(c.alb) : std::string("nan")) << ',' << (c.valid ? 1 : 0) << '\n';
        if (!out)
            throw Error("write failed for '" + path.string() + "'");
    }

    std::vector<double> read_alb_values(const std::filesystem::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error("cannot open '" + path.string() + "'");
        const std::string source = path.string();
        std::string line;
        if (!std::getline(in, line) || line != "x_m,y_m,alb_m,valid")
            throw ParseError(source, 1, "expected header 'x_m,y_m,alb_m,valid'");
        std::vector<double> values;
        std::size_t line_no = 1;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string field;
            while (std::getline(ss, field, ','))
                fields.push_back(field);
            if (fields.size() != 4)
                throw ParseError(source, line_no, "expected 4 fields, found " + std::to_string(fields.size()));
            try
            {
                parse_double(fields[0]);
                parse_double(fields[1]);
                const double v = parse_double(fields[2]);
                const auto valid = parse_integer(fields[3]);
                if (valid != 0 && valid != 1)
                    throw InvalidArgument("valid flag must be 0 or 1");
                if (valid == 1)
                {
                    if (!std::isfinite(v))
                        throw InvalidArgument("valid cell has a non-finite ALB");
                    values.push_back(v);
                }
            }
            catch (const InvalidArgument &e)
            {
                throw ParseError(source, line_no, e.what());
            }
        }
        return values;
    }

    void write_cdf_csv(const std::vector<std::pair<double, double>> &points, const std::filesystem::path &path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw Error("cannot write '" + path.string() + "'");
        out << "threshold_m,fraction\n";
        for (const auto &[t, f] : points)
            out << format_double(t) << ',' << format_double(f) << '\n';
        if (!out)
            throw Error("write failed for '" + path.string() + "'");
    }
}
