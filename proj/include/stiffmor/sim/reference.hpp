// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file reference.hpp
///
/// Adaptive high-accuracy solver used as ground truth: the L-stable,
/// stiffly accurate 5-stage SDIRK method of order 4 with an embedded order-3
/// estimate (Hairer & Wanner, Solving ODEs II, Table IV.6.5).
///
#ifndef STIFFMOR_SIM_REFERENCE_HPP
#define STIFFMOR_SIM_REFERENCE_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <vector>

#include "stiffmor/dae/system.hpp"
#include "stiffmor/sim/trajectory.hpp"

namespace stiffmor
{

struct Sdirk4Tableau
{
    static constexpr int stages = 5;
    static constexpr double gamma = 0.25;
    std::array<std::array<double, 5>, 5> a{};
    std::array<double, 5> b{}, b_hat{}, c{};

    Sdirk4Tableau()
    {
        a[0] = {0.25, 0, 0, 0, 0};
        a[1] = {0.5, 0.25, 0, 0, 0};
        a[2] = {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0};
        a[3] = {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0};
        a[4] = {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25};
        b = a[4];
        b_hat = {59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0};
        for (int i = 0; i < stages; ++i)
        {
            c[static_cast<std::size_t>(i)] = 0.0;
            for (int j = 0; j < stages; ++j)
                c[static_cast<std::size_t>(i)] += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
};

struct ReferenceTolerances
{
    static constexpr double rtol = 1e-10;
    static constexpr double atol = 1e-12;
};

namespace detail
{

class Sdirk4Solver
{
public:
    explicit Sdirk4Solver(const DaeSystem& dae) : dae_(dae) {}

    // Attempts one step of size h from (x, z). On success writes the new
    // values and the scaled error norm; returns false when Newton fails.
    bool attempt(const Vec& x, const Vec& z, const Vec& u, double h, Vec& x_new, Vec& z_new,
                 double& err, int& iters)
    {
        const Index nx = dae_.nx(), nz = dae_.nz();
        const Index n = nx + nz;
        const double gh = Sdirk4Tableau::gamma * h;
        dae_.jacobian(x, u, z, jac_);
        Mat m(n, n);
        m.topLeftCorner(nx, nx) = Mat::Identity(nx, nx) - gh * jac_.fx;
        m.topRightCorner(nx, nz) = -gh * jac_.fz;
        m.bottomLeftCorner(nz, nx) = jac_.gx;
        m.bottomRightCorner(nz, nz) = jac_.gz;
        lu_.compute(m);
        if (!(lu_.rcond() > 1e-15))
            return false;

        const Vec scale = weights(x, x);
        std::array<Vec, 5> k;
        Vec xi = x, zi = z;
        Vec f, g, r(n);
        for (int i = 0; i < Sdirk4Tableau::stages; ++i)
        {
            Vec base = x;
            for (int j = 0; j < i; ++j)
                base += h * tab_.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                        k[static_cast<std::size_t>(j)];
            // predictor: keep the previous stage values
            double dnorm_prev = 0.0;
            bool ok = false;
            for (int it = 0; it < 12; ++it)
            {
                dae_.residual(xi, u, zi, f, g);
                r.head(nx) = xi - base - gh * f;
                r.tail(nz) = g;
                if (!r.allFinite())
                    return false;
                const Vec d = lu_.solve(-r);
                xi += d.head(nx);
                zi += d.tail(nz);
                ++iters;
                const double dn = scaled_rms(d.head(nx), scale);
                const double rn = inf_norm(r);
                if (it > 0 && dnorm_prev > 0.0)
                {
                    const double theta = dn / dnorm_prev;
                    if (theta >= 1.0)
                    {
                        // No contraction: accept only if already at roundoff.
                        if (dn <= 1e-2 && inf_norm(d.tail(nz)) <= 1e-12)
                        {
                            ok = true;
                            break;
                        }
                        return false;
                    }
                    if (theta / (1.0 - theta) * dn <= 1e-3)
                    {
                        ok = true;
                        break;
                    }
                }
                else if (dn <= 1e-6 && rn <= 1e-12)
                {
                    ok = true;
                    break;
                }
                dnorm_prev = dn;
            }
            if (!ok)
                return false;
            dae_.residual(xi, u, zi, f, g);
            if (!f.allFinite())
                return false;
            k[static_cast<std::size_t>(i)] = f;
        }
        x_new = xi;
        z_new = zi;

        // Embedded error, filtered through the stage matrix to damp stiff components.
        Vec e = Vec::Zero(nx);
        for (int i = 0; i < Sdirk4Tableau::stages; ++i)
            e += h * (tab_.b[static_cast<std::size_t>(i)] - tab_.b_hat[static_cast<std::size_t>(i)]) *
                 k[static_cast<std::size_t>(i)];
        Vec rhs = Vec::Zero(n);
        rhs.head(nx) = e;
        const Vec ef = lu_.solve(rhs);
        err = scaled_rms(ef.head(nx), weights(x, x_new));
        return std::isfinite(err);
    }

    static Vec weights(const Vec& a, const Vec& b)
    {
        return (ReferenceTolerances::atol +
                ReferenceTolerances::rtol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array())
            .matrix();
    }

    static double scaled_rms(const Vec& v, const Vec& w)
    {
        if (v.size() == 0)
            return 0.0;
        return std::sqrt((v.array() / w.array()).square().mean());
    }

private:
    const DaeSystem& dae_;
    Sdirk4Tableau tab_;
    DaeJacobian jac_;
    Eigen::PartialPivLU<Mat> lu_;
};

} // namespace detail

/// Adaptive integration with fixed tolerances (rtol 1e-10, atol 1e-12).
/// Steps are clipped to land exactly on every sample time and on every
/// breakpoint of the piecewise-constant input.
inline Trajectory integrate_reference(const DaeSystem& dae, const Vec& x0, const Vec& z0_guess,
                                      const InputFn& u_of_t, double t_end,
                                      std::vector<double> sample_times,
                                      std::vector<double> breakpoints = {})
{
    if (x0.size() != dae.nx() || z0_guess.size() != dae.nz())
        throw DimensionMismatch("integrate_reference: x0/z0 length mismatch");
    std::sort(sample_times.begin(), sample_times.end());
    for (double s : sample_times)
        if (s < 0.0 || s > t_end * (1.0 + 1e-12))
            throw ConfigError("integrate_reference: sample time outside [0, t_end]");

    std::vector<double> stops = sample_times;
    for (double b : breakpoints)
        if (b > 0.0 && b < t_end)
            stops.push_back(b);
    stops.push_back(t_end);
    std::sort(stops.begin(), stops.end());
    // Stops closer than the time resolution collapse into one; samples are
    // recorded at the merged stop.
    const double t_tol = 1e-12 * std::max(1.0, t_end);
    std::vector<double> merged;
    for (double s : stops)
        if (merged.empty() || s - merged.back() > t_tol)
            merged.push_back(s);
    merged.back() = std::max(merged.back(), stops.back());
    stops = std::move(merged);

    Trajectory traj;
    traj.reserve(static_cast<Index>(sample_times.size()), dae.nx(), dae.nz());
    Index sample = 0;

    Vec x = x0;
    int iters0 = 0;
    Vec z;
    try
    {
        z = detail::solve_algebraic(dae, x, u_of_t(0.0), z0_guess, 1e-13, 50, iters0);
    }
    catch (const NoConvergence&)
    {
        throw NewtonDivergence(0);
    }
    auto record_due = [&](double t) {
        while (sample < static_cast<Index>(sample_times.size()) &&
               sample_times[static_cast<std::size_t>(sample)] <= t + t_tol)
        {
            traj.record(sample, sample_times[static_cast<std::size_t>(sample)], x, z);
            ++sample;
        }
    };
    record_due(0.0);

    detail::Sdirk4Solver solver(dae);
    const auto start = std::chrono::steady_clock::now();
    double t = 0.0;
    double h = std::min(1e-6, std::max(t_end, 1e-300));
    std::size_t next = 0;
    while (next < stops.size() && stops[next] <= 0.0)
        ++next;
    Vec x_new, z_new;
    long failures = 0;
    while (next < stops.size())
    {
        const double target = stops[next];
        double h_try = std::min(h, target - t);
        const bool lands = h_try >= target - t;
        const Vec u = u_of_t(t);
        double err = 0.0;
        int iters = 0;
        const bool ok = solver.attempt(x, z, u, h_try, x_new, z_new, err, iters);
        if (!ok)
        {
            h = 0.25 * h_try;
            ++traj.rejected;
            if (h < 1e-14 * std::max(1.0, t_end) || ++failures > 200)
                throw NewtonDivergence(traj.steps);
            continue;
        }
        const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.25)));
        if (err > 1.0)
        {
            h = h_try * std::min(1.0, fac);
            ++traj.rejected;
            if (h < 1e-14 * std::max(1.0, t_end))
                throw NewtonDivergence(traj.steps);
            continue;
        }
        failures = 0;
        if (!detail::state_ok(x_new))
            throw NonFiniteState(traj.steps);
        x = x_new;
        z = z_new;
        ++traj.steps;
        traj.newton_iterations.push_back(iters);
        t = lands ? target : t + h_try;
        // Do not let a clipped step shrink the controller's proposal.
        h = lands ? std::max(h, h_try * fac) : h_try * fac;
        if (lands)
        {
            record_due(t);
            ++next;
        }
    }
    traj.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return traj;
}

} // namespace stiffmor

#endif
