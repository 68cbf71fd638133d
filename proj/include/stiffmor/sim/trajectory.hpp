// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STIFFMOR_SIM_TRAJECTORY_HPP
#define STIFFMOR_SIM_TRAJECTORY_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "stiffmor/dae/system.hpp"

namespace stiffmor
{

/// Input signal; integrators hold it constant over each step (value at the step start).
using InputFn = std::function<Vec(double)>;

inline InputFn constant_input(Vec u)
{
    return [u = std::move(u)](double) { return u; };
}

/// Piecewise-constant schedule: `before` for t < t_event, `after` from t_event on.
inline InputFn step_input(Vec before, Vec after, double t_event)
{
    return [before = std::move(before), after = std::move(after), t_event](double t) {
        return t < t_event ? before : after;
    };
}

struct Trajectory
{
    std::vector<double> times;
    Mat states;    ///< samples x n_x
    Mat algebraic; ///< samples x n_z
    std::vector<int> newton_iterations; ///< one entry per step
    long steps = 0;
    long rejected = 0;  ///< adaptive solvers only
    double wall_clock = 0.0; ///< seconds spent in the stepping loop

    Index samples() const { return static_cast<Index>(times.size()); }
    Vec x(Index i) const { return states.row(i).transpose(); }
    Vec z(Index i) const { return algebraic.row(i).transpose(); }

    void reserve(Index n_samples, Index nx, Index nz)
    {
        times.reserve(static_cast<std::size_t>(n_samples));
        states.resize(n_samples, nx);
        algebraic.resize(n_samples, nz);
    }

    void record(Index i, double t, const Vec& xv, const Vec& zv)
    {
        times.push_back(t);
        states.row(i) = xv.transpose();
        algebraic.row(i) = zv.transpose();
    }
};

namespace detail
{

inline bool state_ok(const Vec& x, double bound = 1e100)
{
    for (Index i = 0; i < x.size(); ++i)
        if (!std::isfinite(x(i)) || std::abs(x(i)) > bound)
            return false;
    return true;
}

// Plain Newton on g(x, u, z) = 0 for z; adds the iteration count to `iters`.
// Also stops once the update is at roundoff level, since badly scaled
// constraints may not reach an absolute residual of `tol`.
inline Vec solve_algebraic(const DaeSystem& dae, const Vec& x, const Vec& u, Vec z, double tol,
                           int max_iter, int& iters)
{
    if (dae.nz() == 0)
        return z;
    Vec f, g;
    DaeJacobian jac;
    for (int it = 0;; ++it)
    {
        dae.residual(x, u, z, f, g);
        const double r = inf_norm(g);
        if (!std::isfinite(r))
            throw NoConvergence(it, r, "non-finite algebraic residual");
        if (r <= tol)
        {
            iters += it;
            return z;
        }
        if (it >= max_iter)
            throw NoConvergence(it, r, "algebraic solve");
        dae.jacobian(x, u, z, jac);
        Eigen::PartialPivLU<Mat> lu(jac.gz);
        const Vec dz = lu.solve(g);
        z -= dz;
        if (it > 0 && inf_norm(dz) <= 1e-14 * std::max(1.0, inf_norm(z)))
        {
            iters += it + 1;
            return z;
        }
    }
}

// Fixed-step grid: floor(t_end / h) full steps plus a final partial step when
// t_end is not a multiple of h.
inline std::vector<double> fixed_grid(double h, double t_end)
{
    if (!(h > 0.0) || !(t_end >= 0.0))
        throw ConfigError("integrate: need h > 0 and t_end >= 0");
    const double ratio = t_end / h;
    const auto n_full = static_cast<long>(std::floor(ratio * (1.0 + 1e-12)));
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(n_full + 2));
    for (long i = 0; i <= n_full; ++i)
        t.push_back(std::min(static_cast<double>(i) * h, t_end));
    if (t_end - t.back() > 1e-12 * std::max(1.0, t_end))
        t.push_back(t_end);
    else
        t.back() = t_end;
    return t;
}

} // namespace detail

} // namespace stiffmor

#endif
