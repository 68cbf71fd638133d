// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file integrate.hpp
///
/// Fixed-step integrators for semi-explicit index-1 DAEs: the 2-stage
/// Gauss-Legendre collocation method (order 4) and classical RK4.
///
#ifndef STIFFMOR_SIM_INTEGRATE_HPP
#define STIFFMOR_SIM_INTEGRATE_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "stiffmor/dae/system.hpp"
#include "stiffmor/sim/trajectory.hpp"

namespace stiffmor
{

enum class Scheme
{
    gl4,
    erk4
};

inline Scheme parse_scheme(const std::string& s)
{
    if (s == "irk-gl4" || s == "gl4")
        return Scheme::gl4;
    if (s == "erk4")
        return Scheme::erk4;
    throw ConfigError("unknown integration method '" + s + "'");
}

struct IntegratorConfig
{
    Scheme method = Scheme::gl4;
    double h = 1e-3;
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
};

namespace detail
{

//
// One Gauss-Legendre step. Unknowns are the stage values (X_i, Z_i):
//
//   X_i - x_n - h sum_j a_ij f(X_j, u, Z_j) = 0,   g(X_i, u, Z_i) = 0.
//
// Simplified Newton with the Jacobian frozen at the step start. The algebraic
// corrections are eliminated through dg/dz, which leaves (I - h A (x) At) on
// the stage increments; A has the complex eigenvalue pair d, conj(d), so the
// 2n real system decouples into a single n-dimensional complex solve.
//
class Gl4Stepper
{
public:
    Gl4Stepper(const DaeSystem& dae, const IntegratorConfig& cfg) : dae_(dae), cfg_(cfg)
    {
        const double r = std::sqrt(3.0) / 6.0;
        a_ << 0.25, 0.25 - r, 0.25 + r, 0.25;
        Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(a_.cast<Complex>());
        Index k = es.eigenvalues()(0).imag() > 0.0 ? 0 : 1;
        d_ = es.eigenvalues()(k);
        v_.col(0) = es.eigenvectors().col(k);
        v_.col(1) = v_.col(0).conjugate();
        vinv_ = v_.inverse();
        // x_{n+1} = x_n + b^T A^{-1} Z avoids re-multiplying the stage
        // increments by a stiff Jacobian.
        db_ = Eigen::RowVector2d(0.5, 0.5) * a_.inverse();
    }

    const Eigen::Matrix2d& tableau() const { return a_; }

    /// Advances (x, z) by h; returns Newton iterations used.
    int step(Vec& x, Vec& z, const Vec& u, double h, long index)
    {
        const Index nx = dae_.nx(), nz = dae_.nz();
        std::array<Vec, 2> xs{x, x}, zs{z, z}, fs, gs;
        factor(x, z, u, h, index);

        int iters = 0;
        int refreshes = 0;
        double res_prev = std::numeric_limits<double>::infinity();
        int slow = 0;
        bool polished = false;
        while (true)
        {
            for (int i = 0; i < 2; ++i)
                dae_.residual(xs[i], u, zs[i], fs[i], gs[i]);
            std::array<Vec, 2> rx;
            double res = 0.0;
            for (int i = 0; i < 2; ++i)
            {
                rx[i] = xs[i] - x - h * (a_(i, 0) * fs[0] + a_(i, 1) * fs[1]);
                res = std::max({res, inf_norm(rx[i]), inf_norm(gs[i])});
            }
            if (!std::isfinite(res))
                throw NewtonDivergence(index);
            if (res <= cfg_.newton_tol)
            {
                // One more correction: the increment-form update below passes
                // the stage error straight into x_{n+1}.
                if (polished || res <= 1e-4 * cfg_.newton_tol || iters >= cfg_.newton_max_iter)
                    break;
                polished = true;
            }
            else if (iters >= cfg_.newton_max_iter)
            {
                throw NewtonDivergence(index);
            }

            if (iters > 0 && res > 0.5 * res_prev)
                ++slow;
            if (slow >= 2 && refreshes < 3)
            {
                factor(0.5 * (xs[0] + xs[1]), 0.5 * (zs[0] + zs[1]), u, h, index);
                ++refreshes;
                slow = 0;
            }
            res_prev = res;

            std::array<Vec, 2> s;
            std::array<Vec, 2> r;
            for (int i = 0; i < 2; ++i)
                s[i] = nz > 0 ? Vec(luz_.solve(gs[i])) : Vec(0);
            for (int i = 0; i < 2; ++i)
            {
                r[i] = -rx[i];
                if (nz > 0)
                    r[i] -= h * fz_ * (a_(i, 0) * s[0] + a_(i, 1) * s[1]);
            }
            CVec w = vinv_(0, 0) * r[0].cast<Complex>() + vinv_(0, 1) * r[1].cast<Complex>();
            w = lu_.solve(w);
            double dmax = 0.0, xmax = 1.0;
            for (int i = 0; i < 2; ++i)
            {
                const Vec dx = 2.0 * (v_(i, 0) * w).real();
                xs[i] += dx;
                if (nz > 0)
                    zs[i] -= s[i] + gzgx_ * dx;
                dmax = std::max(dmax, inf_norm(dx));
                xmax = std::max(xmax, inf_norm(xs[i]));
            }
            ++iters;
            if (dmax <= 1e-15 * xmax && res <= 1e3 * cfg_.newton_tol)
            {
                // Increment at roundoff level: the residual cannot improve further.
                for (int i = 0; i < 2; ++i)
                    dae_.residual(xs[i], u, zs[i], fs[i], gs[i]);
                break;
            }
        }
        (void)nx;
        const Vec x_n = x;
        x += db_(0) * (xs[0] - x_n) + db_(1) * (xs[1] - x_n);
        if (!state_ok(x))
            throw NonFiniteState(index);
        // The method is not stiffly accurate: restore g(x_{n+1}, z) = 0 explicitly.
        z = zs[1];
        if (nz > 0 && !chord_algebraic(x, u, z, iters))
        {
            try
            {
                z = solve_algebraic(dae_, x, u, zs[1], cfg_.newton_tol, cfg_.newton_max_iter, iters);
            }
            catch (const NoConvergence&)
            {
                throw NewtonDivergence(index);
            }
        }
        return iters;
    }

private:
    // Chord iterations on g(x, u, z) = 0 with the factored dg/dz of the step.
    bool chord_algebraic(const Vec& x, const Vec& u, Vec& z, int& iters)
    {
        Vec f, g;
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 8; ++it)
        {
            dae_.residual(x, u, z, f, g);
            const double r = inf_norm(g);
            if (!std::isfinite(r) || r > 0.5 * prev)
                return false;
            if (r <= cfg_.newton_tol)
                return true;
            const Vec dz = luz_.solve(g);
            z -= dz;
            ++iters;
            if (inf_norm(dz) <= 1e-14 * std::max(1.0, inf_norm(z)))
                return true;
            prev = r;
        }
        return false;
    }

    void factor(const Vec& x, const Vec& z, const Vec& u, double h, long index)
    {
        dae_.jacobian(x, u, z, jac_);
        const Index nx = dae_.nx();
        Mat at;
        if (dae_.nz() > 0)
        {
            luz_.compute(jac_.gz);
            if (!(luz_.rcond() > 1e-15))
                throw NewtonDivergence(index);
            gzgx_ = luz_.solve(jac_.gx);
            fz_ = jac_.fz;
            at = jac_.fx - fz_ * gzgx_;
        }
        else
        {
            at = jac_.fx;
        }
        CMat m = CMat::Identity(nx, nx) - (h * d_) * at.cast<Complex>();
        lu_.compute(m);
    }

    const DaeSystem& dae_;
    IntegratorConfig cfg_;
    Eigen::Matrix2d a_;
    Eigen::RowVector2d db_;
    Complex d_;
    Eigen::Matrix2cd v_, vinv_;
    DaeJacobian jac_;
    Eigen::PartialPivLU<Mat> luz_;
    Eigen::PartialPivLU<CMat> lu_;
    Mat gzgx_, fz_;
};

class Erk4Stepper
{
public:
    Erk4Stepper(const DaeSystem& dae, const IntegratorConfig& cfg) : dae_(dae), cfg_(cfg) {}

    int step(Vec& x, Vec& z, const Vec& u, double h, long index)
    {
        int iters = 0;
        auto slope = [&](const Vec& xs) {
            if (!state_ok(xs))
                throw NonFiniteState(index);
            try
            {
                z = solve_algebraic(dae_, xs, u, z, cfg_.newton_tol, cfg_.newton_max_iter, iters);
            }
            catch (const NoConvergence&)
            {
                throw NewtonDivergence(index);
            }
            return dae_.f(xs, u, z);
        };
        const Vec k1 = slope(x);
        const Vec k2 = slope(x + 0.5 * h * k1);
        const Vec k3 = slope(x + 0.5 * h * k2);
        const Vec k4 = slope(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!state_ok(x))
            throw NonFiniteState(index);
        try
        {
            z = solve_algebraic(dae_, x, u, z, cfg_.newton_tol, cfg_.newton_max_iter, iters);
        }
        catch (const NoConvergence&)
        {
            throw NewtonDivergence(index);
        }
        return iters;
    }

private:
    const DaeSystem& dae_;
    IntegratorConfig cfg_;
};

template <typename Stepper>
Trajectory run_fixed(const DaeSystem& dae, Stepper& stepper, const Vec& x0, const Vec& z0_guess,
                     const InputFn& u_of_t, const IntegratorConfig& cfg, double t_end)
{
    const std::vector<double> grid = fixed_grid(cfg.h, t_end);
    Trajectory traj;
    traj.reserve(static_cast<Index>(grid.size()), dae.nx(), dae.nz());

    Vec x = x0;
    Vec u = u_of_t(0.0);
    int it0 = 0;
    Vec z;
    try
    {
        z = solve_algebraic(dae, x, u, z0_guess, cfg.newton_tol, 50, it0);
    }
    catch (const NoConvergence&)
    {
        throw NewtonDivergence(0);
    }
    traj.record(0, 0.0, x, z);

    const auto start = std::chrono::steady_clock::now();
    for (std::size_t n = 1; n < grid.size(); ++n)
    {
        const double t = grid[n - 1];
        const double h = grid[n] - t;
        u = u_of_t(t);
        const int iters = stepper.step(x, z, u, h, static_cast<long>(n));
        traj.newton_iterations.push_back(iters);
        traj.record(static_cast<Index>(n), grid[n], x, z);
        ++traj.steps;
    }
    traj.wall_clock =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return traj;
}

} // namespace detail

/// Fixed-step integration from x0; z0_guess seeds the initial algebraic solve.
/// Samples every step, including t = 0 and t_end.
inline Trajectory integrate(const DaeSystem& dae, const Vec& x0, const Vec& z0_guess,
                            const InputFn& u_of_t, const IntegratorConfig& cfg, double t_end)
{
    if (x0.size() != dae.nx() || z0_guess.size() != dae.nz())
        throw DimensionMismatch("integrate: x0/z0 length mismatch");
    if (!(cfg.newton_tol > 0.0) || cfg.newton_max_iter <= 0)
        throw ConfigError("integrate: invalid Newton settings");
    if (cfg.method == Scheme::gl4)
    {
        detail::Gl4Stepper stepper(dae, cfg);
        return detail::run_fixed(dae, stepper, x0, z0_guess, u_of_t, cfg, t_end);
    }
    detail::Erk4Stepper stepper(dae, cfg);
    return detail::run_fixed(dae, stepper, x0, z0_guess, u_of_t, cfg, t_end);
}

} // namespace stiffmor

#endif
