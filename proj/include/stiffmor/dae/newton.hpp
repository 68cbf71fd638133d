// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STIFFMOR_DAE_NEWTON_HPP
#define STIFFMOR_DAE_NEWTON_HPP

#include <cmath>
#include <functional>

#include "stiffmor/common.hpp"

namespace stiffmor
{

struct NewtonOptions
{
    double tol = 1e-10;    ///< on the infinity norm of the residual
    int max_iter = 100;
    double armijo = 1e-4;  ///< sufficient-decrease constant
    double min_damping = 1.0 / 1024.0;
    double rcond_min = 1e-15;
};

struct NewtonResult
{
    Vec x;
    double residual = 0.0;
    int iterations = 0;
};

/// Damped Newton with Armijo backtracking on the 2-norm of the residual.
///
/// `residual(w)` returns F(w); `jacobian(w)` returns dF/dw. Convergence is
/// judged on ||F||_inf only, so a stalled iterate never counts as a solution.
template <typename ResidualFn, typename JacobianFn>
NewtonResult damped_newton(ResidualFn&& residual, JacobianFn&& jacobian, Vec w,
                           const NewtonOptions& opt = {})
{
    Vec r = residual(w);
    double norm_inf = inf_norm(r);
    if (!std::isfinite(norm_inf))
        throw NoConvergence(0, norm_inf, "non-finite residual at initial guess");

    for (int it = 0; it < opt.max_iter; ++it)
    {
        if (norm_inf <= opt.tol)
            return {std::move(w), norm_inf, it};

        const Mat jac = jacobian(w);
        Eigen::PartialPivLU<Mat> lu(jac);
        if (!(lu.rcond() > opt.rcond_min))
            throw SingularJacobian("Newton Jacobian is singular (rcond " +
                                   std::to_string(lu.rcond()) + ") at iteration " +
                                   std::to_string(it));
        const Vec step = lu.solve(-r);

        const double phi0 = 0.5 * r.squaredNorm();
        double damping = 1.0;
        Vec trial;
        Vec r_trial;
        while (true)
        {
            trial = w + damping * step;
            r_trial = residual(trial);
            const double phi = 0.5 * r_trial.squaredNorm();
            if (std::isfinite(phi) && phi <= (1.0 - 2.0 * opt.armijo * damping) * phi0)
                break;
            damping *= 0.5;
            if (damping < opt.min_damping)
                break; // accept the short step; the residual gate decides later
        }
        if (!std::isfinite(inf_norm(r_trial)))
            throw NoConvergence(it + 1, norm_inf, "non-finite residual during line search");
        w = std::move(trial);
        r = std::move(r_trial);
        norm_inf = inf_norm(r);
    }
    if (norm_inf <= opt.tol)
        return {std::move(w), norm_inf, opt.max_iter};
    throw NoConvergence(opt.max_iter, norm_inf);
}

} // namespace stiffmor

#endif
