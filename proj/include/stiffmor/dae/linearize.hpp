// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file linearize.hpp
///
/// Operating points, index-1 diagnostics and linearization of a
/// semi-explicit DAE, including the collapse of the linear DAE onto the
/// explicit ODE  d/dt dx = At dx + Bt du + bt.
///
#ifndef STIFFMOR_DAE_LINEARIZE_HPP
#define STIFFMOR_DAE_LINEARIZE_HPP

#include <limits>

#include "stiffmor/dae/newton.hpp"
#include "stiffmor/dae/system.hpp"

namespace stiffmor
{

struct OperatingPoint
{
    Vec x, u, z;
    double residual_norm = 0.0;
};

struct EquilibriumOptions
{
    double tol_eq = 1e-10;
    int max_iter = 100;
};

/// Damped Newton on the stacked residual (f, g) over w = (x, z) with u fixed.
inline OperatingPoint solve_equilibrium(const DaeSystem& dae, const Vec& u_fixed,
                                        const Vec& guess, const EquilibriumOptions& opt = {})
{
    const Index nx = dae.nx(), nz = dae.nz();
    if (guess.size() != nx + nz || u_fixed.size() != dae.nu())
        throw DimensionMismatch("solve_equilibrium: guess must have length nx+nz");

    Vec f, g;
    auto residual = [&](const Vec& w) {
        dae.residual(w.head(nx), u_fixed, w.tail(nz), f, g);
        Vec r(nx + nz);
        r << f, g;
        return r;
    };
    DaeJacobian jac;
    auto jacobian = [&](const Vec& w) {
        dae.jacobian(w.head(nx), u_fixed, w.tail(nz), jac);
        Mat m(nx + nz, nx + nz);
        m << jac.fx, jac.fz, jac.gx, jac.gz;
        return m;
    };
    NewtonOptions nopt;
    nopt.tol = opt.tol_eq;
    nopt.max_iter = opt.max_iter;
    NewtonResult res = damped_newton(residual, jacobian, guess, nopt);
    return {res.x.head(nx), u_fixed, res.x.tail(nz), res.residual};
}

struct Index1Diagnostic
{
    bool full_rank = true;
    double smallest_singular_value = std::numeric_limits<double>::infinity();
};

/// Smallest singular value of dg/dz; full rank iff it exceeds rank_tol * sigma_max.
inline Index1Diagnostic check_index1(const DaeSystem& dae, const OperatingPoint& at,
                                     double rank_tol = 1e-10)
{
    if (dae.nz() == 0)
        return {};
    const DaeJacobian jac = dae.jacobian(at.x, at.u, at.z);
    Eigen::JacobiSVD<Mat> svd(jac.gz);
    const auto& s = svd.singularValues();
    const double smax = s(0);
    const double smin = s(s.size() - 1);
    return {smin > rank_tol * smax, smin};
}

struct LinearizedSystem
{
    Mat A_xx, B_xu, A_xz;
    Vec b_x;
    Mat A_zx, B_zu, A_zz;
    Vec b_z;
    Mat A_tilde, B_tilde;
    Vec b_tilde;
    OperatingPoint point;
    double azz_rcond = 1.0; ///< reciprocal condition estimate of A_zz

    Index nx() const { return A_xx.rows(); }
    Index nu() const { return B_xu.cols(); }
    Index nz() const { return A_zz.rows(); }
};

/// Linearizes around `at` and eliminates the algebraic increments with an LU
/// solve against A_zz.
inline LinearizedSystem linearize(const DaeSystem& dae, const OperatingPoint& at,
                                  double rcond_min = 1e-14)
{
    LinearizedSystem lin;
    lin.point = at;
    const DaeJacobian jac = dae.jacobian(at.x, at.u, at.z);
    lin.A_xx = jac.fx;
    lin.B_xu = jac.fu;
    lin.A_xz = jac.fz;
    lin.A_zx = jac.gx;
    lin.B_zu = jac.gu;
    lin.A_zz = jac.gz;
    dae.residual(at.x, at.u, at.z, lin.b_x, lin.b_z);

    if (dae.nz() == 0)
    {
        lin.A_tilde = lin.A_xx;
        lin.B_tilde = lin.B_xu;
        lin.b_tilde = lin.b_x;
        return lin;
    }
    Eigen::PartialPivLU<Mat> lu(lin.A_zz);
    lin.azz_rcond = lu.rcond();
    if (!(lin.azz_rcond > rcond_min))
        throw IndexViolation("A_zz is numerically singular (rcond " +
                             std::to_string(lin.azz_rcond) + ")");
    const Mat sx = lu.solve(lin.A_zx);
    const Mat su = lu.solve(lin.B_zu);
    const Vec sb = lu.solve(lin.b_z);
    lin.A_tilde = lin.A_xx - lin.A_xz * sx;
    lin.B_tilde = lin.B_xu - lin.A_xz * su;
    lin.b_tilde = lin.b_x - lin.A_xz * sb;
    return lin;
}

} // namespace stiffmor

#endif
