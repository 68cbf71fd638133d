// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file balanced.hpp
///
/// Square-root balancing transform from the reachability and observability
/// Gramians.
///
#ifndef STIFFMOR_MODAL_BALANCED_HPP
#define STIFFMOR_MODAL_BALANCED_HPP

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "stiffmor/modal/lyapunov.hpp"

namespace stiffmor
{

struct BalancedTransform
{
    Mat W_r, W_o; ///< Lyapunov solutions
    Mat L_r, L_o; ///< lower Cholesky factors of the floored Gramians
    Vec hankel;   ///< nonincreasing
    Mat U, V;     ///< SVD factors of L_o^T L_r
    Mat T, T_inv;
};

namespace detail
{

// Clamp the spectrum of a symmetric PSD matrix at floor_rel * trace and
// return its Cholesky factor.
inline Mat floored_cholesky(const Mat& w, double floor_rel, const char* name)
{
    const Mat sym = 0.5 * (w + w.transpose());
    const double floor = floor_rel * std::max(sym.trace(), 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    if (es.info() != Eigen::Success)
        throw IndefiniteGramian(std::string(name) + ": eigen-decomposition failed");
    Vec d = es.eigenvalues();
    const double min_allowed = floor > 0.0 ? floor : std::numeric_limits<double>::min();
    for (Index i = 0; i < d.size(); ++i)
        d(i) = std::max(d(i), min_allowed);
    const Mat wf = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    Eigen::LLT<Mat> llt(0.5 * (wf + wf.transpose()));
    if (llt.info() != Eigen::Success)
        throw IndefiniteGramian(std::string(name) + ": Cholesky failed after flooring");
    return llt.matrixL();
}

} // namespace detail

/// Requires A Hurwitz. W_r solves A W + W A^T + B B^T = 0 and W_o solves
/// A^T W + W A + C^T C = 0.
inline BalancedTransform balanced_transform(const Mat& a, const Mat& b, const Mat& c,
                                            double floor_rel = 1e-14)
{
    const Index n = a.rows();
    if (a.cols() != n || b.rows() != n || c.cols() != n)
        throw DimensionMismatch("balanced_transform: incompatible A, B, C");
    Eigen::EigenSolver<Mat> es(a, false);
    for (Index i = 0; i < n; ++i)
        if (!(es.eigenvalues()(i).real() < 0.0))
            throw UnstableSystem("balanced_transform: eigenvalue with Re >= 0: " +
                                 std::to_string(es.eigenvalues()(i).real()));

    BalancedTransform bt;
    bt.W_r = solve_lyapunov(a, b * b.transpose());
    bt.W_o = solve_lyapunov(a.transpose(), c.transpose() * c);
    bt.L_r = detail::floored_cholesky(bt.W_r, floor_rel, "W_r");
    bt.L_o = detail::floored_cholesky(bt.W_o, floor_rel, "W_o");

    Eigen::JacobiSVD<Mat> svd(bt.L_o.transpose() * bt.L_r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    bt.hankel = svd.singularValues();
    bt.U = svd.matrixU();
    bt.V = svd.matrixV();
    const Vec isq = bt.hankel.cwiseSqrt().cwiseInverse();
    bt.T = bt.L_r * bt.V * isq.asDiagonal();
    bt.T_inv = isq.asDiagonal() * bt.U.transpose() * bt.L_o.transpose();
    return bt;
}

} // namespace stiffmor

#endif
