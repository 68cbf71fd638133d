// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file lyapunov.hpp
///
/// Dense continuous Lyapunov solver  A X + X A^T + Q = 0  by Bartels-Stewart:
/// real Schur form of A, then block back-substitution over the 1x1 and 2x2
/// diagonal blocks.
///
#ifndef STIFFMOR_MODAL_LYAPUNOV_HPP
#define STIFFMOR_MODAL_LYAPUNOV_HPP

#include <vector>

#include <Eigen/Eigenvalues>

#include "stiffmor/common.hpp"

namespace stiffmor
{

inline Mat solve_lyapunov(const Mat& a, const Mat& q)
{
    const Index n = a.rows();
    if (a.cols() != n || q.rows() != n || q.cols() != n)
        throw DimensionMismatch("solve_lyapunov: A and Q must be square and of equal size");
    if (n == 0)
        return Mat(0, 0);

    Eigen::RealSchur<Mat> schur(a);
    if (schur.info() != Eigen::Success)
        throw NumericalError("solve_lyapunov: Schur iteration failed");
    const Mat& s = schur.matrixT();
    const Mat& u = schur.matrixU();
    const Mat c = u.transpose() * q * u;

    std::vector<Index> start, size;
    for (Index k = 0; k < n;)
    {
        const Index p = (k + 1 < n && s(k + 1, k) != 0.0) ? 2 : 1;
        start.push_back(k);
        size.push_back(p);
        k += p;
    }
    const Index nb = static_cast<Index>(start.size());

    // S Y + Y S^T = -C, solved block by block from the bottom-right corner.
    Mat y = Mat::Zero(n, n);
    for (Index jb = nb - 1; jb >= 0; --jb)
    {
        const Index cj = start[static_cast<std::size_t>(jb)];
        const Index qj = size[static_cast<std::size_t>(jb)];
        const Index tail_c = n - (cj + qj);
        for (Index ib = nb - 1; ib >= 0; --ib)
        {
            const Index ri = start[static_cast<std::size_t>(ib)];
            const Index pi = size[static_cast<std::size_t>(ib)];
            const Index tail_r = n - (ri + pi);

            Mat rhs = -c.block(ri, cj, pi, qj);
            if (tail_r > 0)
                rhs.noalias() -= s.block(ri, ri + pi, pi, tail_r) * y.block(ri + pi, cj, tail_r, qj);
            if (tail_c > 0)
                rhs.noalias() -=
                    y.block(ri, cj + qj, pi, tail_c) * s.block(cj, cj + qj, qj, tail_c).transpose();

            // (I_q (x) S_ii + S_jj (x) I_p) vec(Y_ij) = vec(rhs)
            const Index m = pi * qj;
            Mat k = Mat::Zero(m, m);
            const Mat sii = s.block(ri, ri, pi, pi);
            const Mat sjj = s.block(cj, cj, qj, qj);
            for (Index b = 0; b < qj; ++b)
                k.block(b * pi, b * pi, pi, pi) += sii;
            for (Index b1 = 0; b1 < qj; ++b1)
                for (Index b2 = 0; b2 < qj; ++b2)
                    k.block(b1 * pi, b2 * pi, pi, pi) += sjj(b1, b2) * Mat::Identity(pi, pi);
            const Vec rv = Eigen::Map<const Vec>(rhs.data(), m);
            Eigen::FullPivLU<Mat> lu(k);
            if (!lu.isInvertible())
                throw NumericalError("solve_lyapunov: A and -A share an eigenvalue");
            const Vec sol = lu.solve(rv);
            y.block(ri, cj, pi, qj) = Eigen::Map<const Mat>(sol.data(), pi, qj);
        }
    }
    Mat x = u * y * u.transpose();
    return 0.5 * (x + x.transpose());
}

} // namespace stiffmor

#endif
