// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file jordan.hpp
///
/// Real Jordan (modal) transform of a diagonalizable real matrix.
///
#ifndef STIFFMOR_MODAL_JORDAN_HPP
#define STIFFMOR_MODAL_JORDAN_HPP

#include <cmath>
#include <string>
#include <vector>

#include "stiffmor/modal/eigen.hpp"

namespace stiffmor
{

//
// A = T J T^{-1}, J block diagonal with 1x1 blocks for real eigenvalues and
// [[a, b], [-b, a]] for a pair a +- jb. Columns of T follow the eigenvalue
// order of the basis, so the fastest modes occupy the leading columns.
//
struct RealJordanTransform
{
    Mat T, T_inv, J;
    std::vector<Index> block_start; ///< first column of each diagonal block
    std::vector<Index> block_size;  ///< 1 or 2
    double condition = 1.0;
    double reconstruction_error = 0.0; ///< ||T J T^{-1} - A||_F / ||A||_F
};

struct JordanOptions
{
    double off_block_tol = 1e-8;   ///< relative to max(1, ||A||_F)
    double reconstruction_tol = 1e-9;
    double cond_max = 1e10;
};

inline RealJordanTransform real_jordan(const ModeBasis& basis, const JordanOptions& opt = {})
{
    const Index n = basis.size();
    const Mat& a = basis.matrix;
    RealJordanTransform rj;
    rj.T.resize(n, n);
    for (Index i = 0; i < n; ++i)
    {
        rj.block_start.push_back(i);
        if (basis.is_real(i))
        {
            rj.T.col(i) = basis.right.col(i).real().normalized();
            rj.block_size.push_back(1);
        }
        else
        {
            if (basis.partner[static_cast<std::size_t>(i)] != i + 1 ||
                basis.eigenvalues(i).imag() <= 0.0)
                throw NumericalError("real_jordan: conjugate pair not adjacent");
            // Rotate the eigenvector phase so that |Re y| = |Im y|; the
            // normalized columns then keep J in rotation-scaling form.
            const CVec y = basis.right.col(i);
            const Vec re = y.real(), im = y.imag();
            const double phi = 0.5 * std::atan2(re.squaredNorm() - im.squaredNorm(), 2.0 * re.dot(im));
            const CVec yr = y * std::polar(1.0, phi);
            rj.T.col(i) = yr.real().normalized();
            rj.T.col(i + 1) = yr.imag().normalized();
            rj.block_size.push_back(2);
            ++i;
        }
    }
    if (n == 0)
        return rj;

    Eigen::JacobiSVD<Mat> svd(rj.T);
    const auto& s = svd.singularValues();
    rj.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
    if (!(rj.condition <= opt.cond_max))
        throw IllConditionedTransform("cond(T_J) = " + std::to_string(rj.condition));

    rj.T_inv = rj.T.partialPivLu().inverse();
    const Mat full = rj.T_inv * a * rj.T;

    const double a_norm = a.norm();
    const double off_tol = opt.off_block_tol * std::max(1.0, a_norm);
    rj.J = Mat::Zero(n, n);
    double off_max = 0.0;
    std::vector<Index> owner(static_cast<std::size_t>(n));
    for (std::size_t b = 0; b < rj.block_start.size(); ++b)
        for (Index k = 0; k < rj.block_size[b]; ++k)
            owner[static_cast<std::size_t>(rj.block_start[b] + k)] = static_cast<Index>(b);
    for (Index c = 0; c < n; ++c)
        for (Index r = 0; r < n; ++r)
        {
            if (owner[static_cast<std::size_t>(r)] == owner[static_cast<std::size_t>(c)])
                rj.J(r, c) = full(r, c);
            else
                off_max = std::max(off_max, std::abs(full(r, c)));
        }
    if (!(off_max <= off_tol))
        throw ReconstructionFailure("off-block entry " + std::to_string(off_max) +
                                    " exceeds " + std::to_string(off_tol));

    const double denom = a_norm > 0.0 ? a_norm : 1.0;
    rj.reconstruction_error = (rj.T * rj.J * rj.T_inv - a).norm() / denom;
    if (!(rj.reconstruction_error <= opt.reconstruction_tol))
        throw ReconstructionFailure("relative reconstruction error " +
                                    std::to_string(rj.reconstruction_error));
    return rj;
}

} // namespace stiffmor

#endif
