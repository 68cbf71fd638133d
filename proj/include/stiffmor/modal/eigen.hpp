// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file eigen.hpp
///
/// Ordered eigendecomposition of the collapsed state matrix and the
/// stiffness ratio built on it.
///
#ifndef STIFFMOR_MODAL_EIGEN_HPP
#define STIFFMOR_MODAL_EIGEN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "stiffmor/common.hpp"

namespace stiffmor
{

//
// Eigenvalues sorted by ascending real part (most negative first), with
// biorthonormal right/left eigenvectors: v_i^T y_i = 1 (plain transpose).
// Conjugate pairs sit at adjacent indices with the +Im member first.
//
struct ModeBasis
{
    Mat matrix;             ///< the decomposed matrix
    CVec eigenvalues;
    CMat right;             ///< column i is y_i, unit 2-norm
    CMat left;              ///< column i is v_i
    std::vector<Index> partner; ///< conjugate partner index, -1 for real modes
    double condition = 1.0; ///< 2-norm condition number of [y_1 ... y_n]

    Index size() const { return eigenvalues.size(); }
    bool is_real(Index i) const { return partner[static_cast<std::size_t>(i)] < 0; }
};

namespace detail
{

// Largest-magnitude entry, first index on ties.
template <typename V>
Index argmax_abs(const V& v)
{
    Index best = 0;
    double m = -1.0;
    for (Index k = 0; k < v.size(); ++k)
    {
        const double a = std::abs(v(k));
        if (a > m)
        {
            m = a;
            best = k;
        }
    }
    return best;
}

// Phase of a complex eigenvector: make Re(y) orthogonal to Im(y) with
// ||Re y|| >= ||Im y||, and the largest Re entry positive. When y^T y vanishes
// (circular vector) the largest entry is made real positive instead.
inline void normalize_complex_phase(CVec& y)
{
    const Complex s = (y.transpose() * y)(0);
    if (std::abs(s) > 1e-8 * y.squaredNorm())
    {
        y *= std::exp(Complex(0.0, -0.5 * std::arg(s)));
        const Vec re = y.real();
        const Index k = argmax_abs(re);
        if (re(k) < 0.0)
            y = -y;
    }
    else
    {
        const Index k = argmax_abs(y);
        y *= std::conj(y(k)) / std::abs(y(k));
    }
}

} // namespace detail

/// Sorted eigenbasis. Throws DefectiveMatrix when cond([y]) exceeds cond_max.
inline ModeBasis eig_sorted(const Mat& a, double cond_max = 1e12)
{
    if (a.rows() != a.cols())
        throw DimensionMismatch("eig_sorted: matrix must be square");
    if (!a.allFinite())
        throw NumericalError("eig_sorted: matrix has non-finite entries");
    const Index n = a.rows();
    ModeBasis basis;
    basis.matrix = a;
    if (n == 0)
        return basis;

    Eigen::EigenSolver<Mat> es(a, true);
    if (es.info() != Eigen::Success)
        throw NumericalError("eig_sorted: eigenvalue iteration failed");
    const CVec lam = es.eigenvalues();
    const CMat vec = es.eigenvectors();

    // Build conjugate-consistent unit eigenvectors in Eigen's order.
    CMat y(n, n);
    std::vector<Index> raw_partner(static_cast<std::size_t>(n), -1);
    for (Index i = 0; i < n; ++i)
    {
        if (lam(i).imag() == 0.0)
        {
            Vec r = vec.col(i).real();
            r.normalize();
            if (r(detail::argmax_abs(r)) < 0.0)
                r = -r;
            y.col(i) = r.cast<Complex>();
        }
        else if (lam(i).imag() > 0.0)
        {
            // Eigen stores pairs as (+Im, -Im) at consecutive indices.
            CVec c = vec.col(i);
            c.normalize();
            detail::normalize_complex_phase(c);
            y.col(i) = c;
            y.col(i + 1) = c.conjugate();
            raw_partner[static_cast<std::size_t>(i)] = i + 1;
            raw_partner[static_cast<std::size_t>(i + 1)] = i;
            ++i;
        }
        else
        {
            throw NumericalError("eig_sorted: unexpected conjugate-pair layout");
        }
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index p, Index q) {
        const Complex lp = lam(p), lq = lam(q);
        if (lp.real() != lq.real())
            return lp.real() < lq.real();
        if (std::abs(lp.imag()) != std::abs(lq.imag()))
            return std::abs(lp.imag()) < std::abs(lq.imag());
        if (lp.imag() != lq.imag())
            return lp.imag() > lq.imag();
        return p < q;
    });
    std::vector<Index> position(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k)
        position[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = k;

    basis.eigenvalues.resize(n);
    basis.right.resize(n, n);
    basis.partner.assign(static_cast<std::size_t>(n), -1);
    for (Index k = 0; k < n; ++k)
    {
        const Index src = order[static_cast<std::size_t>(k)];
        basis.eigenvalues(k) = lam(src);
        basis.right.col(k) = y.col(src);
        const Index p = raw_partner[static_cast<std::size_t>(src)];
        if (p >= 0)
            basis.partner[static_cast<std::size_t>(k)] = position[static_cast<std::size_t>(p)];
    }

    Eigen::JacobiSVD<CMat> svd(basis.right);
    const auto& s = svd.singularValues();
    basis.condition = s(n - 1) > 0.0 ? s(0) / s(n - 1) : std::numeric_limits<double>::infinity();
    if (!(basis.condition <= cond_max))
        throw DefectiveMatrix("eigenvector matrix condition " + std::to_string(basis.condition) +
                              " exceeds " + std::to_string(cond_max));

    // Left eigenvectors are the rows of Y^{-1}, rescaled so that v_i^T y_i = 1.
    const CMat yinv = basis.right.partialPivLu().inverse();
    basis.left = yinv.transpose();
    for (Index i = 0; i < n; ++i)
    {
        const Complex d = (basis.left.col(i).transpose() * basis.right.col(i))(0);
        basis.left.col(i) /= d;
    }
    return basis;
}

struct StiffnessReport
{
    double rho = 1.0;          ///< |Re l_1| / |Re l_n|
    double rho_filtered = 1.0; ///< same, against the slowest mode with |Re| > slow_floor
    bool asymptotically_stable = true;
    bool slow_mode_warning = false; ///< |Re l_n| below 1e-9
    Complex fastest, slowest, slowest_filtered;
};

/// Stiffness ratio of a sorted basis. Never throws; flags instead.
inline StiffnessReport stiffness_ratio(const ModeBasis& basis, double slow_floor = 1e-6)
{
    StiffnessReport rep;
    const Index n = basis.size();
    if (n == 0)
        return rep;
    rep.fastest = basis.eigenvalues(0);
    rep.slowest = basis.eigenvalues(n - 1);
    rep.asymptotically_stable = rep.slowest.real() < 0.0;
    rep.slow_mode_warning = std::abs(rep.slowest.real()) < 1e-9;
    const double fast = std::abs(rep.fastest.real());
    rep.rho = fast / std::abs(rep.slowest.real());

    rep.slowest_filtered = rep.slowest;
    for (Index i = n - 1; i >= 0; --i)
    {
        if (std::abs(basis.eigenvalues(i).real()) > slow_floor)
        {
            rep.slowest_filtered = basis.eigenvalues(i);
            break;
        }
    }
    rep.rho_filtered = fast / std::abs(rep.slowest_filtered.real());
    return rep;
}

/// Convenience overload on raw eigenvalues (any order).
inline StiffnessReport stiffness_ratio(const CVec& eigenvalues, double slow_floor = 1e-6)
{
    ModeBasis b;
    std::vector<Complex> v(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::stable_sort(v.begin(), v.end(),
                     [](const Complex& p, const Complex& q) { return p.real() < q.real(); });
    b.eigenvalues = Eigen::Map<const CVec>(v.data(), static_cast<Index>(v.size()));
    return stiffness_ratio(b, slow_floor);
}

} // namespace stiffmor

#endif
