// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include <unsupported/Eigen/KroneckerProduct>

#include "stiffmor/modal/balanced.hpp"
#include "stiffmor/modal/eigen.hpp"
#include "stiffmor/modal/jordan.hpp"
#include "stiffmor/modal/lyapunov.hpp"
#include "stiffmor/modal/participation.hpp"

#include "test_util.hpp"

using namespace stiffmor;
using stiffmor::testing::random_hurwitz;

TEST_CASE("eig_sorted orders by real part, fastest first")
{
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -1000.0;
    const ModeBasis b = eig_sorted(a);
    CHECK(b.eigenvalues(0).real() == doctest::Approx(-1000.0));
    CHECK(b.eigenvalues(1).real() == doctest::Approx(-1.0));
    CHECK(stiffness_ratio(b).rho == doctest::Approx(1000.0));
    CHECK(stiffness_ratio(b).asymptotically_stable);
}

TEST_CASE("eig_sorted keeps conjugate pairs adjacent, +Im first")
{
    Mat a(2, 2);
    a << -1.0, 2.0, -2.0, -1.0;
    const ModeBasis b = eig_sorted(a);
    CHECK(b.eigenvalues(0).real() == doctest::Approx(-1.0));
    CHECK(b.eigenvalues(0).imag() == doctest::Approx(2.0));
    CHECK(b.eigenvalues(1).imag() == doctest::Approx(-2.0));
    CHECK(b.partner[0] == 1);
    CHECK(b.partner[1] == 0);
}

TEST_CASE("eig_sorted invariants on random stable matrices")
{
    std::mt19937 rng(21);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto [a, lam] = random_hurwitz(rng, 12, 4);
        const ModeBasis b = eig_sorted(a);
        const Index n = a.rows();
        const double an = a.norm();
        for (Index i = 0; i + 1 < n; ++i)
            CHECK(b.eigenvalues(i).real() <= b.eigenvalues(i + 1).real() + 1e-12 * an);
        for (Index i = 0; i < n; ++i)
        {
            const CVec y = b.right.col(i), v = b.left.col(i);
            CHECK(std::abs((v.transpose() * y)(0) - 1.0) <= 1e-12);
            CHECK((a * y - b.eigenvalues(i) * y).norm() <= 1e-9 * an * y.norm());
            CHECK((v.transpose() * a - b.eigenvalues(i) * v.transpose()).norm() <= 1e-9 * an * v.norm());
            if (!b.is_real(i))
            {
                const Index p = b.partner[static_cast<std::size_t>(i)];
                CHECK(std::abs(p - i) == 1);
                CHECK(std::abs(b.eigenvalues(p) - std::conj(b.eigenvalues(i))) <= 1e-10 * an);
            }
        }
        // Eigenvalues match the construction.
        std::vector<double> got, want;
        for (Index i = 0; i < n; ++i)
        {
            got.push_back(b.eigenvalues(i).real() + 1e-3 * b.eigenvalues(i).imag());
            want.push_back(lam(i).real() + 1e-3 * lam(i).imag());
        }
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        for (std::size_t k = 0; k < got.size(); ++k)
            CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-8));

        // Spectral reconstruction sum_i l_i y_i v_i^T.
        CMat rec = CMat::Zero(n, n);
        for (Index i = 0; i < n; ++i)
            rec += b.eigenvalues(i) * b.right.col(i) * b.left.col(i).transpose();
        CHECK((rec.real() - a).norm() <= 1e-8 * an);
        CHECK(rec.imag().norm() <= 1e-8 * an);
        CHECK(stiffness_ratio(b).rho >= 1.0);
    }
}

TEST_CASE("eig_sorted rejects defective and non-finite input")
{
    Mat jordan_block(2, 2);
    jordan_block << -1.0, 1.0, 0.0, -1.0;
    CHECK_THROWS_AS(eig_sorted(jordan_block), DefectiveMatrix);
    Mat bad = Mat::Identity(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS(eig_sorted(bad));
}

TEST_CASE("stiffness ratio flags instability and near-zero slow modes")
{
    CVec lam(3);
    lam << Complex(-100.0, 0.0), Complex(-1.0, 0.0), Complex(0.5, 0.0);
    const StiffnessReport r = stiffness_ratio(lam);
    CHECK_FALSE(r.asymptotically_stable);
    CHECK(r.rho == doctest::Approx(200.0));

    CVec lam2(3);
    lam2 << Complex(-100.0, 0.0), Complex(-2.0, 0.0), Complex(-1e-12, 0.0);
    const StiffnessReport r2 = stiffness_ratio(lam2);
    CHECK(r2.slow_mode_warning);
    CHECK(r2.rho == doctest::Approx(1e14));
    CHECK(r2.rho_filtered == doctest::Approx(50.0));
}

TEST_CASE("participation matrix of a diagonal matrix is the identity")
{
    Vec d(4);
    d << -3.0, -10.0, -1.0, -7.0;
    const ModeBasis b = eig_sorted(d.asDiagonal().toDenseMatrix());
    const ParticipationMatrix p = participation_matrix(b);
    // Modes sorted: -10 (state 1), -7 (state 3), -3 (state 0), -1 (state 2).
    const Index owner[] = {1, 3, 0, 2};
    for (Index i = 0; i < 4; ++i)
        for (Index k = 0; k < 4; ++k)
            CHECK(std::abs(p.raw(k, i) - Complex(k == owner[i] ? 1.0 : 0.0)) <= 1e-12);
}

TEST_CASE("participation matrix of the companion matrix matches hand eigenvectors")
{
    Mat a(2, 2);
    a << 0.0, 1.0, -2.0, -3.0;
    const ParticipationMatrix p = participation_matrix(eig_sorted(a));
    // Y = [[1, 1], [-1, -2]] for (-1, -2); V^T = Y^{-1} = [[2, 1], [-1, -1]].
    // Mode -2 (first): (-1, 2); mode -1: (2, -1).
    CHECK(p.raw(0, 0).real() == doctest::Approx(-1.0));
    CHECK(p.raw(1, 0).real() == doctest::Approx(2.0));
    CHECK(p.raw(0, 1).real() == doctest::Approx(2.0));
    CHECK(p.raw(1, 1).real() == doctest::Approx(-1.0));
    CHECK(p.magnitude(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("participation rows and columns sum to one")
{
    std::mt19937 rng(8);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Mat a = random_hurwitz(rng, 8, 2).first;
        const ParticipationMatrix p = participation_matrix(eig_sorted(a));
        for (Index i = 0; i < 8; ++i)
        {
            CHECK(std::abs(p.raw.col(i).sum() - 1.0) <= 1e-10);
            CHECK(std::abs(p.raw.row(i).sum() - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("participation of a block-diagonal matrix is block-diagonal")
{
    std::mt19937 rng(9);
    const Mat a1 = random_hurwitz(rng, 4, 1).first;
    const Mat a2 = 10.0 * random_hurwitz(rng, 3, 1).first;
    Mat a = Mat::Zero(7, 7);
    a.topLeftCorner(4, 4) = a1;
    a.bottomRightCorner(3, 3) = a2;
    const ModeBasis b = eig_sorted(a);
    const ParticipationMatrix p = participation_matrix(b);
    for (Index i = 0; i < 7; ++i)
    {
        // A mode belongs to the block whose states carry its eigenvector.
        const bool first = b.right.col(i).head(4).norm() > b.right.col(i).tail(3).norm();
        const double off = first ? p.magnitude.col(i).tail(3).maxCoeff() : p.magnitude.col(i).head(4).maxCoeff();
        CHECK(off <= 1e-10);
    }
}

TEST_CASE("real Jordan form of small known matrices")
{
    Mat rot(2, 2);
    rot << -1.0, 2.0, -2.0, -1.0;
    const RealJordanTransform r = real_jordan(eig_sorted(rot));
    CHECK((r.J - rot).norm() <= 1e-12);
    CHECK((r.T.cwiseAbs() - Mat::Identity(2, 2)).norm() <= 1e-12);

    Mat d = Mat::Zero(2, 2);
    d(0, 0) = -3.0;
    d(1, 1) = -7.0;
    const RealJordanTransform rd = real_jordan(eig_sorted(d));
    // Fastest first: -7 then -3, so T is a permutation up to sign.
    CHECK(rd.J(0, 0) == doctest::Approx(-7.0));
    CHECK(rd.J(1, 1) == doctest::Approx(-3.0));
    CHECK(rd.J(0, 1) == 0.0);
    CHECK(std::abs(rd.T(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(rd.T(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("real Jordan reconstruction on random matrices with complex pairs")
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 20; ++trial)
    {
        const Mat a = random_hurwitz(rng, 12, 4).first;
        const ModeBasis b = eig_sorted(a);
        const RealJordanTransform r = real_jordan(b);
        CHECK(r.reconstruction_error <= 1e-10);
        // Independent check of the stored value.
        CHECK((r.T * r.J * r.T_inv - a).norm() / a.norm() <= 1e-10);
        for (Index c = 0; c < 12; ++c)
            CHECK(std::abs(r.T.col(c).norm() - 1.0) <= 1e-12);
        // Off-block entries are exactly zero.
        std::vector<Index> owner(12);
        for (std::size_t k = 0; k < r.block_start.size(); ++k)
            for (Index j = 0; j < r.block_size[k]; ++j)
                owner[static_cast<std::size_t>(r.block_start[k] + j)] = static_cast<Index>(k);
        for (Index i = 0; i < 12; ++i)
            for (Index j = 0; j < 12; ++j)
                if (owner[static_cast<std::size_t>(i)] != owner[static_cast<std::size_t>(j)])
                    CHECK(r.J(i, j) == 0.0);
        // 2x2 blocks have the rotation-scaling pattern [[a, b], [-b, a]].
        for (std::size_t k = 0; k < r.block_start.size(); ++k)
            if (r.block_size[k] == 2)
            {
                const Index s = r.block_start[k];
                CHECK(r.J(s, s) == doctest::Approx(r.J(s + 1, s + 1)));
                CHECK(r.J(s, s + 1) == doctest::Approx(-r.J(s + 1, s)));
                CHECK(r.J(s, s) == doctest::Approx(b.eigenvalues(s).real()));
            }
    }
}

TEST_CASE("real Jordan form of a real Jordan matrix is a signed permutation")
{
    Mat j = Mat::Zero(5, 5);
    j(0, 0) = -2.0;
    j.block(1, 1, 2, 2) << -5.0, 3.0, -3.0, -5.0;
    j(3, 3) = -0.5;
    j(4, 4) = -9.0;
    const RealJordanTransform r = real_jordan(eig_sorted(j));
    for (Index a = 0; a < 5; ++a)
        for (Index b = 0; b < 5; ++b)
        {
            const double v = std::abs(r.T(a, b));
            CHECK((v <= 1e-12 || std::abs(v - 1.0) <= 1e-12));
        }
}

TEST_CASE("Lyapunov solver residual")
{
    std::mt19937 rng(4);
    for (int trial = 0; trial < 10; ++trial)
    {
        const Mat a = random_hurwitz(rng, 10, 3).first;
        const Mat bq = Mat::Random(10, 3);
        const Mat q = bq * bq.transpose();
        const Mat w = solve_lyapunov(a, q);
        CHECK((a * w + w * a.transpose() + q).norm() <= 1e-9 * q.norm());
        CHECK((w - w.transpose()).norm() <= 1e-14 * w.norm());
    }
}

TEST_CASE("Lyapunov solver against the Kronecker formulation")
{
    std::mt19937 rng(6);
    const Mat a = random_hurwitz(rng, 5, 2).first;
    const Mat bq = Mat::Random(5, 5);
    const Mat q = bq + bq.transpose();
    const Mat k = Eigen::kroneckerProduct(Mat::Identity(5, 5), a) + Eigen::kroneckerProduct(a, Mat::Identity(5, 5));
    const Vec x = k.partialPivLu().solve(-Eigen::Map<const Vec>(q.data(), 25));
    const Mat w = solve_lyapunov(a, q);
    CHECK((w - Eigen::Map<const Mat>(x.data(), 5, 5)).norm() <= 1e-10 * w.norm());
}

TEST_CASE("balanced transform of the scalar system")
{
    const Mat a = Mat::Constant(1, 1, -1.0), one = Mat::Constant(1, 1, 1.0);
    const BalancedTransform bt = balanced_transform(a, one, one);
    CHECK(bt.W_r(0, 0) == doctest::Approx(0.5));
    CHECK(bt.W_o(0, 0) == doctest::Approx(0.5));
    CHECK(bt.hankel(0) == doctest::Approx(0.5));
    CHECK(std::abs(bt.T(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("balanced transform of diag(-1, -100) with closed-form Gramians")
{
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -100.0;
    const Mat b = Mat::Ones(2, 1);
    const BalancedTransform bt = balanced_transform(a, b, Mat::Identity(2, 2));
    // W_r(i, j) = -1 / (a_i + a_j); W_o = diag(1/2, 1/200).
    Mat wr(2, 2);
    wr << 0.5, 1.0 / 101.0, 1.0 / 101.0, 1.0 / 200.0;
    Mat wo = Mat::Zero(2, 2);
    wo(0, 0) = 0.5;
    wo(1, 1) = 1.0 / 200.0;
    CHECK((bt.W_r - wr).norm() <= 1e-12);
    CHECK((bt.W_o - wo).norm() <= 1e-12);
    // Hankel values: square roots of eig(W_r W_o).
    Eigen::EigenSolver<Mat> es(wr * wo);
    std::vector<double> h{std::sqrt(es.eigenvalues()(0).real()), std::sqrt(es.eigenvalues()(1).real())};
    std::sort(h.rbegin(), h.rend());
    CHECK(bt.hankel(0) == doctest::Approx(h[0]).epsilon(1e-10));
    CHECK(bt.hankel(1) == doctest::Approx(h[1]).epsilon(1e-10));
    const Mat wr_t = bt.T_inv * bt.W_r * bt.T_inv.transpose();
    const Mat wo_t = bt.T.transpose() * bt.W_o * bt.T;
    const Mat delta = bt.hankel.asDiagonal();
    CHECK((wr_t - delta).norm() <= 1e-7);
    CHECK((wo_t - delta).norm() <= 1e-7);
}

TEST_CASE("balanced coordinates have equal diagonal Gramians")
{
    std::mt19937 rng(15);
    for (int trial = 0; trial < 10; ++trial)
    {
        const Mat a = random_hurwitz(rng, 10, 3).first;
        const Mat b = Mat::Random(10, 2);
        const BalancedTransform bt = balanced_transform(a, b, Mat::Identity(10, 10));
        for (Index i = 0; i + 1 < 10; ++i)
            CHECK(bt.hankel(i) >= bt.hankel(i + 1));
        CHECK((bt.T * bt.T_inv - Mat::Identity(10, 10)).norm() <= 1e-8);
        // Gramians recomputed from the transformed realization.
        const Mat at = bt.T_inv * a * bt.T, bt_b = bt.T_inv * b, ct = bt.T;
        const Mat wr = solve_lyapunov(at, bt_b * bt_b.transpose());
        const Mat wo = solve_lyapunov(at.transpose(), ct.transpose() * ct);
        const double scale = std::max(1.0, bt.hankel(0));
        CHECK((wr - Mat(bt.hankel.asDiagonal())).norm() <= 1e-7 * scale);
        CHECK((wo - Mat(bt.hankel.asDiagonal())).norm() <= 1e-7 * scale);
    }
}

TEST_CASE("balanced transform requires a Hurwitz matrix")
{
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = 0.5;
    CHECK_THROWS_AS(balanced_transform(a, Mat::Ones(2, 1), Mat::Identity(2, 2)), UnstableSystem);
}
