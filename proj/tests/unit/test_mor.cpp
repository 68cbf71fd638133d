// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "stiffmor/dae/linearize.hpp"
#include "stiffmor/modal/balanced.hpp"
#include "stiffmor/modal/eigen.hpp"
#include "stiffmor/modal/jordan.hpp"
#include "stiffmor/modal/participation.hpp"
#include "stiffmor/mor/reduced.hpp"
#include "stiffmor/mor/split.hpp"
#include "stiffmor/sim/integrate.hpp"
#include "stiffmor/sim/reference.hpp"

#include "test_util.hpp"

using namespace stiffmor;
using stiffmor::testing::random_hurwitz;

namespace
{

// Linear DAE whose reduced matrix is exactly `target`:
// A_xx = target + A_xz A_zz^{-1} A_zx.
struct LinearCase
{
    DaeSystem dae;
    OperatingPoint op;
    Mat target;
};

LinearCase linear_case(std::mt19937& rng, Index n, Index pairs, Index nz, Index nu = 1)
{
    const Mat target = random_hurwitz(rng, n, pairs).first;
    const Mat axz = Mat::Random(n, nz), azx = Mat::Random(nz, n);
    const Mat azz = Mat::Random(nz, nz) + 4.0 * Mat::Identity(nz, nz);
    const Mat axx = target + axz * azz.partialPivLu().solve(azx);
    const Mat bxu = Mat::Random(n, nu), bzu = Mat::Random(nz, nu);
    DaeSystem dae = make_dae(
        n, nu, nz,
        [=](const Vec& x, const Vec& u, const Vec& z) -> Vec { return axx * x + bxu * u + axz * z; },
        [=](const Vec& x, const Vec& u, const Vec& z) -> Vec { return azx * x + bzu * u + azz * z; },
        [=](const Vec&, const Vec&, const Vec&, DaeJacobian& j) {
            j.fx = axx;
            j.fu = bxu;
            j.fz = axz;
            j.gx = azx;
            j.gu = bzu;
            j.gz = azz;
        });
    OperatingPoint op{Vec::Zero(n), Vec::Zero(nu), Vec::Zero(nz), 0.0};
    return {dae, op, target};
}

ParticipationMatrix manual_participation(const Mat& mag)
{
    ParticipationMatrix p;
    p.raw = mag.cast<Complex>();
    p.magnitude = mag;
    return p;
}

ModeBasis diagonal_basis(Index n)
{
    Vec d(n);
    for (Index i = 0; i < n; ++i)
        d(i) = -std::pow(10.0, static_cast<double>(n - i));
    return eig_sorted(d.asDiagonal().toDenseMatrix());
}

// Eigenvalues sorted by (Re, Im) for comparison.
std::vector<Complex> sorted(const CVec& v)
{
    std::vector<Complex> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

} // namespace

TEST_CASE("PFA on an identity participation matrix marks the owners of the fastest modes")
{
    const ModeBasis b = diagonal_basis(5);
    const ParticipationMatrix p = participation_matrix(b);
    const ModeSplit s = split_pfa(p, b, 2);
    // diag is already sorted fastest first, so state k owns mode k.
    CHECK(s.fast == std::vector<Index>{0, 1});
    CHECK(s.slow == std::vector<Index>{2, 3, 4});
    CHECK(s.identity);
    CHECK(s.T.isIdentity());
}

TEST_CASE("PFA tie goes to the lower index")
{
    Mat mag(2, 2);
    mag << 0.5, 0.5, 0.5, 0.5;
    const ModeSplit s = split_pfa(manual_participation(mag), diagonal_basis(2), 1);
    CHECK(s.fast == std::vector<Index>{0});
}

TEST_CASE("PFA reports insufficient states")
{
    Mat mag = Mat::Zero(3, 3);
    mag.row(0).setOnes();
    CHECK_THROWS_AS(split_pfa(manual_participation(mag), diagonal_basis(3), 2), InsufficientStates);
    CHECK_THROWS_AS(split_pfa(manual_participation(mag), diagonal_basis(3), 3), ConfigError);
}

TEST_CASE("PFA marks d/q groups together")
{
    const std::vector<Label> labels{{"i_d", ""}, {"w", ""}, {"i_q", ""}, {"v_d", ""}, {"v_q", ""}};
    const std::vector<Index> g = dq_groups(labels);
    CHECK(g == std::vector<Index>{0, 1, 0, 3, 3});
    Mat mag = Mat::Identity(5, 5);
    const ModeSplit s = split_pfa(manual_participation(mag), diagonal_basis(5), 2, 0.6, g);
    CHECK(s.fast == std::vector<Index>{0, 2});
}

TEST_CASE("sor split partitions the coordinates and never cuts a pair")
{
    Mat a = Mat::Zero(3, 3);
    a.topLeftCorner(2, 2) << -10.0, 3.0, -3.0, -10.0;
    a(2, 2) = -1.0;
    const ModeBasis b = eig_sorted(a);
    const RealJordanTransform j = real_jordan(b);
    const ModeSplit s = split_sor(b, j, 2);
    CHECK_FALSE(s.warning.empty());
    CHECK(s.n_f() == 2);
    CHECK(s.n_s() == 1);
    const ModeSplit full = split_sor(b, j, 3);
    CHECK(full.n_f() == 0);
    CHECK(full.warning.empty());
    CHECK((s.selector_slow() * s.selector_slow().transpose()).isIdentity());
    CHECK((s.selector_slow() * s.selector_fast().transpose()).isZero());
}

TEST_CASE("bt split keeps the leading Hankel coordinates")
{
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -100.0;
    const BalancedTransform bt = balanced_transform(a, Mat::Ones(2, 1), Mat::Identity(2, 2));
    const ModeSplit s = split_bt(bt, 1);
    CHECK(s.slow == std::vector<Index>{0});
    CHECK(s.fast == std::vector<Index>{1});
    CHECK(bt.hankel(0) > bt.hankel(1));
    CHECK(split_bt(bt, 2).n_f() == 0);
    CHECK_THROWS_AS(split_bt(bt, 0), ConfigError);
}

TEST_CASE("sor reduction preserves the slow spectrum of linear systems")
{
    std::mt19937 rng(31);
    for (int trial = 0; trial < 10; ++trial)
    {
        const LinearCase lc = linear_case(rng, 10, 3, 3);
        const LinearizedSystem lin = linearize(lc.dae, lc.op);
        const ModeBasis basis = eig_sorted(lin.A_tilde);
        const RealJordanTransform j = real_jordan(basis);
        for (Index n_s = 1; n_s <= 10; ++n_s)
        {
            const ReducedDae red(lc.dae, split_sor(basis, j, n_s));
            const Index ns = red.split().n_s();
            const LinearizedSystem lr = linearize(red.system(), red.project(lc.op));
            const ModeBasis rb = eig_sorted(lr.A_tilde);
            const auto got = sorted(rb.eigenvalues);
            const auto want = sorted(basis.eigenvalues.tail(ns));
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k)
                CHECK(std::abs(got[k] - want[k]) <= 1e-9 * std::abs(want[k]));
            // A slowest pair with n_s = 1 adjusts n_s down to 0: nothing left.
            if (ns == 0)
                continue;
            // rho(reduced) = |Re l_{n_f+1}| / |Re l_n| and never exceeds rho(full).
            const double rho = stiffness_ratio(rb).rho;
            CHECK(rho == doctest::Approx(std::abs(basis.eigenvalues(10 - ns).real()) /
                                         std::abs(basis.eigenvalues(9).real()))
                             .epsilon(1e-8));
            CHECK(rho <= stiffness_ratio(basis).rho * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("reduced residuals vanish at the operating point")
{
    std::mt19937 rng(32);
    const LinearCase lc = linear_case(rng, 8, 2, 2);
    const LinearizedSystem lin = linearize(lc.dae, lc.op);
    const ModeBasis basis = eig_sorted(lin.A_tilde);
    const RealJordanTransform j = real_jordan(basis);
    const std::vector<ModeSplit> splits{
        split_sor(basis, j, 4),
        split_pfa(participation_matrix(basis), basis, 3),
        split_bt(balanced_transform(lin.A_tilde, lin.B_tilde, Mat::Identity(8, 8)), 5)};
    for (const ModeSplit& s : splits)
    {
        const ReducedDae red = build_reduced(lc.dae, s);
        CHECK(red.system().nx() == s.n_s());
        CHECK(red.system().nz() == s.n_f() + 2);
        const OperatingPoint rop = red.project(lc.op);
        Vec f, g;
        red.system().residual(rop.x, rop.u, rop.z, f, g);
        CHECK(inf_norm(f) <= 1e-12);
        CHECK(inf_norm(g) <= 1e-12);

        // Chain-rule Jacobian against central differences.
        const Vec xs = Vec::Random(s.n_s()), zr = Vec::Random(s.n_f() + 2), u = Vec::Random(1);
        DaeJacobian ja = red.system().jacobian(xs, u, zr), jf;
        red.system().fd_jacobian(xs, u, zr, jf);
        CHECK((ja.fx - jf.fx).norm() <= 1e-6 * std::max(1.0, ja.fx.norm()));
        CHECK((ja.fz - jf.fz).norm() <= 1e-6 * std::max(1.0, ja.fz.norm()));
        CHECK((ja.gx - jf.gx).norm() <= 1e-6 * std::max(1.0, ja.gx.norm()));
        CHECK((ja.gz - jf.gz).norm() <= 1e-6 * std::max(1.0, ja.gz.norm()));
        CHECK((ja.fu - jf.fu).norm() <= 1e-6 * std::max(1.0, ja.fu.norm()));
    }
}

TEST_CASE("consistent initialization")
{
    std::mt19937 rng(33);
    LinearCase lc = linear_case(rng, 6, 1, 2);
    const ModeBasis basis = eig_sorted(linearize(lc.dae, lc.op).A_tilde);
    const RealJordanTransform j = real_jordan(basis);

    SUBCASE("at the operating point it returns the transformed point")
    {
        OperatingPoint op = lc.op;
        op.u.setConstant(0.3);
        Vec w(8);
        w.setZero();
        op = solve_equilibrium(lc.dae, op.u, w);
        const ReducedDae red(lc.dae, split_sor(basis, j, 3));
        const ConsistentInit ci = consistent_init(red, op.x, op.u, op.z);
        const OperatingPoint rop = red.project(op);
        CHECK(inf_norm(ci.xs - rop.x) <= 1e-12);
        CHECK(inf_norm(ci.algebraic() - rop.z) <= 1e-10);
        CHECK(inf_norm(red.lift(ci.xs, ci.algebraic()) - op.x) <= 1e-10);
    }
    SUBCASE("n_f = 0 leaves only the base algebraic variables")
    {
        const ReducedDae red(lc.dae, split_sor(basis, j, 6));
        const ConsistentInit ci = consistent_init(red, Vec::Ones(6), Vec::Zero(1), Vec::Zero(2));
        CHECK(ci.xf.size() == 0);
        CHECK(ci.z.size() == 2);
        CHECK(ci.residual <= 1e-10);
    }
    SUBCASE("length mismatch")
    {
        const ReducedDae red(lc.dae, split_sor(basis, j, 6));
        CHECK_THROWS_AS(consistent_init(red, Vec::Ones(5), Vec::Zero(1), Vec::Zero(2)), DimensionMismatch);
    }
}

TEST_CASE("all methods reproduce the original trajectory when nothing is eliminated")
{
    std::mt19937 rng(34);
    const LinearCase lc = linear_case(rng, 6, 2, 2);
    const LinearizedSystem lin = linearize(lc.dae, lc.op);
    const ModeBasis basis = eig_sorted(lin.A_tilde);
    const Vec x0 = Vec::Random(6);
    IntegratorConfig cfg;
    cfg.h = 1e-3;
    const InputFn u = constant_input(Vec::Constant(1, 0.5));
    const Trajectory full = integrate(lc.dae, x0, Vec::Zero(2), u, cfg, 0.2);
    const std::vector<ModeSplit> splits{
        split_sor(basis, real_jordan(basis), 6),
        split_pfa(participation_matrix(basis), basis, 0),
        split_bt(balanced_transform(lin.A_tilde, lin.B_tilde, Mat::Identity(6, 6)), 6)};
    for (const ModeSplit& s : splits)
    {
        const ReducedDae red(lc.dae, s);
        const ConsistentInit ci = consistent_init(red, x0, u(0.0), Vec::Zero(2));
        const Trajectory tr = integrate(red.system(), ci.xs, ci.algebraic(), u, cfg, 0.2);
        REQUIRE(tr.samples() == full.samples());
        double dev = 0.0;
        for (Index i = 0; i < tr.samples(); ++i)
            dev = std::max(dev, inf_norm(red.lift(tr.x(i), tr.z(i)) - full.x(i)));
        CHECK(dev <= 1e-9);
    }
}

TEST_CASE("two-timescale toy: residualization error is O(eps)")
{
    // dx_s/dt = -x_s + x_f,  eps dx_f/dt = -x_f + u.
    std::vector<double> dev_sp, dev_sor;
    for (double eps : {1e-2, 1e-3, 1e-4})
    {
        const DaeSystem dae = make_dae(
            2, 1, 0,
            [eps](const Vec& x, const Vec& u, const Vec&) -> Vec {
                Vec d(2);
                d << -x(0) + x(1), (-x(1) + u(0)) / eps;
                return d;
            },
            [](const Vec&, const Vec&, const Vec&) -> Vec { return Vec(0); });
        const InputFn u = constant_input(Vec::Ones(1));
        std::vector<double> ts;
        for (int k = 0; k <= 90; ++k)
            ts.push_back(0.1 + 0.01 * k);
        const Trajectory full = integrate_reference(dae, Vec::Zero(2), Vec(0), u, 1.0, ts);

        ModeSplit sp;
        sp.method = Method::pfa;
        sp.identity = true;
        sp.T = sp.T_inv = Mat::Identity(2, 2);
        sp.slow = {0};
        sp.fast = {1};
        const ModeBasis basis = eig_sorted(linearize(dae, {Vec::Zero(2), Vec::Ones(1), Vec(0), 0.0}).A_tilde);
        const std::vector<ModeSplit> splits{sp, split_sor(basis, real_jordan(basis), 1)};
        for (std::size_t m = 0; m < splits.size(); ++m)
        {
            const ReducedDae red(dae, splits[m]);
            const ConsistentInit ci = consistent_init(red, Vec::Zero(2), Vec::Ones(1), Vec(0));
            const Trajectory tr = integrate_reference(red.system(), ci.xs, ci.algebraic(), u, 1.0, ts);
            double dev = 0.0;
            for (Index i = 0; i < tr.samples(); ++i)
                dev = std::max(dev, inf_norm(red.lift(tr.x(i), tr.z(i)) - full.x(i)));
            (m == 0 ? dev_sp : dev_sor).push_back(dev);
        }
    }
    // Closed form of the residualized error in x_s: eps (e^{-t} - e^{-t/eps}) / (1 - eps).
    for (std::size_t k = 0; k + 1 < dev_sp.size(); ++k)
    {
        const double slope = std::log10(dev_sp[k] / dev_sp[k + 1]);
        CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
    }
    CHECK(dev_sp[0] == doctest::Approx(1e-2 * std::exp(-0.1) / (1.0 - 1e-2)).epsilon(1e-3));
    // Modal residualization is exact on the slow subspace; its deviation
    // is the decayed fast transient, well inside the O(eps) envelope.
    const double eps[] = {1e-2, 1e-3, 1e-4};
    for (std::size_t k = 0; k < dev_sor.size(); ++k)
        CHECK(dev_sor[k] <= eps[k]);
}
