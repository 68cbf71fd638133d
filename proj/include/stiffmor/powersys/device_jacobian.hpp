// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file device_jacobian.hpp
///
/// Unit Jacobians by forward-mode automatic differentiation of the templated
/// dynamics. Included by the single translation unit that instantiates them.
///
#ifndef STIFFMOR_POWERSYS_DEVICE_JACOBIAN_HPP
#define STIFFMOR_POWERSYS_DEVICE_JACOBIAN_HPP

#include <array>

#include "stiffmor/powersys/devices.hpp"

#include <unsupported/Eigen/AutoDiff>

namespace stiffmor::powersys
{

/// Derivative slots of one unit: states, inputs, bus voltage (2), frame speed.
using AdDeriv = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 32, 1>;
using Ad = Eigen::AutoDiffScalar<AdDeriv>;

template <typename Derived>
void DeviceImpl<Derived>::jacobian(const double* x, const double* u, double vd, double vq,
                               double w_frame, DeviceJacobian& jac) const
{
    constexpr int nf = Derived::kStates, nu = Derived::kInputs;
    const int nxs = static_cast<int>(this->nx());
    const int nvar = nxs + nu + 3;
    std::array<double, nf> xd{};
    expand(x, xd.data());

    auto seed = [&](double value, int slot) {
        return Ad(value, nvar, slot);
    };
    std::array<Ad, nf> xa;
    const int off = angle_pinned() ? 1 : 0;
    for (int k = 0; k < nf; ++k)
        xa[static_cast<std::size_t>(k)] =
            (k < off) ? Ad(xd[static_cast<std::size_t>(k)], AdDeriv::Zero(nvar))
                      : seed(xd[static_cast<std::size_t>(k)], k - off);
    std::array<Ad, nu> ua;
    for (int k = 0; k < nu; ++k)
        ua[static_cast<std::size_t>(k)] = seed(u[k], nxs + k);
    const V2<Ad> va{seed(vd, nxs + nu), seed(vq, nxs + nu + 1)};
    const Ad wa = seed(w_frame, nxs + nu + 2);

    std::array<Ad, nf> fa;
    V2<Ad> ia;
    Ad sa;
    self().dynamics(xa.data(), ua.data(), va, wa, fa.data(), ia, sa);

    jac.fx.resize(nxs, nxs);
    jac.fu.resize(nxs, nu);
    jac.fv.resize(nxs, 2);
    jac.fw.resize(nxs);
    auto deriv = [&](const Ad& a, int slot) {
        return a.derivatives().size() == 0 ? 0.0 : a.derivatives()(slot);
    };
    for (int r = 0; r < nxs; ++r)
    {
        const Ad& fr = fa[static_cast<std::size_t>(r + off)];
        for (int c = 0; c < nxs; ++c)
            jac.fx(r, c) = deriv(fr, c);
        for (int c = 0; c < nu; ++c)
            jac.fu(r, c) = deriv(fr, nxs + c);
        jac.fv(r, 0) = deriv(fr, nxs + nu);
        jac.fv(r, 1) = deriv(fr, nxs + nu + 1);
        jac.fw(r) = deriv(fr, nxs + nu + 2);
    }
    jac.ix.resize(2, nxs);
    jac.iu.resize(2, nu);
    jac.iv.resize(2, 2);
    jac.wx.resize(nxs);
    jac.wu.resize(nu);
    jac.wv.resize(2);
    const std::array<const Ad*, 2> inj{&ia.d, &ia.q};
    for (int r = 0; r < 2; ++r)
    {
        for (int c = 0; c < nxs; ++c)
            jac.ix(r, c) = deriv(*inj[static_cast<std::size_t>(r)], c);
        for (int c = 0; c < nu; ++c)
            jac.iu(r, c) = deriv(*inj[static_cast<std::size_t>(r)], nxs + c);
        jac.iv(r, 0) = deriv(*inj[static_cast<std::size_t>(r)], nxs + nu);
        jac.iv(r, 1) = deriv(*inj[static_cast<std::size_t>(r)], nxs + nu + 1);
    }
    for (int c = 0; c < nxs; ++c)
        jac.wx(c) = deriv(sa, c);
    for (int c = 0; c < nu; ++c)
        jac.wu(c) = deriv(sa, nxs + c);
    jac.wv(0) = deriv(sa, nxs + nu);
    jac.wv(1) = deriv(sa, nxs + nu + 1);
}

} // namespace stiffmor::powersys

#endif
