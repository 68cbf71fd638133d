// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file reduced.hpp
///
/// Truncated DAE in transformed coordinates x = T x~. The slow coordinates
/// keep their dynamics; the fast ones are frozen on their quasi-steady
/// manifold and join the algebraic unknowns:
///
///   d/dt x~_s = [T^{-1} f(T x~, u, z)]_slow
///           0 = [T^{-1} f(T x~, u, z)]_fast
///           0 = g(T x~, u, z)
///
#ifndef STIFFMOR_MOR_REDUCED_HPP
#define STIFFMOR_MOR_REDUCED_HPP

#include <memory>
#include <string>

#include "stiffmor/dae/linearize.hpp"
#include "stiffmor/dae/newton.hpp"
#include "stiffmor/dae/system.hpp"
#include "stiffmor/mor/split.hpp"

namespace stiffmor
{

class ReducedModel : public DaeModel
{
public:
    ReducedModel(DaeSystem base, ModeSplit split) : base_(std::move(base)), split_(std::move(split))
    {
        const Index n = base_.nx();
        if (split_.n() != n || split_.T.rows() != n || split_.T.cols() != n ||
            split_.T_inv.rows() != n || split_.T_inv.cols() != n)
            throw DimensionMismatch("build_reduced: split does not match the DAE state dimension");
    }

    Index nx() const override { return split_.n_s(); }
    Index nu() const override { return base_.nu(); }
    Index nz() const override { return split_.n_f() + base_.nz(); }

    /// Full transformed vector x~ from (x~_s, [x~_f, z]).
    Vec assemble(const Vec& xs, const Vec& zr) const
    {
        Vec xt(split_.n());
        xt(split_.slow) = xs;
        xt(split_.fast) = zr.head(split_.n_f());
        return xt;
    }

    Vec to_original(const Vec& xt) const { return split_.identity ? xt : Vec(split_.T * xt); }
    Vec to_transformed(const Vec& x) const { return split_.identity ? x : Vec(split_.T_inv * x); }

    void residual(const Vec& xs, const Vec& u, const Vec& zr, Vec& f, Vec& g) const override
    {
        const Vec x = to_original(assemble(xs, zr));
        const Vec z = zr.tail(base_.nz());
        Vec fb, gb;
        base_.residual(x, u, z, fb, gb);
        const Vec ft = to_transformed(fb);
        f = ft(split_.slow);
        g.resize(nz());
        g.head(split_.n_f()) = ft(split_.fast);
        g.tail(base_.nz()) = gb;
    }

    bool has_jacobian() const override { return true; }

    void jacobian(const Vec& xs, const Vec& u, const Vec& zr, DaeJacobian& jac) const override
    {
        const Vec x = to_original(assemble(xs, zr));
        const Vec z = zr.tail(base_.nz());
        const DaeJacobian bj = base_.jacobian(x, u, z);

        Mat fx, fz, fu, gx;
        if (split_.identity)
        {
            fx = bj.fx;
            fz = bj.fz;
            fu = bj.fu;
            gx = bj.gx;
        }
        else
        {
            // Base Jacobians are sparse; keep T on the dense side of each product.
            const SpMat fx_b = bj.fx.sparseView(), fz_b = bj.fz.sparseView(), gx_b = bj.gx.sparseView();
            fx = split_.T_inv * Mat(fx_b * split_.T);
            fz = split_.T_inv * fz_b;
            fu = split_.T_inv * bj.fu;
            gx = gx_b * split_.T;
        }
        const auto& s = split_.slow;
        const auto& q = split_.fast;
        const Index nf = split_.n_f(), nzb = base_.nz();
        const auto all_z = Eigen::seqN(0, nzb);
        const auto all_u = Eigen::seqN(0, base_.nu());

        jac.fx = fx(s, s);
        jac.fz.resize(nx(), nz());
        jac.fz.leftCols(nf) = fx(s, q);
        jac.fz.rightCols(nzb) = fz(s, all_z);
        jac.fu = fu(s, all_u);

        jac.gx.resize(nz(), nx());
        jac.gx.topRows(nf) = fx(q, s);
        jac.gx.bottomRows(nzb) = gx(all_z, s);
        jac.gz.resize(nz(), nz());
        jac.gz.topLeftCorner(nf, nf) = fx(q, q);
        jac.gz.topRightCorner(nf, nzb) = fz(q, all_z);
        jac.gz.bottomLeftCorner(nzb, nf) = gx(all_z, q);
        jac.gz.bottomRightCorner(nzb, nzb) = bj.gz;
        jac.gu.resize(nz(), nu());
        jac.gu.topRows(nf) = fu(q, all_u);
        jac.gu.bottomRows(nzb) = bj.gu;
    }

    const DaeSystem& base() const { return base_; }
    const ModeSplit& split() const { return split_; }

private:
    DaeSystem base_;
    ModeSplit split_;
};

//
// Owner of a reduced model plus the handle to use it as an ordinary DAE.
//
class ReducedDae
{
public:
    ReducedDae(const DaeSystem& base, ModeSplit split)
        : model_(std::make_shared<ReducedModel>(base, std::move(split))), system_(model_)
    {
        std::vector<Label> xs, zr;
        const auto& sp = model_->split();
        auto coord = [&](Index k) -> Label {
            if (sp.identity)
                return base.state_labels()[static_cast<std::size_t>(k)];
            return {std::string(to_string(sp.method)) + "_" + std::to_string(k), "-"};
        };
        for (Index k : sp.slow)
            xs.push_back(coord(k));
        for (Index k : sp.fast)
            zr.push_back(coord(k));
        for (const auto& l : base.algebraic_labels())
            zr.push_back(l);
        system_.set_labels(xs, base.input_labels(), zr);
    }

    const DaeSystem& system() const { return system_; }
    const DaeSystem& base() const { return model_->base(); }
    const ModeSplit& split() const { return model_->split(); }
    Method method() const { return split().method; }

    /// Original-coordinate state x = T x~ from reduced (x~_s, [x~_f, z]).
    Vec lift(const Vec& xs, const Vec& zr) const { return model_->to_original(model_->assemble(xs, zr)); }
    Vec base_z(const Vec& zr) const { return zr.tail(base().nz()); }

    /// Reduced operating point from an operating point of the base DAE.
    OperatingPoint project(const OperatingPoint& op) const
    {
        const Vec xt = model_->to_transformed(op.x);
        Vec zr(system_.nz());
        zr.head(split().n_f()) = xt(split().fast);
        zr.tail(base().nz()) = op.z;
        return {xt(split().slow), op.u, zr, op.residual_norm};
    }

private:
    std::shared_ptr<ReducedModel> model_;
    DaeSystem system_;
};

inline ReducedDae build_reduced(const DaeSystem& dae, const ModeSplit& split)
{
    return ReducedDae(dae, split);
}

struct ConsistentInit
{
    Vec xs;  ///< x~_s0
    Vec xf;  ///< x~_f0
    Vec z;   ///< z0
    int iterations = 0;
    double residual = 0.0;

    /// Algebraic vector of the reduced DAE, [x~_f0, z0].
    Vec algebraic() const
    {
        Vec r(xf.size() + z.size());
        r << xf, z;
        return r;
    }
};

/// Projects x0 onto the slow coordinates and solves the algebraic residuals
/// for (x~_f, z), starting from the projection of x0 and z_guess.
inline ConsistentInit consistent_init(const ReducedDae& reduced, const Vec& x0, const Vec& u0,
                                      const Vec& z_guess, const NewtonOptions& opt = {})
{
    const DaeSystem& sys = reduced.system();
    const ModeSplit& sp = reduced.split();
    if (x0.size() != sp.n() || z_guess.size() != reduced.base().nz() || u0.size() != sys.nu())
        throw DimensionMismatch("consistent_init: wrong vector lengths");
    const Vec xt = sp.identity ? x0 : Vec(sp.T_inv * x0);
    ConsistentInit out;
    out.xs = xt(sp.slow);
    Vec w(sys.nz());
    w.head(sp.n_f()) = xt(sp.fast);
    w.tail(z_guess.size()) = z_guess;
    if (sys.nz() == 0)
        return out;

    Vec f, g;
    auto residual = [&](const Vec& zr) {
        sys.residual(out.xs, u0, zr, f, g);
        return g;
    };
    DaeJacobian jac;
    auto jacobian = [&](const Vec& zr) {
        sys.jacobian(out.xs, u0, zr, jac);
        return jac.gz;
    };
    const NewtonResult res = damped_newton(residual, jacobian, w, opt);
    out.xf = res.x.head(sp.n_f());
    out.z = res.x.tail(z_guess.size());
    out.iterations = res.iterations;
    out.residual = res.residual;
    return out;
}

} // namespace stiffmor

#endif
