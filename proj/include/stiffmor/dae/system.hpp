// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file system.hpp
///
/// Semi-explicit DAE  dx/dt = f(x,u,z),  0 = g(x,u,z).
///
#ifndef STIFFMOR_DAE_SYSTEM_HPP
#define STIFFMOR_DAE_SYSTEM_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "stiffmor/common.hpp"

namespace stiffmor
{

/// The six partial Jacobians of (f, g) with respect to (x, u, z).
struct DaeJacobian
{
    Mat fx, fu, fz;
    Mat gx, gu, gz;

    void resize(Index nx, Index nu, Index nz)
    {
        fx.setZero(nx, nx);
        fu.setZero(nx, nu);
        fz.setZero(nx, nz);
        gx.setZero(nz, nx);
        gu.setZero(nz, nu);
        gz.setZero(nz, nz);
    }
};

/// Evaluator interface. Implementations must be re-entrant.
class DaeModel
{
public:
    virtual ~DaeModel() = default;

    virtual Index nx() const = 0;
    virtual Index nu() const = 0;
    virtual Index nz() const = 0;

    /// Writes f (length nx) and g (length nz). Outputs are pre-sized.
    virtual void residual(const Vec& x, const Vec& u, const Vec& z, Vec& f, Vec& g) const = 0;

    virtual bool has_jacobian() const { return false; }

    /// Analytic Jacobian; only called when has_jacobian() is true.
    virtual void jacobian(const Vec& /*x*/, const Vec& /*u*/, const Vec& /*z*/,
                          DaeJacobian& /*jac*/) const
    {
    }
};

//
// Value handle around a shared, immutable DaeModel plus variable labels.
// Copying a DaeSystem is cheap and copies share the evaluator.
//
class DaeSystem
{
public:
    DaeSystem() = default;

    explicit DaeSystem(std::shared_ptr<const DaeModel> model) : model_(std::move(model))
    {
        default_labels();
    }

    Index nx() const { return model_->nx(); }
    Index nu() const { return model_->nu(); }
    Index nz() const { return model_->nz(); }

    const DaeModel& model() const { return *model_; }
    std::shared_ptr<const DaeModel> model_ptr() const { return model_; }

    void residual(const Vec& x, const Vec& u, const Vec& z, Vec& f, Vec& g) const
    {
        check_sizes(x, u, z);
        f.resize(nx());
        g.resize(nz());
        model_->residual(x, u, z, f, g);
    }

    Vec f(const Vec& x, const Vec& u, const Vec& z) const
    {
        Vec fv, gv;
        residual(x, u, z, fv, gv);
        return fv;
    }

    Vec g(const Vec& x, const Vec& u, const Vec& z) const
    {
        Vec fv, gv;
        residual(x, u, z, fv, gv);
        return gv;
    }

    bool has_analytic_jacobian() const { return model_->has_jacobian(); }

    /// Analytic Jacobian when the model provides one, central differences otherwise.
    void jacobian(const Vec& x, const Vec& u, const Vec& z, DaeJacobian& jac) const
    {
        check_sizes(x, u, z);
        if (model_->has_jacobian())
        {
            jac.resize(nx(), nu(), nz());
            model_->jacobian(x, u, z, jac);
        }
        else
        {
            fd_jacobian(x, u, z, jac);
        }
    }

    DaeJacobian jacobian(const Vec& x, const Vec& u, const Vec& z) const
    {
        DaeJacobian jac;
        jacobian(x, u, z, jac);
        return jac;
    }

    /// Central finite differences with h = cbrt(eps) * max(1, |value|).
    void fd_jacobian(const Vec& x, const Vec& u, const Vec& z, DaeJacobian& jac) const
    {
        jac.resize(nx(), nu(), nz());
        Vec xw = x, uw = u, zw = z;
        Vec fp, gp, fm, gm;
        auto column = [&](Vec& var, Index k, Mat& df, Mat& dg) {
            const double v = var(k);
            const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                             std::max(1.0, std::abs(v));
            var(k) = v + h;
            residual(xw, uw, zw, fp, gp);
            var(k) = v - h;
            residual(xw, uw, zw, fm, gm);
            var(k) = v;
            df.col(k) = (fp - fm) / (2.0 * h);
            dg.col(k) = (gp - gm) / (2.0 * h);
        };
        for (Index k = 0; k < nx(); ++k)
            column(xw, k, jac.fx, jac.gx);
        for (Index k = 0; k < nu(); ++k)
            column(uw, k, jac.fu, jac.gu);
        for (Index k = 0; k < nz(); ++k)
            column(zw, k, jac.fz, jac.gz);
    }

    const std::vector<Label>& state_labels() const { return state_labels_; }
    const std::vector<Label>& input_labels() const { return input_labels_; }
    const std::vector<Label>& algebraic_labels() const { return z_labels_; }

    DaeSystem& set_labels(std::vector<Label> states, std::vector<Label> inputs,
                          std::vector<Label> algebraic)
    {
        if (static_cast<Index>(states.size()) != nx() ||
            static_cast<Index>(inputs.size()) != nu() ||
            static_cast<Index>(algebraic.size()) != nz())
            throw DimensionMismatch("label count does not match DAE dimensions");
        state_labels_ = std::move(states);
        input_labels_ = std::move(inputs);
        z_labels_ = std::move(algebraic);
        return *this;
    }

private:
    void check_sizes(const Vec& x, const Vec& u, const Vec& z) const
    {
        if (x.size() != nx() || u.size() != nu() || z.size() != nz())
            throw DimensionMismatch("DAE evaluated with wrongly sized (x, u, z)");
    }

    void default_labels()
    {
        auto make = [](const char* p, Index n) {
            std::vector<Label> out;
            for (Index i = 0; i < n; ++i)
                out.push_back({std::string(p) + std::to_string(i), "-"});
            return out;
        };
        state_labels_ = make("x", nx());
        input_labels_ = make("u", nu());
        z_labels_ = make("z", nz());
    }

    std::shared_ptr<const DaeModel> model_;
    std::vector<Label> state_labels_, input_labels_, z_labels_;
};

//
// DaeModel built from callables; handy for small hand-written systems.
//
class FunctionDae : public DaeModel
{
public:
    using Eval = std::function<Vec(const Vec&, const Vec&, const Vec&)>;
    using JacEval = std::function<void(const Vec&, const Vec&, const Vec&, DaeJacobian&)>;

    FunctionDae(Index nx, Index nu, Index nz, Eval f, Eval g, JacEval jac = {})
        : nx_(nx), nu_(nu), nz_(nz), f_(std::move(f)), g_(std::move(g)), jac_(std::move(jac))
    {
    }

    Index nx() const override { return nx_; }
    Index nu() const override { return nu_; }
    Index nz() const override { return nz_; }

    void residual(const Vec& x, const Vec& u, const Vec& z, Vec& f, Vec& g) const override
    {
        f = f_(x, u, z);
        g = nz_ > 0 ? g_(x, u, z) : Vec(0);
        if (f.size() != nx_ || g.size() != nz_)
            throw DimensionMismatch("f/g output length does not match nx/nz");
    }

    bool has_jacobian() const override { return static_cast<bool>(jac_); }

    void jacobian(const Vec& x, const Vec& u, const Vec& z, DaeJacobian& jac) const override
    {
        jac_(x, u, z, jac);
    }

private:
    Index nx_, nu_, nz_;
    Eval f_, g_;
    JacEval jac_;
};

inline DaeSystem make_dae(Index nx, Index nu, Index nz, FunctionDae::Eval f,
                          FunctionDae::Eval g, FunctionDae::JacEval jac = {})
{
    return DaeSystem(
        std::make_shared<FunctionDae>(nx, nu, nz, std::move(f), std::move(g), std::move(jac)));
}

} // namespace stiffmor

#endif
