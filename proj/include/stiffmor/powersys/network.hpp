// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file network.hpp
///
/// Network DAE: units and dynamic RL lines contribute differential states,
/// bus voltages (and the frame speed in the reference frame) are algebraic.
/// Each bus carries one current balance:
///
///   sum of unit injections + inflowing lines - outflowing lines
///       - (load + shunt) admittance * v = 0.
///
#ifndef STIFFMOR_POWERSYS_NETWORK_HPP
#define STIFFMOR_POWERSYS_NETWORK_HPP

#include <memory>
#include <string>
#include <vector>

#include "stiffmor/dae/system.hpp"
#include "stiffmor/powersys/config.hpp"
#include "stiffmor/powersys/devices.hpp"

namespace stiffmor::powersys
{

/// d/dt i = omega_b / l (v_i - v_j) - omega_b r / l i - omega_b omega_frame J i
template <typename T>
V2<T> line_derivative(const LineSpec& ln, double omega_b, const V2<T>& vi, const V2<T>& vj,
                      const V2<T>& i, const T& w_frame)
{
    const double k = omega_b / ln.l;
    const V2<T> ji = rot90(i);
    return {k * (vi.d - vj.d) - k * ln.r * i.d - omega_b * w_frame * ji.d,
            k * (vi.q - vj.q) - k * ln.r * i.q - omega_b * w_frame * ji.q};
}

class NetworkModel : public DaeModel
{
public:
    explicit NetworkModel(const ScenarioConfig& cfg) : cfg_(cfg)
    {
        validate(cfg_);
        const double wb = cfg_.net.omega_b;
        // Reference unit: first generator, else first grid-forming, else
        // first grid-following converter (file order).
        for (const auto& g : cfg_.generators)
            devices_.push_back(std::make_unique<SyncGen>(g.bus, g.par, wb));
        for (const auto& c : cfg_.converters)
            if (c.mode == ConverterMode::grid_forming)
                devices_.push_back(std::make_unique<GridFormingConverter>(c.bus, c.par, wb));
        for (const auto& c : cfg_.converters)
            if (c.mode == ConverterMode::grid_following)
                devices_.push_back(std::make_unique<GridFollowingConverter>(c.bus, c.par, wb));
        if (reference_frame())
            devices_.front()->pin_angle(true);

        Index xo = 0, uo = 0;
        for (const auto& d : devices_)
        {
            x_off_.push_back(xo);
            u_off_.push_back(uo);
            xo += d->nx();
            uo += d->nu();
        }
        line_off_ = xo;
        nx_ = xo + 2 * static_cast<Index>(cfg_.net.lines.size());
        load_u_off_ = uo;
        nu_ = uo + static_cast<Index>(cfg_.loads.size());
        nz_ = 2 * cfg_.net.buses + (reference_frame() ? 1 : 0);

        const auto nb = static_cast<std::size_t>(cfg_.net.buses);
        shunt_.assign(nb + 1, cfg_.net.shunt_g);
        load_index_.assign(nb + 1, -1);
        for (std::size_t k = 0; k < cfg_.loads.size(); ++k)
        {
            shunt_[static_cast<std::size_t>(cfg_.loads[k].bus)] = 0.0;
            load_index_[static_cast<std::size_t>(cfg_.loads[k].bus)] = static_cast<int>(k);
        }
    }

    Index nx() const override { return nx_; }
    Index nu() const override { return nu_; }
    Index nz() const override { return nz_; }

    bool reference_frame() const { return cfg_.net.frame == Frame::reference; }
    const ScenarioConfig& config() const { return cfg_; }
    const std::vector<std::unique_ptr<Device>>& devices() const { return devices_; }
    Index device_state_offset(std::size_t k) const { return x_off_[k]; }
    Index device_input_offset(std::size_t k) const { return u_off_[k]; }
    Index line_state_offset(std::size_t k) const { return line_off_ + 2 * static_cast<Index>(k); }
    Index load_input_offset(std::size_t k) const { return load_u_off_ + static_cast<Index>(k); }
    Index bus_offset(int bus) const { return 2 * static_cast<Index>(bus - 1); }
    Index frame_index() const { return 2 * cfg_.net.buses; }

    /// Shunt conductance added on `bus` (nonzero only on buses without a load).
    double shunt(int bus) const { return shunt_[static_cast<std::size_t>(bus)]; }

    double frame_speed(const Vec& z) const
    {
        return reference_frame() ? z(frame_index()) : cfg_.net.omega_g;
    }

    void residual(const Vec& x, const Vec& u, const Vec& z, Vec& f, Vec& g) const override
    {
        const double wf = frame_speed(z);
        g.setZero(nz_);
        for (std::size_t k = 0; k < devices_.size(); ++k)
        {
            const Device& d = *devices_[k];
            const Index bo = bus_offset(d.bus());
            double inj[2];
            double speed = 0.0;
            d.eval(x.data() + x_off_[k], u.data() + u_off_[k], z(bo), z(bo + 1), wf,
                   f.data() + x_off_[k], inj, speed);
            g(bo) += inj[0];
            g(bo + 1) += inj[1];
            if (k == 0 && reference_frame())
                g(frame_index()) = wf - speed;
        }
        const double wb = cfg_.net.omega_b;
        for (std::size_t k = 0; k < cfg_.net.lines.size(); ++k)
        {
            const LineSpec& ln = cfg_.net.lines[k];
            const Index xo = line_state_offset(k);
            const Index bi = bus_offset(ln.from), bj = bus_offset(ln.to);
            const V2<double> i{x(xo), x(xo + 1)};
            const V2<double> di = line_derivative(ln, wb, V2<double>{z(bi), z(bi + 1)},
                                                  V2<double>{z(bj), z(bj + 1)}, i, wf);
            f(xo) = di.d;
            f(xo + 1) = di.q;
            g(bi) -= i.d;
            g(bi + 1) -= i.q;
            g(bj) += i.d;
            g(bj + 1) += i.q;
        }
        for (int b = 1; b <= cfg_.net.buses; ++b)
        {
            const Index bo = bus_offset(b);
            const auto [gg, bb] = admittance(b, u);
            // i = G v - B J v
            g(bo) -= gg * z(bo) + bb * z(bo + 1);
            g(bo + 1) -= gg * z(bo + 1) - bb * z(bo);
        }
    }

    bool has_jacobian() const override { return true; }

    void jacobian(const Vec& x, const Vec& u, const Vec& z, DaeJacobian& jac) const override
    {
        const double wf = frame_speed(z);
        const bool ref = reference_frame();
        const Index fi = frame_index();
        DeviceJacobian dj;
        for (std::size_t k = 0; k < devices_.size(); ++k)
        {
            const Device& d = *devices_[k];
            const Index bo = bus_offset(d.bus());
            const Index xo = x_off_[k], uo = u_off_[k], n = d.nx(), m = d.nu();
            d.jacobian(x.data() + xo, u.data() + uo, z(bo), z(bo + 1), wf, dj);
            jac.fx.block(xo, xo, n, n) = dj.fx;
            jac.fu.block(xo, uo, n, m) = dj.fu;
            jac.fz.block(xo, bo, n, 2) = dj.fv;
            if (ref)
                jac.fz.block(xo, fi, n, 1) = dj.fw;
            jac.gx.block(bo, xo, 2, n) += dj.ix;
            jac.gu.block(bo, uo, 2, m) += dj.iu;
            jac.gz.block(bo, bo, 2, 2) += dj.iv;
            if (k == 0 && ref)
            {
                jac.gx.block(fi, xo, 1, n) = -dj.wx.transpose();
                jac.gu.block(fi, uo, 1, m) = -dj.wu.transpose();
                jac.gz.block(fi, bo, 1, 2) = -dj.wv.transpose();
                jac.gz(fi, fi) = 1.0;
            }
        }
        const double wb = cfg_.net.omega_b;
        for (std::size_t k = 0; k < cfg_.net.lines.size(); ++k)
        {
            const LineSpec& ln = cfg_.net.lines[k];
            const Index xo = line_state_offset(k);
            const Index bi = bus_offset(ln.from), bj = bus_offset(ln.to);
            const double kk = wb / ln.l;
            jac.fx(xo, xo) = -kk * ln.r;
            jac.fx(xo, xo + 1) = wb * wf;
            jac.fx(xo + 1, xo) = -wb * wf;
            jac.fx(xo + 1, xo + 1) = -kk * ln.r;
            jac.fz(xo, bi) += kk;
            jac.fz(xo + 1, bi + 1) += kk;
            jac.fz(xo, bj) -= kk;
            jac.fz(xo + 1, bj + 1) -= kk;
            if (ref)
            {
                // d/dw of -wb w J i = -wb J i
                jac.fz(xo, fi) = wb * x(xo + 1);
                jac.fz(xo + 1, fi) = -wb * x(xo);
            }
            jac.gx(bi, xo) -= 1.0;
            jac.gx(bi + 1, xo + 1) -= 1.0;
            jac.gx(bj, xo) += 1.0;
            jac.gx(bj + 1, xo + 1) += 1.0;
        }
        for (int b = 1; b <= cfg_.net.buses; ++b)
        {
            const Index bo = bus_offset(b);
            const auto [gg, bb] = admittance(b, u);
            jac.gz(bo, bo) -= gg;
            jac.gz(bo, bo + 1) -= bb;
            jac.gz(bo + 1, bo) += bb;
            jac.gz(bo + 1, bo + 1) -= gg;
            const int li = load_index_[static_cast<std::size_t>(b)];
            if (li >= 0)
            {
                const LoadSpec& ld = cfg_.loads[static_cast<std::size_t>(li)];
                const Index uo = load_input_offset(static_cast<std::size_t>(li));
                jac.gu(bo, uo) -= ld.p * z(bo) + ld.q * z(bo + 1);
                jac.gu(bo + 1, uo) -= ld.p * z(bo + 1) - ld.q * z(bo);
            }
        }
    }

    std::vector<Label> state_labels() const
    {
        std::vector<Label> l;
        for (const auto& d : devices_)
            for (auto& s : d->state_labels())
                l.push_back(s);
        for (const auto& ln : cfg_.net.lines)
        {
            const std::string n = "line" + std::to_string(ln.from) + "-" + std::to_string(ln.to) + ".";
            l.push_back({n + "i_d", "pu"});
            l.push_back({n + "i_q", "pu"});
        }
        return l;
    }

    std::vector<Label> input_labels() const
    {
        std::vector<Label> l;
        for (const auto& d : devices_)
            for (auto& s : d->input_labels())
                l.push_back(s);
        for (const auto& ld : cfg_.loads)
            l.push_back({"load" + std::to_string(ld.bus) + ".scale", "-"});
        return l;
    }

    std::vector<Label> algebraic_labels() const
    {
        std::vector<Label> l;
        for (int b = 1; b <= cfg_.net.buses; ++b)
        {
            l.push_back({"bus" + std::to_string(b) + ".v_d", "pu"});
            l.push_back({"bus" + std::to_string(b) + ".v_q", "pu"});
        }
        if (reference_frame())
            l.push_back({"omega_frame", "pu"});
        return l;
    }

private:
    // Load + shunt admittance G + jB on bus b; the load part scales with its input.
    std::pair<double, double> admittance(int b, const Vec& u) const
    {
        double gg = shunt_[static_cast<std::size_t>(b)], bb = 0.0;
        const int li = load_index_[static_cast<std::size_t>(b)];
        if (li >= 0)
        {
            const LoadSpec& ld = cfg_.loads[static_cast<std::size_t>(li)];
            const double s = u(load_input_offset(static_cast<std::size_t>(li)));
            gg += s * ld.p;
            bb += s * ld.q;
        }
        return {gg, bb};
    }

    ScenarioConfig cfg_;
    std::vector<std::unique_ptr<Device>> devices_;
    std::vector<Index> x_off_, u_off_;
    Index line_off_ = 0, load_u_off_ = 0;
    Index nx_ = 0, nu_ = 0, nz_ = 0;
    std::vector<double> shunt_;
    std::vector<int> load_index_;
};

} // namespace stiffmor::powersys

#endif
