// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file scenario.hpp
///
/// Scenario assembly: power-flow initialization, steady-state unit
/// initialization, equilibrium polish and load-step disturbances.
///
#ifndef STIFFMOR_POWERSYS_SCENARIO_HPP
#define STIFFMOR_POWERSYS_SCENARIO_HPP

#include <complex>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "stiffmor/dae/linearize.hpp"
#include "stiffmor/dae/newton.hpp"
#include "stiffmor/powersys/network.hpp"
#include "stiffmor/sim/trajectory.hpp"

#ifndef STIFFMOR_DATA_DIR
#define STIFFMOR_DATA_DIR "data/scenarios"
#endif

namespace stiffmor::powersys
{

using Phasor = std::complex<double>;

struct PowerFlow
{
    std::vector<Phasor> v; ///< bus voltages, index 0 unused
    std::vector<Phasor> s; ///< unit injections P + jQ per bus
    int iterations = 0;
};

/// AC power flow on the steady-state network (lines r + jl at nominal
/// frequency, loads and shunts as admittances). The reference unit's bus is
/// the slack; other unit buses are PV with their dispatch; the rest carry no
/// injection. Without an explicit `p`, units share the nominal load equally.
inline PowerFlow solve_power_flow(const NetworkModel& model)
{
    const ScenarioConfig& cfg = model.config();
    const int nb = cfg.net.buses;
    const auto nbs = static_cast<std::size_t>(nb + 1);
    std::vector<std::vector<Phasor>> y(nbs, std::vector<Phasor>(nbs, 0.0));
    for (const auto& ln : cfg.net.lines)
    {
        const Phasor yl = 1.0 / Phasor(ln.r, ln.l);
        const auto i = static_cast<std::size_t>(ln.from), j = static_cast<std::size_t>(ln.to);
        y[i][i] += yl;
        y[j][j] += yl;
        y[i][j] -= yl;
        y[j][i] -= yl;
    }
    for (int b = 1; b <= nb; ++b)
        y[static_cast<std::size_t>(b)][static_cast<std::size_t>(b)] += model.shunt(b);
    double total_load = 0.0;
    for (const auto& ld : cfg.loads)
    {
        y[static_cast<std::size_t>(ld.bus)][static_cast<std::size_t>(ld.bus)] += Phasor(ld.p, -ld.q);
        total_load += ld.p;
    }

    const auto& devs = model.devices();
    const int slack = devs.front()->bus();
    std::vector<int> kind(nbs, 0); // 0 PQ, 1 PV, 2 slack
    std::vector<double> p_set(nbs, 0.0), v_set(nbs, 1.0);
    const double share = total_load / static_cast<double>(devs.size());
    for (const auto& c : cfg.converters)
    {
        kind[static_cast<std::size_t>(c.bus)] = 1;
        p_set[static_cast<std::size_t>(c.bus)] = c.par.p.value_or(share);
        v_set[static_cast<std::size_t>(c.bus)] = c.par.v_set;
    }
    for (const auto& g : cfg.generators)
    {
        kind[static_cast<std::size_t>(g.bus)] = 1;
        p_set[static_cast<std::size_t>(g.bus)] = g.par.p.value_or(share);
        v_set[static_cast<std::size_t>(g.bus)] = g.par.v_set;
    }
    kind[static_cast<std::size_t>(slack)] = 2;

    // Unknowns: angles of non-slack buses, magnitudes of PQ buses.
    std::vector<int> ang, mag;
    for (int b = 1; b <= nb; ++b)
    {
        if (kind[static_cast<std::size_t>(b)] != 2)
            ang.push_back(b);
        if (kind[static_cast<std::size_t>(b)] == 0)
            mag.push_back(b);
    }
    const Index n = static_cast<Index>(ang.size() + mag.size());
    auto voltages = [&](const Vec& w) {
        std::vector<Phasor> v(nbs);
        std::vector<double> th(nbs, 0.0), vm(v_set);
        for (std::size_t k = 0; k < ang.size(); ++k)
            th[static_cast<std::size_t>(ang[k])] = w(static_cast<Index>(k));
        for (std::size_t k = 0; k < mag.size(); ++k)
            vm[static_cast<std::size_t>(mag[k])] = w(static_cast<Index>(ang.size() + k));
        for (int b = 1; b <= nb; ++b)
            v[static_cast<std::size_t>(b)] =
                std::polar(vm[static_cast<std::size_t>(b)], th[static_cast<std::size_t>(b)]);
        return v;
    };
    auto injections = [&](const std::vector<Phasor>& v) {
        std::vector<Phasor> s(nbs);
        for (int i = 1; i <= nb; ++i)
        {
            Phasor cur = 0.0;
            for (int j = 1; j <= nb; ++j)
                cur += y[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                       v[static_cast<std::size_t>(j)];
            s[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] * std::conj(cur);
        }
        return s;
    };
    auto residual = [&](const Vec& w) {
        const auto s = injections(voltages(w));
        Vec r(n);
        for (std::size_t k = 0; k < ang.size(); ++k)
            r(static_cast<Index>(k)) =
                s[static_cast<std::size_t>(ang[k])].real() - p_set[static_cast<std::size_t>(ang[k])];
        for (std::size_t k = 0; k < mag.size(); ++k)
            r(static_cast<Index>(ang.size() + k)) = s[static_cast<std::size_t>(mag[k])].imag();
        return r;
    };
    auto jacobian = [&](const Vec& w) {
        Mat jm(n, n);
        Vec wp = w;
        for (Index c = 0; c < n; ++c)
        {
            const double h = 1e-7;
            wp(c) = w(c) + h;
            const Vec rp = residual(wp);
            wp(c) = w(c) - h;
            const Vec rm = residual(wp);
            wp(c) = w(c);
            jm.col(c) = (rp - rm) / (2.0 * h);
        }
        return jm;
    };
    Vec w0 = Vec::Zero(n);
    for (std::size_t k = 0; k < mag.size(); ++k)
        w0(static_cast<Index>(ang.size() + k)) = 1.0;
    NewtonOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 50;
    NewtonResult res;
    try
    {
        res = damped_newton(residual, jacobian, w0, opt);
    }
    catch (const NumericalError& e)
    {
        throw NoConvergence(opt.max_iter, std::numeric_limits<double>::quiet_NaN(),
                            std::string("power flow: ") + e.what());
    }
    PowerFlow pf;
    pf.v = voltages(res.x);
    const auto s = injections(pf.v);
    pf.s.assign(nbs, 0.0);
    for (int b = 1; b <= nb; ++b)
        if (kind[static_cast<std::size_t>(b)] != 0)
            pf.s[static_cast<std::size_t>(b)] = s[static_cast<std::size_t>(b)];
    pf.iterations = res.iterations;
    return pf;
}

struct Scenario
{
    ScenarioConfig config;
    std::shared_ptr<const NetworkModel> model;
    DaeSystem dae;
    OperatingPoint guess; ///< from power flow and steady-state unit initialization
};

/// Builds the DAE and an initial guess that already satisfies the steady
/// state up to roundoff.
inline Scenario assemble(const ScenarioConfig& config)
{
    Scenario sc;
    sc.config = config;
    auto model = std::make_shared<NetworkModel>(config);
    sc.model = model;
    sc.dae = DaeSystem(model);
    sc.dae.set_labels(model->state_labels(), model->input_labels(), model->algebraic_labels());

    PowerFlow pf = solve_power_flow(*model);
    const auto& devs = model->devices();
    auto device_current = [&](int bus) {
        const auto b = static_cast<std::size_t>(bus);
        return std::conj(pf.s[b] / pf.v[b]);
    };
    auto to_v2 = [](Phasor p) { return V2<double>{p.real(), p.imag()}; };

    // Rotate the network so that the reference unit's angle is zero.
    Vec xf, uf;
    {
        const int rb = devs.front()->bus();
        devs.front()->initialize(to_v2(pf.v[static_cast<std::size_t>(rb)]),
                                 to_v2(device_current(rb)), xf, uf);
        const Phasor rot = std::polar(1.0, -xf(0));
        for (auto& v : pf.v)
            v *= rot;
    }

    const Index nx = model->nx(), nu = model->nu(), nz = model->nz();
    OperatingPoint op;
    op.x.setZero(nx);
    op.u.setZero(nu);
    op.z.setZero(nz);
    for (std::size_t k = 0; k < devs.size(); ++k)
    {
        const Device& d = *devs[k];
        d.initialize(to_v2(pf.v[static_cast<std::size_t>(d.bus())]), to_v2(device_current(d.bus())),
                     xf, uf);
        const Index off = d.angle_pinned() ? 1 : 0;
        op.x.segment(model->device_state_offset(k), d.nx()) = xf.tail(xf.size() - off);
        op.u.segment(model->device_input_offset(k), d.nu()) = uf;
    }
    for (std::size_t k = 0; k < config.net.lines.size(); ++k)
    {
        const LineSpec& ln = config.net.lines[k];
        const Phasor i = (pf.v[static_cast<std::size_t>(ln.from)] - pf.v[static_cast<std::size_t>(ln.to)]) /
                         Phasor(ln.r, ln.l);
        op.x(model->line_state_offset(k)) = i.real();
        op.x(model->line_state_offset(k) + 1) = i.imag();
    }
    for (std::size_t k = 0; k < config.loads.size(); ++k)
        op.u(model->load_input_offset(k)) = 1.0;
    for (int b = 1; b <= config.net.buses; ++b)
    {
        op.z(model->bus_offset(b)) = pf.v[static_cast<std::size_t>(b)].real();
        op.z(model->bus_offset(b) + 1) = pf.v[static_cast<std::size_t>(b)].imag();
    }
    if (model->reference_frame())
        op.z(model->frame_index()) = 1.0;
    Vec f, g;
    sc.dae.residual(op.x, op.u, op.z, f, g);
    op.residual_norm = std::max(inf_norm(f), inf_norm(g));
    sc.guess = op;
    return sc;
}

/// Equilibrium polished by Newton from the assembled guess.
inline OperatingPoint operating_point(const Scenario& sc, const EquilibriumOptions& opt = {})
{
    Vec w(sc.dae.nx() + sc.dae.nz());
    w << sc.guess.x, sc.guess.z;
    return solve_equilibrium(sc.dae, sc.guess.u, w, opt);
}

inline std::filesystem::path scenario_data_dir()
{
    if (const char* env = std::getenv("STIFFMOR_DATA_DIR"))
        return env;
    return STIFFMOR_DATA_DIR;
}

/// Reads `<data dir>/<stem>.ini` for a scenario id such as "3bus-s1".
inline ScenarioConfig load_named_scenario(const std::string& id)
{
    const auto path = scenario_data_dir() / (scenario_stem(id) + ".ini");
    if (!std::filesystem::exists(path))
        throw ConfigError("unknown scenario '" + id + "' (no file " + path.string() + ")");
    ScenarioConfig cfg = load_scenario_file(path);
    cfg.name = scenario_stem(id);
    return cfg;
}

struct Disturbance
{
    std::string type = "load-step";
    double magnitude = 0.0; ///< fraction of load removed; negative adds load
    double time = 0.0;
};

namespace detail
{

inline std::vector<Index> load_scale_inputs(const DaeSystem& dae)
{
    std::vector<Index> idx;
    const auto& labels = dae.input_labels();
    for (std::size_t k = 0; k < labels.size(); ++k)
    {
        const std::string& n = labels[k].name;
        if (n.rfind("load", 0) == 0 && n.size() > 6 && n.compare(n.size() - 6, 6, ".scale") == 0)
            idx.push_back(static_cast<Index>(k));
    }
    return idx;
}

inline void check_disturbance(const Disturbance& d)
{
    if (d.type != "load-step")
        throw UnknownDisturbance("unsupported disturbance type '" + d.type + "'");
    if (!(d.magnitude > -1.0 && d.magnitude < 1.0))
        throw ConfigError("load-step magnitude must lie in (-1, 1)");
    if (!(d.time >= 0.0))
        throw ConfigError("disturbance time must be nonnegative");
}

// Input-scaled view of a DAE: u' = s .* u.
class ScaledInputModel : public DaeModel
{
public:
    ScaledInputModel(DaeSystem base, Vec scale) : base_(std::move(base)), scale_(std::move(scale)) {}

    Index nx() const override { return base_.nx(); }
    Index nu() const override { return base_.nu(); }
    Index nz() const override { return base_.nz(); }

    void residual(const Vec& x, const Vec& u, const Vec& z, Vec& f, Vec& g) const override
    {
        base_.residual(x, u.cwiseProduct(scale_), z, f, g);
    }

    bool has_jacobian() const override { return true; }

    void jacobian(const Vec& x, const Vec& u, const Vec& z, DaeJacobian& jac) const override
    {
        base_.jacobian(x, u.cwiseProduct(scale_), z, jac);
        jac.fu = jac.fu * scale_.asDiagonal();
        jac.gu = jac.gu * scale_.asDiagonal();
    }

private:
    DaeSystem base_;
    Vec scale_;
};

} // namespace detail

/// Post-event system: load admittances scaled by (1 - magnitude). For an
/// event at t > 0 integrate with disturbance_input() on the original system
/// instead.
inline DaeSystem apply_disturbance(const DaeSystem& dae, const Disturbance& d)
{
    detail::check_disturbance(d);
    Vec scale = Vec::Ones(dae.nu());
    for (Index k : detail::load_scale_inputs(dae))
        scale(k) = 1.0 - d.magnitude;
    DaeSystem out(std::make_shared<detail::ScaledInputModel>(dae, scale));
    out.set_labels(dae.state_labels(), dae.input_labels(), dae.algebraic_labels());
    return out;
}

/// Piecewise-constant input realizing the disturbance from d.time on.
inline InputFn disturbance_input(const DaeSystem& dae, const Vec& u0, const Disturbance& d)
{
    detail::check_disturbance(d);
    Vec after = u0;
    for (Index k : detail::load_scale_inputs(dae))
        after(k) *= 1.0 - d.magnitude;
    return step_input(u0, after, d.time);
}

} // namespace stiffmor::powersys

#endif
