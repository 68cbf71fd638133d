// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "stiffmor/dae/linearize.hpp"
#include "stiffmor/modal/eigen.hpp"
#include "stiffmor/powersys/scenario.hpp"
#include "stiffmor/sim/integrate.hpp"

using namespace stiffmor;
using namespace stiffmor::powersys;

namespace
{

const char* const kShipped[] = {"3bus_s1", "3bus_s2", "3bus_s3", "ieee9", "kundur3area", "ieee39_mod"};

ScenarioConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_scenario(in);
}

const std::string kTwoBus = R"(
[network]
buses = 2
[line "1-2"]
r = 0.01
l = 0.1
[load 2]
P = 0.5
[gfm 1]
)";

struct Prepared
{
    Scenario sc;
    OperatingPoint op;
};

Prepared prepare(const std::string& id)
{
    Prepared p{assemble(load_named_scenario(id)), {}};
    p.op = operating_point(p.sc);
    return p;
}

Index label_index(const DaeSystem& dae, const std::string& name)
{
    const auto& l = dae.state_labels();
    for (std::size_t k = 0; k < l.size(); ++k)
        if (l[k].name == name)
            return static_cast<Index>(k);
    FAIL("no state labelled " << name);
    return -1;
}

} // namespace

TEST_CASE("scenario parser accepts a minimal file")
{
    const ScenarioConfig cfg = parse(kTwoBus);
    CHECK(cfg.net.buses == 2);
    CHECK(cfg.net.lines.size() == 1);
    CHECK(cfg.loads.size() == 1);
    CHECK(cfg.converters.size() == 1);
    CHECK(cfg.converters[0].mode == ConverterMode::grid_forming);
    CHECK(cfg.net.omega_b == doctest::Approx(2.0 * std::numbers::pi * 50.0));
}

TEST_CASE("scenario parser errors")
{
    CHECK_THROWS_AS(parse(kTwoBus + "[gfm 1]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[line \"1-2\"]\nr = 0.1\nl = 0.1\n[gfm 1]\n"), ConfigError);
    CHECK_THROWS_AS(parse(kTwoBus + "[sg 3]\n"), ConfigError);
    CHECK_THROWS_AS(parse(kTwoBus + "[widget 1]\n"), ConfigError);
    CHECK_THROWS_AS(parse("[network]\nbuses = 2\n[gfm 1]\n[load 2]\nP = 1\n"), TopologyError);
    CHECK_THROWS_AS(parse("[network]\nbuses = 2\n[line \"1-2\"]\nr = 0.01\n"), ConfigError);
    CHECK_THROWS_AS(parse("[network]\nbuses = 2\n[line \"1-2\"]\nr = 0.01\nl = 0.1\n[load 2]\nP = 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse(kTwoBus + "[gfl 2]\nK_Fv = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[network]\nbuses = 2\nframe = spinning\n[line \"1-2\"]\nr = 0\nl = 1\n[gfm 1]\n"),
                    ConfigError);
    CHECK_THROWS_AS(load_named_scenario("no_such_case"), ConfigError);
}

TEST_CASE("a bare device section declares a unit with default parameters")
{
    const ScenarioConfig cfg = parse(kTwoBus + "[sg 2]\n");
    REQUIRE(cfg.generators.size() == 1);
    CHECK(cfg.generators[0].bus == 2);
}

TEST_CASE("line dynamics")
{
    const double wb = 2.0 * std::numbers::pi * 50.0;
    const LineSpec ln{1, 2, 0.0146, 0.146};
    const V2<double> zero{0.0, 0.0};
    const V2<double> eq = line_derivative(ln, wb, V2<double>{1.0, 0.2}, V2<double>{1.0, 0.2}, zero, 1.0);
    CHECK(eq.d == 0.0);
    CHECK(eq.q == 0.0);
    const V2<double> di = line_derivative(ln, wb, V2<double>{1.1, 0.0}, V2<double>{1.0, 0.0}, zero, 1.0);
    CHECK(di.d == doctest::Approx(0.1 * wb / 0.146).epsilon(1e-12));
    CHECK(di.q == doctest::Approx(0.0));
}

TEST_CASE("isolated RL branch follows the rotating exponential")
{
    // di/dt = (wb/l)(v_i - v_j) - (wb r/l + J wb) i: closed form via a complex scalar.
    const double wb = 2.0 * std::numbers::pi * 50.0, r = 0.02, l = 0.1;
    const LineSpec ln{1, 2, r, l};
    const std::complex<double> a(-wb * r / l, -wb), drive(wb / l * 0.05, 0.0);
    const DaeSystem dae = make_dae(
        2, 0, 0,
        [&](const Vec& x, const Vec&, const Vec&) -> Vec {
            const V2<double> d = line_derivative(ln, wb, V2<double>{1.05, 0.0}, V2<double>{1.0, 0.0},
                                                 V2<double>{x(0), x(1)}, 1.0);
            Vec out(2);
            out << d.d, d.q;
            return out;
        },
        [](const Vec&, const Vec&, const Vec&) -> Vec { return Vec(0); });
    IntegratorConfig cfg;
    cfg.h = 1e-5;
    const Trajectory tr = integrate(dae, Vec::Zero(2), Vec(0), constant_input(Vec(0)), cfg, 0.01);
    const double t = tr.times.back();
    const std::complex<double> exact = drive / a * (std::exp(a * t) - 1.0);
    CHECK(tr.x(tr.samples() - 1)(0) == doctest::Approx(exact.real()).epsilon(1e-8));
    CHECK(tr.x(tr.samples() - 1)(1) == doctest::Approx(exact.imag()).epsilon(1e-8));
}

TEST_CASE("instantaneous power convention")
{
    const auto [p, q] = instantaneous_power(V2<double>{1.0, 0.0}, V2<double>{0.5, -0.1});
    CHECK(p == doctest::Approx(0.5));
    CHECK(q == doctest::Approx(0.1));
}

TEST_CASE("unit models are at rest after initialization")
{
    const V2<double> v{1.02, -0.05}, i{0.6, -0.15};
    std::vector<std::unique_ptr<Device>> units;
    units.push_back(std::make_unique<GridFormingConverter>(1, ConverterParams{}, 314.0));
    units.push_back(std::make_unique<GridFollowingConverter>(1, ConverterParams{}, 314.0));
    units.push_back(std::make_unique<SyncGen>(1, SyncGenParams{}, 314.0));
    for (const auto& d : units)
    {
        CAPTURE(d->kind());
        Vec x, u;
        d->initialize(v, i, x, u);
        REQUIRE(x.size() == d->full_states());
        Vec f(x.size());
        double inj[2], speed = 0.0;
        d->eval(x.data(), u.data(), v.d, v.q, 1.0, f.data(), inj, speed);
        CHECK(inf_norm(f) <= 1e-10);
        CHECK(inj[0] == doctest::Approx(i.d).epsilon(1e-10));
        CHECK(inj[1] == doctest::Approx(i.q).epsilon(1e-10));
        CHECK(speed == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(units[2]->full_states() == 14);
    CHECK(units[0]->full_states() == 13);
    CHECK(units[1]->full_states() == 15);
}

TEST_CASE("grid-following PLL holds its frequency when v_q vanishes")
{
    GridFollowingConverter c(1, ConverterParams{}, 314.0);
    const V2<double> v{1.0, 0.0}, i{0.5, 0.0};
    Vec x, u;
    c.initialize(v, i, x, u);
    // Shift the PLL integrator: with v_q = 0 it stays put and the unit runs at 1 + K_I eps.
    x(13) = 0.02;
    Vec f(x.size());
    double inj[2], speed = 0.0;
    c.eval(x.data(), u.data(), v.d, v.q, 1.0, f.data(), inj, speed);
    CHECK(f(13) == doctest::Approx(0.0));
    CHECK(f(14) == doctest::Approx(314.0 * c.params().K_Is * 0.02).epsilon(1e-12));
}

TEST_CASE("unit Jacobians agree with finite differences")
{
    for (const char* id : {"3bus_s1", "3bus_s2", "3bus_s3", "ieee9"})
    {
        CAPTURE(id);
        const Prepared p = prepare(id);
        // Away from equilibrium so that every bilinear term is exercised.
        const Vec x = p.op.x + 0.01 * Vec::Random(p.op.x.size());
        const Vec z = p.op.z + 0.01 * Vec::Random(p.op.z.size());
        const Vec u = p.op.u + 0.01 * Vec::Random(p.op.u.size());
        const DaeJacobian a = p.sc.dae.jacobian(x, u, z);
        DaeJacobian f;
        p.sc.dae.fd_jacobian(x, u, z, f);
        auto rel = [](const Mat& m1, const Mat& m2) { return (m1 - m2).norm() / std::max(1.0, m2.norm()); };
        CHECK(rel(f.fx, a.fx) <= 1e-6);
        CHECK(rel(f.fu, a.fu) <= 1e-6);
        CHECK(rel(f.fz, a.fz) <= 1e-6);
        CHECK(rel(f.gx, a.gx) <= 1e-6);
        CHECK(rel(f.gu, a.gu) <= 1e-6);
        CHECK(rel(f.gz, a.gz) <= 1e-6);
    }
}

TEST_CASE("shipped scenarios: equilibrium, voltages, power balance, stiffness")
{
    for (const char* id : kShipped)
    {
        CAPTURE(id);
        const Prepared p = prepare(id);
        const auto& model = *p.sc.model;
        CHECK(p.op.residual_norm <= 1e-10);
        CHECK(check_index1(p.sc.dae, p.op).full_rank);

        double gen = 0.0, consumed = 0.0;
        for (int b = 1; b <= p.sc.config.net.buses; ++b)
        {
            const double vd = p.op.z(model.bus_offset(b)), vq = p.op.z(model.bus_offset(b) + 1);
            const double vm = std::hypot(vd, vq);
            CHECK(vm >= 0.9);
            CHECK(vm <= 1.1);
            double g = model.shunt(b);
            for (std::size_t k = 0; k < p.sc.config.loads.size(); ++k)
                if (p.sc.config.loads[k].bus == b)
                    g += p.op.u(model.load_input_offset(k)) * p.sc.config.loads[k].p;
            consumed += g * vm * vm;
        }
        for (std::size_t k = 0; k < p.sc.config.net.lines.size(); ++k)
        {
            const Index o = model.line_state_offset(k);
            consumed += p.sc.config.net.lines[k].r * (p.op.x(o) * p.op.x(o) + p.op.x(o + 1) * p.op.x(o + 1));
        }
        const double wf = model.frame_speed(p.op.z);
        for (std::size_t k = 0; k < model.devices().size(); ++k)
        {
            const Device& d = *model.devices()[k];
            const Index bo = model.bus_offset(d.bus());
            Vec f(d.nx());
            double inj[2], speed = 0.0;
            d.eval(p.op.x.data() + model.device_state_offset(k), p.op.u.data() + model.device_input_offset(k),
                   p.op.z(bo), p.op.z(bo + 1), wf, f.data(), inj, speed);
            gen += p.op.z(bo) * inj[0] + p.op.z(bo + 1) * inj[1];
            CHECK(speed == doctest::Approx(wf).epsilon(1e-10));
        }
        CHECK(gen == doctest::Approx(consumed).epsilon(1e-9));

        const ModeBasis basis = eig_sorted(linearize(p.sc.dae, p.op).A_tilde);
        const StiffnessReport st = stiffness_ratio(basis);
        CHECK(st.asymptotically_stable);
        CHECK(st.rho >= 1e4);
    }
}

TEST_CASE("scenario layouts")
{
    const ScenarioConfig s1 = load_named_scenario("3bus-s1");
    REQUIRE(s1.converters.size() == 1);
    CHECK(s1.converters[0].bus == 1);
    CHECK(s1.converters[0].mode == ConverterMode::grid_forming);
    REQUIRE(s1.generators.size() == 1);
    CHECK(s1.generators[0].bus == 2);
    REQUIRE(s1.loads.size() == 1);
    CHECK(s1.loads[0].bus == 3);
    CHECK(s1.loads[0].p == 1.0);
    CHECK(s1.n_fast.value_or(0) == 8);
    CHECK(load_named_scenario("3bus-s2").n_fast.value_or(0) == 14);

    const ScenarioConfig s39 = load_named_scenario("ieee39-mod");
    int gfm = 0;
    for (const auto& c : s39.converters)
        gfm += c.mode == ConverterMode::grid_forming;
    CHECK(gfm == 3);
    CHECK(s39.generators.size() == 7);
    CHECK(s39.n_fast.value_or(0) == 104);
    CHECK(load_named_scenario("ieee9").n_fast.value_or(0) == 18);
    CHECK(load_named_scenario("kundur-3area").n_fast.value_or(0) == 40);
}

TEST_CASE("3bus-s1 dispatch: equal shares, the reference unit covers the losses")
{
    const Prepared p = prepare("3bus-s1");
    const auto& model = *p.sc.model;
    std::vector<double> pg;
    for (std::size_t k = 0; k < model.devices().size(); ++k)
    {
        const Device& d = *model.devices()[k];
        const Index bo = model.bus_offset(d.bus());
        Vec f(d.nx());
        double inj[2], speed = 0.0;
        d.eval(p.op.x.data() + model.device_state_offset(k), p.op.u.data() + model.device_input_offset(k),
               p.op.z(bo), p.op.z(bo + 1), 1.0, f.data(), inj, speed);
        pg.push_back(p.op.z(bo) * inj[0] + p.op.z(bo + 1) * inj[1]);
    }
    REQUIRE(pg.size() == 2);
    REQUIRE(model.devices()[0]->angle_pinned());
    CHECK(model.devices()[0]->kind() == "sg");
    // Half of the 1 pu load each; the reference unit adds line losses and
    // the 0.05 pu shunts on the two unit buses.
    CHECK(pg[1] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(pg[0] > 0.5);
    CHECK(pg[0] < 0.65);
}

TEST_CASE("disturbances")
{
    const Prepared p = prepare("3bus-s1");
    const DaeSystem& dae = p.sc.dae;
    Disturbance d;
    d.magnitude = 0.0;
    const DaeSystem same = apply_disturbance(dae, d);
    CHECK(inf_norm(same.f(p.op.x, p.op.u, p.op.z) - dae.f(p.op.x, p.op.u, p.op.z)) == 0.0);
    CHECK(inf_norm(same.g(p.op.x, p.op.u, p.op.z) - dae.g(p.op.x, p.op.u, p.op.z)) == 0.0);

    // A load drop and a load increase move the load current by opposite amounts.
    d.magnitude = 0.3;
    const Vec g_drop = apply_disturbance(dae, d).g(p.op.x, p.op.u, p.op.z);
    d.magnitude = -0.3;
    const Vec g_rise = apply_disturbance(dae, d).g(p.op.x, p.op.u, p.op.z);
    const Vec g0 = dae.g(p.op.x, p.op.u, p.op.z);
    CHECK(inf_norm(g_drop - g0) > 1e-3);
    CHECK(inf_norm((g_drop - g0) + (g_rise - g0)) <= 1e-12);

    // The time-domain input realizes the same step.
    d.magnitude = 0.3;
    d.time = 0.01;
    const InputFn u = disturbance_input(dae, p.op.u, d);
    CHECK(inf_norm(u(0.0) - p.op.u) == 0.0);
    d.time = 0.0;
    d.magnitude = 0.3;
    CHECK(inf_norm(dae.g(p.op.x, u(0.02), p.op.z) - g_drop) <= 1e-12);

    d.type = "fault";
    CHECK_THROWS_AS(apply_disturbance(dae, d), UnknownDisturbance);
    d.type = "load-step";
    d.magnitude = 1.0;
    CHECK_THROWS_AS(apply_disturbance(dae, d), ConfigError);
    d.magnitude = 0.1;
    d.time = -1.0;
    CHECK_THROWS_AS(disturbance_input(dae, p.op.u, d), ConfigError);
}

TEST_CASE("zero disturbance keeps the equilibrium")
{
    const Prepared p = prepare("3bus-s1");
    Disturbance d;
    IntegratorConfig cfg;
    cfg.h = 1e-4;
    const Trajectory tr = integrate(p.sc.dae, p.op.x, p.op.z, disturbance_input(p.sc.dae, p.op.u, d), cfg, 0.02);
    double dev = 0.0;
    for (Index i = 0; i < tr.samples(); ++i)
        dev = std::max(dev, inf_norm(tr.x(i) - p.op.x));
    CHECK(dev <= 1e-8);
}

TEST_CASE("load drop raises the frequency")
{
    const Prepared p = prepare("3bus-s1");
    Disturbance d;
    d.magnitude = 0.3;
    IntegratorConfig cfg;
    cfg.h = 1e-4;
    const Trajectory tr = integrate(p.sc.dae, p.op.x, p.op.z, disturbance_input(p.sc.dae, p.op.u, d), cfg, 0.1);
    const Index w = label_index(p.sc.dae, "sg2.omega");
    CHECK(tr.x(tr.samples() - 1)(w) > 1.0);
}

TEST_CASE("rotating every angle and network phasor gives an equivalent trajectory")
{
    ScenarioConfig cfg = load_named_scenario("3bus-s2");
    cfg.net.frame = Frame::nominal;
    const Scenario sc = assemble(cfg);
    const OperatingPoint op = operating_point(sc);
    const double phi = 0.4, c = std::cos(phi), s = std::sin(phi);

    auto rotate_state = [&](const Vec& x) {
        Vec y = x;
        const auto& labels = sc.dae.state_labels();
        for (std::size_t k = 0; k < labels.size(); ++k)
        {
            if (labels[k].unit == "rad")
                y(static_cast<Index>(k)) += phi;
        }
        for (std::size_t k = 0; k < cfg.net.lines.size(); ++k)
        {
            const Index o = sc.model->line_state_offset(k);
            y(o) = c * x(o) - s * x(o + 1);
            y(o + 1) = s * x(o) + c * x(o + 1);
        }
        return y;
    };
    auto rotate_z = [&](const Vec& z) {
        Vec y = z;
        for (int b = 1; b <= cfg.net.buses; ++b)
        {
            const Index o = sc.model->bus_offset(b);
            y(o) = c * z(o) - s * z(o + 1);
            y(o + 1) = s * z(o) + c * z(o + 1);
        }
        return y;
    };

    Disturbance d;
    d.magnitude = 0.3;
    const InputFn u = disturbance_input(sc.dae, op.u, d);
    IntegratorConfig ic;
    ic.h = 5e-5;
    const Trajectory a = integrate(sc.dae, op.x, op.z, u, ic, 0.02);
    const Trajectory b = integrate(sc.dae, rotate_state(op.x), rotate_z(op.z), u, ic, 0.02);
    double dev = 0.0;
    for (Index i = 0; i < a.samples(); ++i)
    {
        dev = std::max(dev, inf_norm(rotate_state(a.x(i)) - b.x(i)));
        dev = std::max(dev, inf_norm(rotate_z(a.z(i)) - b.z(i)));
    }
    CHECK(dev <= 1e-8);
}
