// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file study.hpp
///
/// Shared plumbing for the benchmark commands: a linearized scenario with its
/// modal data, the three reductions built from it, and load-step runs whose
/// states are reported in original coordinates.
///
#ifndef STIFFMOR_BENCH_STUDY_HPP
#define STIFFMOR_BENCH_STUDY_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stiffmor/dae/linearize.hpp"
#include "stiffmor/modal/balanced.hpp"
#include "stiffmor/modal/eigen.hpp"
#include "stiffmor/modal/jordan.hpp"
#include "stiffmor/modal/participation.hpp"
#include "stiffmor/mor/reduced.hpp"
#include "stiffmor/mor/split.hpp"
#include "stiffmor/powersys/scenario.hpp"
#include "stiffmor/sim/integrate.hpp"
#include "stiffmor/sim/reference.hpp"

namespace stiffmor::bench
{

enum class ModelKind
{
    full,
    sor,
    pfa,
    bt
};

inline const char* to_string(ModelKind m)
{
    switch (m)
    {
    case ModelKind::full:
        return "full";
    case ModelKind::sor:
        return "sor";
    case ModelKind::pfa:
        return "pfa";
    case ModelKind::bt:
        return "bt";
    }
    return "?";
}

inline ModelKind parse_model(const std::string& s)
{
    if (s == "full")
        return ModelKind::full;
    if (s == "sor")
        return ModelKind::sor;
    if (s == "pfa")
        return ModelKind::pfa;
    if (s == "bt")
        return ModelKind::bt;
    throw ConfigError("unknown model '" + s + "' (expected full, sor, pfa or bt)");
}

/// Scenario at its equilibrium with everything the reductions need.
struct Study
{
    powersys::Scenario scenario;
    OperatingPoint op;
    LinearizedSystem lin;
    ModeBasis basis;
    ParticipationMatrix pf;
    RealJordanTransform jordan;

    const DaeSystem& dae() const { return scenario.dae; }
    Index n() const { return basis.size(); }
    std::vector<Label> state_labels() const { return scenario.dae.state_labels(); }
};

inline Study prepare_study(const powersys::ScenarioConfig& cfg)
{
    Study s{powersys::assemble(cfg), {}, {}, {}, {}, {}};
    s.op = powersys::operating_point(s.scenario);
    s.lin = linearize(s.scenario.dae, s.op);
    s.basis = eig_sorted(s.lin.A_tilde);
    s.pf = participation_matrix(s.basis);
    s.jordan = real_jordan(s.basis);
    return s;
}

/// Fast-mode budget: explicit value, else the scenario's default, else the
/// suggestion from the spectrum gap.
inline Index resolve_n_fast(const Study& s, std::optional<Index> n_fast)
{
    if (n_fast)
        return *n_fast;
    if (s.scenario.config.n_fast)
        return static_cast<Index>(*s.scenario.config.n_fast);
    return suggest_n_fast(s.basis);
}

inline ModeSplit make_split(const Study& s, Method method, Index n_fast)
{
    const Index n = s.n();
    if (n_fast < 0 || n_fast >= n)
        throw ConfigError("n_fast must lie in [0, " + std::to_string(n - 1) + "]");
    switch (method)
    {
    case Method::sor:
        return split_sor(s.basis, s.jordan, n - n_fast);
    case Method::pfa:
        return split_pfa(s.pf, s.basis, n_fast, 0.6, dq_groups(s.state_labels()));
    case Method::bt:
        return split_bt(balanced_transform(s.lin.A_tilde, s.lin.B_tilde, Mat::Identity(n, n)),
                        n - n_fast);
    }
    throw ConfigError("unknown reduction method");
}

/// A model ready for simulation from the pre-disturbance equilibrium.
struct SimModel
{
    ModelKind kind = ModelKind::full;
    DaeSystem system;
    std::optional<ReducedDae> reduced;
    Vec x0, z0, u0;

    Index order() const { return system.nx(); }

    /// Original-coordinate state for one sample of this model's trajectory.
    Vec original_state(const Vec& x, const Vec& z) const
    {
        return reduced ? reduced->lift(x, z) : x;
    }
};

inline SimModel make_model(const Study& s, ModelKind kind, Index n_fast)
{
    SimModel m;
    m.kind = kind;
    m.u0 = s.op.u;
    if (kind == ModelKind::full)
    {
        m.system = s.dae();
        m.x0 = s.op.x;
        m.z0 = s.op.z;
        return m;
    }
    const Method method = kind == ModelKind::sor ? Method::sor
                          : kind == ModelKind::pfa ? Method::pfa
                                                   : Method::bt;
    m.reduced.emplace(s.dae(), make_split(s, method, n_fast));
    m.system = m.reduced->system();
    const ConsistentInit ci = consistent_init(*m.reduced, s.op.x, s.op.u, s.op.z);
    m.x0 = ci.xs;
    m.z0 = ci.algebraic();
    return m;
}

/// Trajectory in original coordinates.
struct Run
{
    ModelKind kind = ModelKind::full;
    std::vector<double> times;
    Mat x; ///< samples x n (original state coordinates)
    double wall_clock = 0.0;
    long steps = 0;
};

namespace detail
{

inline Run to_original(const SimModel& m, const Trajectory& tr)
{
    Run r;
    r.kind = m.kind;
    r.times = tr.times;
    r.steps = tr.steps;
    r.wall_clock = tr.wall_clock;
    const Index n = m.reduced ? m.reduced->base().nx() : m.system.nx();
    r.x.resize(tr.samples(), n);
    for (Index i = 0; i < tr.samples(); ++i)
        r.x.row(i) = m.original_state(tr.x(i), tr.z(i)).transpose();
    return r;
}

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

} // namespace detail

/// Fixed-step load-step run; the wall clock is the median over `repeats`
/// integrations (integration only).
inline Run run_fixed(const SimModel& m, const powersys::Disturbance& d, Scheme scheme, double h,
                     double t_end, int repeats = 1)
{
    const InputFn u = powersys::disturbance_input(m.system, m.u0, d);
    IntegratorConfig cfg;
    cfg.method = scheme;
    cfg.h = h;
    Trajectory tr;
    std::vector<double> clocks;
    for (int k = 0; k < std::max(1, repeats); ++k)
    {
        tr = integrate(m.system, m.x0, m.z0, u, cfg, t_end);
        clocks.push_back(tr.wall_clock);
    }
    tr.wall_clock = detail::median(clocks);
    return detail::to_original(m, tr);
}

inline Run run_reference(const SimModel& m, const powersys::Disturbance& d, double t_end,
                         const std::vector<double>& sample_times)
{
    const InputFn u = powersys::disturbance_input(m.system, m.u0, d);
    std::vector<double> brk;
    if (d.time > 0.0)
        brk.push_back(d.time);
    return detail::to_original(m, integrate_reference(m.system, m.x0, m.z0, u, t_end, sample_times, brk));
}

/// Sample times i h, i = 1 .. floor(t_end / h), on the integrator's grid.
inline std::vector<double> rmse_times(double h, double t_end)
{
    std::vector<double> t = stiffmor::detail::fixed_grid(h, t_end);
    const double n_full = std::floor(t_end / h * (1.0 + 1e-12));
    std::vector<double> out;
    for (std::size_t i = 1; i < t.size() && static_cast<double>(i) <= n_full; ++i)
        out.push_back(t[i]);
    return out;
}

/// Row of `r` recorded at time t (exact grid match up to 1e-12 relative).
inline Index find_sample(const Run& r, double t)
{
    auto it = std::lower_bound(r.times.begin(), r.times.end(), t * (1.0 - 1e-12) - 1e-300);
    if (it == r.times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t)))
        throw DimensionMismatch("rmse: reference has no sample at t = " + std::to_string(t));
    return static_cast<Index>(it - r.times.begin());
}

/// RMSE(h) = sqrt( (h / T) sum_i |x1(ih) - x2(ih)|^2 / |x2(ih)|^2 ), i = 1 .. T/h,
/// both runs in original coordinates.
inline double rmse(const Run& mod1, const Run& ref, double h, double t_end)
{
    if (mod1.x.cols() != ref.x.cols())
        throw DimensionMismatch("rmse: runs have different state dimensions");
    const std::vector<double> ts = rmse_times(h, t_end);
    if (ts.empty())
        throw ConfigError("rmse: t_end shorter than one step");
    double acc = 0.0;
    for (double t : ts)
    {
        const Index i = find_sample(mod1, t), j = find_sample(ref, t);
        const double den = ref.x.row(j).squaredNorm();
        acc += (mod1.x.row(i) - ref.x.row(j)).squaredNorm() / (den > 0.0 ? den : 1.0);
    }
    return std::sqrt(acc / static_cast<double>(ts.size()));
}

} // namespace stiffmor::bench

#endif
