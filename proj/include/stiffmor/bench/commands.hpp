// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file commands.hpp
///
/// The benchmark studies behind the command-line driver: spectra and
/// participation tables, load-step transients, RMSE sweeps and the
/// large-case summary.
///
#ifndef STIFFMOR_BENCH_COMMANDS_HPP
#define STIFFMOR_BENCH_COMMANDS_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "stiffmor/bench/format.hpp"
#include "stiffmor/bench/study.hpp"

namespace stiffmor::bench
{

/// The load-step experiment used throughout: 30 % of every load removed at t = 0.
inline powersys::Disturbance default_disturbance()
{
    powersys::Disturbance d;
    d.magnitude = 0.3;
    d.time = 0.0;
    return d;
}

/// Logarithmic step-size grid from 1e-6 to 1e-2, 25 points.
inline std::vector<double> default_sweep()
{
    std::vector<double> h;
    for (int k = 0; k < 25; ++k)
        h.push_back(std::pow(10.0, -6.0 + 4.0 * k / 24.0));
    return h;
}

//
// cmd_eigen
//

struct ModelSpectrum
{
    std::string model;
    Index order = 0;
    CVec eigenvalues;
    StiffnessReport stiffness;
    std::string error; ///< set when the reduction could not be built
};

/// One fastest mode with the states that make up `threshold` of its participation.
struct FastModeRow
{
    Index mode = 0;
    Complex eigenvalue;
    std::vector<std::string> states;
    double cumulative = 0.0;
};

struct EigenReport
{
    std::string scenario;
    Index n_fast = 0;
    std::vector<ModelSpectrum> models;
    std::vector<FastModeRow> fast_modes;
    std::vector<std::string> pfa_states; ///< states the PFA split eliminates

    const ModelSpectrum& model(const std::string& name) const
    {
        for (const auto& m : models)
            if (m.model == name)
                return m;
        throw ConfigError("eigen report has no model '" + name + "'");
    }
};

inline ModelSpectrum spectrum_of(const std::string& name, const DaeSystem& dae,
                                 const OperatingPoint& op)
{
    ModelSpectrum s;
    s.model = name;
    s.order = dae.nx();
    const ModeBasis b = eig_sorted(linearize(dae, op).A_tilde);
    s.eigenvalues = b.eigenvalues;
    s.stiffness = stiffness_ratio(b);
    return s;
}

inline std::vector<FastModeRow> fast_mode_table(const Study& s, Index n_fast, double threshold = 0.6)
{
    std::vector<FastModeRow> rows;
    const auto labels = s.state_labels();
    for (Index m = 0; m < std::min(n_fast, s.n()); ++m)
    {
        std::vector<Index> order(static_cast<std::size_t>(s.n()));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return s.pf.magnitude(a, m) > s.pf.magnitude(b, m);
        });
        FastModeRow r;
        r.mode = m;
        r.eigenvalue = s.basis.eigenvalues(m);
        for (Index k : order)
        {
            if (r.cumulative >= threshold)
                break;
            r.states.push_back(labels[static_cast<std::size_t>(k)].name);
            r.cumulative += s.pf.magnitude(k, m);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline EigenReport cmd_eigen(const powersys::ScenarioConfig& cfg, std::optional<Index> n_fast = {})
{
    const Study s = prepare_study(cfg);
    EigenReport rep;
    rep.scenario = cfg.name;
    rep.n_fast = resolve_n_fast(s, n_fast);
    if (rep.n_fast < 0 || rep.n_fast >= s.n())
        throw ConfigError("n_fast must lie in [0, " + std::to_string(s.n() - 1) + "]");

    ModelSpectrum full;
    full.model = "full";
    full.order = s.n();
    full.eigenvalues = s.basis.eigenvalues;
    full.stiffness = stiffness_ratio(s.basis);
    rep.models.push_back(full);

    for (Method m : {Method::sor, Method::pfa, Method::bt})
    {
        try
        {
            const ModeSplit split = make_split(s, m, rep.n_fast);
            if (m == Method::pfa)
                for (Index k : split.fast)
                    rep.pfa_states.push_back(s.state_labels()[static_cast<std::size_t>(k)].name);
            const ReducedDae red(s.dae(), split);
            rep.models.push_back(spectrum_of(to_string(m), red.system(), red.project(s.op)));
        }
        catch (const Error& e)
        {
            ModelSpectrum failed;
            failed.model = to_string(m);
            failed.error = e.what();
            rep.models.push_back(failed);
        }
    }
    rep.fast_modes = fast_mode_table(s, rep.n_fast);
    return rep;
}

inline nlohmann::json complex_json(Complex c)
{
    return nlohmann::json::array({c.real(), c.imag()});
}

inline nlohmann::json to_json(const EigenReport& rep)
{
    using nlohmann::json;
    json j;
    j["scenario"] = rep.scenario;
    j["n_fast"] = rep.n_fast;
    json models = json::object();
    for (const auto& m : rep.models)
    {
        json o;
        if (!m.error.empty())
        {
            o["error"] = m.error;
            models[m.model] = o;
            continue;
        }
        o["order"] = m.order;
        o["rho"] = m.stiffness.rho;
        o["rho_filtered"] = m.stiffness.rho_filtered;
        o["stable"] = m.stiffness.asymptotically_stable;
        o["fastest"] = complex_json(m.stiffness.fastest);
        o["slowest"] = complex_json(m.stiffness.slowest);
        json ev = json::array();
        for (Index i = 0; i < m.eigenvalues.size(); ++i)
            ev.push_back(complex_json(m.eigenvalues(i)));
        o["eigenvalues"] = ev;
        models[m.model] = o;
    }
    j["models"] = models;
    json table = json::array();
    for (const auto& r : rep.fast_modes)
        table.push_back({{"mode", r.mode},
                         {"eigenvalue", complex_json(r.eigenvalue)},
                         {"states", r.states},
                         {"cumulative_pf", r.cumulative}});
    j["fast_modes"] = table;
    j["pfa_states"] = rep.pfa_states;
    return j;
}

/// Flat (model, re, im) table of every spectrum.
inline void write_spectra_csv(std::ostream& os, const EigenReport& rep)
{
    CsvWriter w(os);
    w.header({"model", "re", "im"});
    for (const auto& m : rep.models)
        for (Index i = 0; i < m.eigenvalues.size(); ++i)
            w.row({m.model, format_double(m.eigenvalues(i).real()),
                   format_double(m.eigenvalues(i).imag())});
}

//
// cmd_transient
//

struct TransientResult
{
    std::vector<std::string> labels; ///< original state labels
    Run run;
};

inline TransientResult cmd_transient(const powersys::ScenarioConfig& cfg, ModelKind model,
                                     const powersys::Disturbance& d, double h, double t_end,
                                     std::optional<Index> n_fast = {},
                                     Scheme scheme = Scheme::gl4)
{
    const Study s = prepare_study(cfg);
    const SimModel m = make_model(s, model, resolve_n_fast(s, n_fast));
    TransientResult out;
    for (const auto& l : s.state_labels())
        out.labels.push_back(l.name);
    out.run = run_fixed(m, d, scheme, h, t_end);
    return out;
}

inline void write_trajectory_csv(std::ostream& os, const TransientResult& tr)
{
    CsvWriter w(os);
    std::vector<std::string> cols{"t"};
    cols.insert(cols.end(), tr.labels.begin(), tr.labels.end());
    w.header(cols);
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < tr.run.times.size(); ++i)
    {
        cells.assign(1, format_double(tr.run.times[i]));
        for (Index k = 0; k < tr.run.x.cols(); ++k)
            cells.push_back(format_double(tr.run.x(static_cast<Index>(i), k)));
        w.row(cells);
    }
}

//
// cmd_rmse
//

struct ModelPair
{
    ModelKind mod1 = ModelKind::full; ///< integrated with the fixed-step method
    ModelKind mod2 = ModelKind::full; ///< integrated with the reference solver
};

inline std::string to_string(const ModelPair& p)
{
    return std::string(to_string(p.mod1)) + "/" + to_string(p.mod2);
}

/// "sor/full" or "sor:full"; a single name pairs the model with itself.
inline ModelPair parse_pair(const std::string& s)
{
    const auto k = s.find_first_of("/:");
    if (k == std::string::npos)
        return {parse_model(s), parse_model(s)};
    return {parse_model(s.substr(0, k)), parse_model(s.substr(k + 1))};
}

struct RmsePoint
{
    double h = 0.0;
    ModelPair pair;
    double rmse = std::nan(""); ///< NaN when the fixed-step run failed
    double wall_clock = std::nan("");
    std::string failure;

    bool ok() const { return failure.empty(); }
};

struct RmseOptions
{
    double t_end = 0.1;
    std::optional<Index> n_fast;
    powersys::Disturbance disturbance = default_disturbance();
    Scheme scheme = Scheme::gl4;
    int repeats = 3; ///< wall clock is the median over this many runs
};

/// Sweep over pairs x step sizes. Reference runs are shared per mod2 and
/// sampled on the union of all grids; a failing fixed-step run yields a
/// point with `failure` set instead of aborting the sweep.
inline std::vector<RmsePoint> cmd_rmse(const Study& s, const std::vector<ModelPair>& pairs,
                                       const std::vector<double>& h_list, const RmseOptions& opt = {})
{
    for (double h : h_list)
        if (!(h > 0.0) || h > opt.t_end)
            throw ConfigError("rmse: every step size must lie in (0, t_end]");
    const Index nf = resolve_n_fast(s, opt.n_fast);
    std::map<ModelKind, SimModel> models;
    auto model = [&](ModelKind k) -> const SimModel& {
        auto it = models.find(k);
        if (it == models.end())
            it = models.emplace(k, make_model(s, k, nf)).first;
        return it->second;
    };

    std::vector<double> times;
    for (double h : h_list)
    {
        const auto t = rmse_times(h, opt.t_end);
        times.insert(times.end(), t.begin(), t.end());
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    std::map<ModelKind, Run> refs;
    for (const auto& p : pairs)
        if (!refs.count(p.mod2))
            refs.emplace(p.mod2, run_reference(model(p.mod2), opt.disturbance, opt.t_end, times));

    std::vector<RmsePoint> out;
    for (double h : h_list)
        for (const auto& p : pairs)
        {
            RmsePoint pt;
            pt.h = h;
            pt.pair = p;
            try
            {
                const Run r = run_fixed(model(p.mod1), opt.disturbance, opt.scheme, h, opt.t_end,
                                        opt.repeats);
                pt.rmse = rmse(r, refs.at(p.mod2), h, opt.t_end);
                pt.wall_clock = r.wall_clock;
            }
            catch (const NumericalError& e)
            {
                pt.failure = e.what();
            }
            out.push_back(pt);
        }
    std::stable_sort(out.begin(), out.end(), [](const RmsePoint& a, const RmsePoint& b) {
        if (a.h != b.h)
            return a.h < b.h;
        return std::make_pair(a.pair.mod1, a.pair.mod2) < std::make_pair(b.pair.mod1, b.pair.mod2);
    });
    return out;
}

inline std::vector<RmsePoint> cmd_rmse(const powersys::ScenarioConfig& cfg,
                                       const std::vector<ModelPair>& pairs,
                                       const std::vector<double>& h_list, const RmseOptions& opt = {})
{
    return cmd_rmse(prepare_study(cfg), pairs, h_list, opt);
}

inline void write_rmse_csv(std::ostream& os, const std::vector<RmsePoint>& pts)
{
    CsvWriter w(os);
    w.header({"h", "mod1", "mod2", "rmse", "wall_clock", "failure"});
    for (const auto& p : pts)
        w.row({format_double(p.h), to_string(p.pair.mod1), to_string(p.pair.mod2),
               format_double(p.rmse), format_double(p.wall_clock), p.failure});
}

inline nlohmann::json to_json(const std::vector<RmsePoint>& pts)
{
    nlohmann::json a = nlohmann::json::array();
    for (const auto& p : pts)
    {
        nlohmann::json o{{"h", p.h}, {"mod1", to_string(p.pair.mod1)}, {"mod2", to_string(p.pair.mod2)}};
        if (p.ok())
        {
            o["rmse"] = p.rmse;
            o["wall_clock"] = p.wall_clock;
        }
        else
        {
            o["failure"] = p.failure;
        }
        a.push_back(o);
    }
    return a;
}

//
// cmd_largecase
//

struct LargeCaseRow
{
    std::string name;
    Index n_fast = 0;
    double rho_orig = 0.0, rho_sor = 0.0, rho_pfa = 0.0;
    double rmse_sor = std::nan(""), rmse_pfa = std::nan("");
};

struct LargeCaseOptions
{
    double h = 1e-5;
    double t_end = 0.1;
    powersys::Disturbance disturbance = default_disturbance();
};

inline LargeCaseRow cmd_largecase(const powersys::ScenarioConfig& cfg, std::optional<Index> n_fast = {},
                                  const LargeCaseOptions& opt = {})
{
    const Study s = prepare_study(cfg);
    LargeCaseRow row;
    row.name = cfg.name;
    row.n_fast = resolve_n_fast(s, n_fast);
    row.rho_orig = stiffness_ratio(s.basis).rho;

    const SimModel full = make_model(s, ModelKind::full, row.n_fast);
    const Run ref = run_reference(full, opt.disturbance, opt.t_end, rmse_times(opt.h, opt.t_end));
    for (ModelKind k : {ModelKind::sor, ModelKind::pfa})
    {
        const SimModel m = make_model(s, k, row.n_fast);
        const double rho = stiffness_ratio(eig_sorted(linearize(m.system, m.reduced->project(s.op)).A_tilde)).rho;
        const double e = rmse(run_fixed(m, opt.disturbance, Scheme::gl4, opt.h, opt.t_end), ref, opt.h, opt.t_end);
        (k == ModelKind::sor ? row.rho_sor : row.rho_pfa) = rho;
        (k == ModelKind::sor ? row.rmse_sor : row.rmse_pfa) = e;
    }
    return row;
}

inline void write_largecase_csv(std::ostream& os, const std::vector<LargeCaseRow>& rows)
{
    CsvWriter w(os);
    w.header({"case", "n_fast", "rho_orig", "rho_sor", "rho_pfa", "rmse_sor", "rmse_pfa"});
    for (const auto& r : rows)
        w.row({r.name, std::to_string(r.n_fast), format_double(r.rho_orig), format_double(r.rho_sor),
               format_double(r.rho_pfa), format_double(r.rmse_sor), format_double(r.rmse_pfa)});
}

inline nlohmann::json to_json(const LargeCaseRow& r)
{
    return {{"case", r.name},         {"n_fast", r.n_fast},     {"rho_orig", r.rho_orig},
            {"rho_sor", r.rho_sor},   {"rho_pfa", r.rho_pfa},   {"rmse_sor", r.rmse_sor},
            {"rmse_pfa", r.rmse_pfa}};
}

} // namespace stiffmor::bench

#endif
