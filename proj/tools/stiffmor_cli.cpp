// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

// Command-line driver for the reduction studies.
//
//   stiffmor eigen     --scenario S [--n-fast K] [--out DIR]
//   stiffmor transient --scenario S --model M --load-step FRAC --h H --t-end T
//   stiffmor rmse      --scenario S --pairs LIST [--h-list H1,H2,...] [--t-end T]
//   stiffmor largecase --case C [--n-fast K]
//
// Global options: --params FILE (scenario file instead of a shipped one),
// --seed N, --format csv|json. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure (diagnostic JSON on stderr).

#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stiffmor/bench/commands.hpp"

namespace
{

using namespace stiffmor;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Globals
{
    std::string params;
    std::string scenario;
    unsigned long seed = 0;
    std::string format = "csv";
};

const char* error_kind(const std::exception& e)
{
    if (dynamic_cast<const NewtonDivergence*>(&e))
        return "NewtonDivergence";
    if (dynamic_cast<const NonFiniteState*>(&e))
        return "NonFiniteState";
    if (dynamic_cast<const NoConvergence*>(&e))
        return "NoConvergence";
    if (dynamic_cast<const SingularJacobian*>(&e))
        return "SingularJacobian";
    if (dynamic_cast<const IndexViolation*>(&e))
        return "IndexViolation";
    if (dynamic_cast<const DefectiveMatrix*>(&e))
        return "DefectiveMatrix";
    if (dynamic_cast<const ReconstructionFailure*>(&e))
        return "ReconstructionFailure";
    if (dynamic_cast<const IllConditionedTransform*>(&e))
        return "IllConditionedTransform";
    if (dynamic_cast<const UnstableSystem*>(&e))
        return "UnstableSystem";
    if (dynamic_cast<const IndefiniteGramian*>(&e))
        return "IndefiniteGramian";
    if (dynamic_cast<const InsufficientStates*>(&e))
        return "InsufficientStates";
    if (dynamic_cast<const TopologyError*>(&e))
        return "TopologyError";
    if (dynamic_cast<const UnknownDisturbance*>(&e))
        return "UnknownDisturbance";
    if (dynamic_cast<const ConfigError*>(&e))
        return "ConfigError";
    if (dynamic_cast<const DimensionMismatch*>(&e))
        return "DimensionMismatch";
    return "Error";
}

int fail(int code, const std::exception& e)
{
    nlohmann::json d{{"error", error_kind(e)}, {"message", e.what()}, {"exit_code", code}};
    if (const auto* s = dynamic_cast<const StepError*>(&e))
        d["step"] = s->step();
    std::cerr << d.dump() << '\n';
    return code;
}

powersys::ScenarioConfig load_config(const Globals& g, const std::string& id)
{
    if (!g.params.empty())
    {
        powersys::ScenarioConfig cfg = powersys::load_scenario_file(g.params);
        cfg.name = id.empty() ? fs::path(g.params).stem().string() : powersys::scenario_stem(id);
        return cfg;
    }
    if (id.empty())
        throw ConfigError("no scenario given (use --scenario or --params)");
    return powersys::load_named_scenario(id);
}

std::optional<Index> opt_index(long v)
{
    if (v < 0)
        return std::nullopt;
    return static_cast<Index>(v);
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const double v = bench::parse_double(item);
        if (std::isnan(v))
            throw ConfigError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void emit(const Globals& g, const nlohmann::json& j, const std::function<void(std::ostream&)>& csv)
{
    if (g.format == "json")
        std::cout << j.dump(2) << '\n';
    else
        csv(std::cout);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stiffness-oriented model order reduction studies"};
    app.require_subcommand(1);
    // --h is the step size, so help is long-form only.
    app.set_help_flag("--help", "Print this help message and exit");
    Globals g;
    app.add_option("--params", g.params, "Scenario parameter file (used instead of a shipped scenario)");
    app.add_option("--seed", g.seed, "Seed for randomized property harnesses");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    long n_fast = -1;
    std::string out_dir;
    auto* eigen = app.add_subcommand("eigen", "Spectra, stiffness ratios and participation table");
    eigen->add_option("--scenario", g.scenario, "Scenario id, e.g. 3bus-s1");
    eigen->add_option("--n-fast", n_fast, "Number of fast modes to eliminate");
    eigen->add_option("--out", out_dir, "Directory for eigen.json and eigen.csv");

    std::string model = "sor";
    double load_step = 0.3, h = 2.5e-4, t_end = 0.1;
    std::string scheme = "irk-gl4";
    auto* transient = app.add_subcommand("transient", "Load-step transient, states in original coordinates");
    transient->add_option("--scenario", g.scenario, "Scenario id");
    transient->add_option("--model", model, "full, sor, pfa or bt")->required();
    transient->add_option("--load-step", load_step, "Fraction of load removed at t = 0")->required();
    transient->add_option("--h", h, "Step size")->required();
    transient->add_option("--t-end", t_end, "End time");
    transient->add_option("--n-fast", n_fast, "Number of fast modes to eliminate");
    transient->add_option("--method", scheme, "irk-gl4 or erk4");

    std::string pairs = "sor/full,pfa/full,full/full,sor/sor,pfa/pfa";
    std::string h_list;
    int repeats = 3;
    auto* rmse = app.add_subcommand("rmse", "RMSE against the reference solver over a step-size sweep");
    rmse->add_option("--scenario", g.scenario, "Scenario id");
    rmse->add_option("--pairs", pairs, "Comma-separated mod1/mod2 pairs");
    rmse->add_option("--h-list", h_list, "Comma-separated step sizes (default: 25 points, 1e-6 to 1e-2)");
    rmse->add_option("--t-end", t_end, "End time");
    rmse->add_option("--n-fast", n_fast, "Number of fast modes to eliminate");
    rmse->add_option("--load-step", load_step, "Fraction of load removed at t = 0");
    rmse->add_option("--repeats", repeats, "Timing repeats per point (median reported)");

    std::string case_id;
    auto* large = app.add_subcommand("largecase", "Stiffness and RMSE summary row for a larger network");
    large->add_option("--case", case_id, "ieee9, kundur3area or ieee39_mod");
    large->add_option("--n-fast", n_fast, "Number of fast modes to eliminate");
    large->add_option("--h", h, "Step size (default 1e-5)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try
    {
        powersys::Disturbance d = bench::default_disturbance();
        if (*eigen)
        {
            const bench::EigenReport rep = bench::cmd_eigen(load_config(g, g.scenario), opt_index(n_fast));
            const nlohmann::json j = bench::to_json(rep);
            if (!out_dir.empty())
            {
                fs::create_directories(out_dir);
                std::ofstream(fs::path(out_dir) / "eigen.json") << j.dump(2) << '\n';
                std::ofstream csv(fs::path(out_dir) / "eigen.csv");
                bench::write_spectra_csv(csv, rep);
            }
            else
            {
                emit(g, j, [&](std::ostream& os) { bench::write_spectra_csv(os, rep); });
            }
        }
        else if (*transient)
        {
            d.magnitude = load_step;
            const bench::TransientResult tr =
                bench::cmd_transient(load_config(g, g.scenario), bench::parse_model(model), d, h, t_end,
                                     opt_index(n_fast), parse_scheme(scheme));
            nlohmann::json j{{"labels", tr.labels}, {"t", tr.run.times}};
            nlohmann::json rows = nlohmann::json::array();
            for (Index i = 0; i < tr.run.x.rows(); ++i)
                rows.push_back(std::vector<double>(tr.run.x.row(i).begin(), tr.run.x.row(i).end()));
            j["x"] = rows;
            emit(g, j, [&](std::ostream& os) { bench::write_trajectory_csv(os, tr); });
        }
        else if (*rmse)
        {
            std::vector<bench::ModelPair> ps;
            std::stringstream ss(pairs);
            std::string item;
            while (std::getline(ss, item, ','))
                ps.push_back(bench::parse_pair(item));
            bench::RmseOptions opt;
            opt.t_end = t_end;
            opt.n_fast = opt_index(n_fast);
            opt.disturbance.magnitude = load_step;
            opt.repeats = repeats;
            const auto hs = h_list.empty() ? bench::default_sweep() : parse_list(h_list);
            const auto pts = bench::cmd_rmse(load_config(g, g.scenario), ps, hs, opt);
            emit(g, bench::to_json(pts), [&](std::ostream& os) { bench::write_rmse_csv(os, pts); });
        }
        else if (*large)
        {
            bench::LargeCaseOptions opt;
            if (large->count("--h"))
                opt.h = h;
            const bench::LargeCaseRow row = bench::cmd_largecase(load_config(g, case_id), opt_index(n_fast), opt);
            emit(g, bench::to_json(row), [&](std::ostream& os) { bench::write_largecase_csv(os, {row}); });
        }
    }
    catch (const NumericalError& e)
    {
        return fail(kExitNumerical, e);
    }
    catch (const Error& e)
    {
        return fail(kExitConfig, e);
    }
    catch (const std::exception& e)
    {
        return fail(kExitConfig, e);
    }
    return 0;
}
