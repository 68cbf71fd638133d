// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file config.hpp
///
/// Network and device parameter sets and the INI-style scenario file reader.
/// All quantities are per unit except omega_b (rad/s) and time constants (s).
///
#ifndef STIFFMOR_POWERSYS_CONFIG_HPP
#define STIFFMOR_POWERSYS_CONFIG_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stiffmor/common.hpp"

namespace stiffmor::powersys
{

enum class Frame
{
    nominal,   ///< constant-speed frame at omega_g
    reference, ///< frame locked to the reference device; its angle is removed
};

struct LineSpec
{
    int from = 0, to = 0;
    double r = 0.0, l = 0.0;
};

struct LoadSpec
{
    int bus = 0;
    double p = 0.0, q = 0.0; ///< consumption at nominal voltage
};

enum class ConverterMode
{
    grid_forming,
    grid_following
};

struct ConverterParams
{
    double r_f = 0.03, l_f = 0.08, c_f = 0.074;
    double r_t = 0.01, l_t = 0.2;
    double R_p = 0.02, R_q = 0.001, omega_z = 31.4;
    double r_v = 0.0, l_v = 0.2;
    double K_Pv = 0.52, K_Iv = 1.161, K_Fv = 1.0;
    double K_Pi = 0.738, K_Ii = 1.19, K_Fi = 0.0;
    double K_Ps = 0.084, K_Is = 0.1; ///< PLL, grid-following only
    std::optional<double> p;          ///< active dispatch; equal share when absent
    double v_set = 1.0;               ///< bus voltage magnitude in the power flow
};

struct ConverterSpec
{
    int bus = 0;
    ConverterMode mode = ConverterMode::grid_forming;
    ConverterParams par;
};

struct SyncGenParams
{
    double H = 3.5, D = 0.0;
    double L_ad = 1.66, L_aq = 1.61, L_l = 0.15, R_a = 0.003;
    double L_fd = 0.165, R_fd = 0.0006, L_1d = 0.1713, R_1d = 0.0284;
    double L_1q = 0.7252, R_1q = 0.00619, L_2q = 0.125, R_2q = 0.2368;
    double r_t = 0.0, l_t = 0.15; ///< step-up transformer, lumped into the stator
    double R_gov = 0.05, T_1 = 0.5, T_2 = 3.0, T_3 = 10.0, D_t = 0.0; ///< TGOV1
    double K_a = 100.0, T_a = 1.0, T_b = 10.0, T_e = 0.05;            ///< SEXS
    double K_s = 10.0, T_w = 10.0, T_1p = 0.5, T_2p = 0.05;           ///< PSS1A
    std::optional<double> p;
    double v_set = 1.0;
};

struct SyncGenSpec
{
    int bus = 0;
    SyncGenParams par;
};

struct NetworkSpec
{
    int buses = 0;
    double omega_b = 2.0 * std::numbers::pi * 50.0;
    double omega_g = 1.0;
    Frame frame = Frame::reference;
    double shunt_g = 0.05; ///< conductance on every bus without a load
    std::vector<LineSpec> lines;
};

struct ScenarioConfig
{
    std::string name = "custom";
    NetworkSpec net;
    std::vector<ConverterSpec> converters;
    std::vector<SyncGenSpec> generators;
    std::vector<LoadSpec> loads;
    std::optional<int> n_fast; ///< default fast-mode budget for reduction studies
};

namespace detail
{

using Ptree = boost::property_tree::ptree;

class KeyReader
{
public:
    KeyReader(const Ptree& sec, std::string where) : sec_(sec), where_(std::move(where))
    {
        for (const auto& kv : sec_)
            if (!kv.second.empty())
                throw ConfigError(where_ + ": nested keys are not allowed");
    }

    void num(const char* key, double& out)
    {
        if (auto v = find(key))
            out = parse(key, *v);
    }

    void num(const char* key, std::optional<double>& out)
    {
        if (auto v = find(key))
            out = parse(key, *v);
    }

    double required(const char* key)
    {
        auto v = find(key);
        if (!v)
            throw ConfigError(where_ + ": missing parameter '" + key + "'");
        return parse(key, *v);
    }

    std::optional<std::string> text(const char* key) { return find(key); }

    void finish() const
    {
        for (const auto& kv : sec_)
            if (!used_.count(kv.first))
                throw ConfigError(where_ + ": unknown key '" + kv.first + "'");
    }

private:
    std::optional<std::string> find(const char* key)
    {
        used_.insert(key);
        auto it = sec_.find(key);
        if (it == sec_.not_found())
            return std::nullopt;
        return it->second.data();
    }

    double parse(const char* key, const std::string& s) const
    {
        std::size_t pos = 0;
        double v = 0.0;
        try
        {
            v = std::stod(s, &pos);
        }
        catch (const std::exception&)
        {
            throw ConfigError(where_ + ": '" + key + "' is not a number: '" + s + "'");
        }
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (pos != s.size() || !std::isfinite(v))
            throw ConfigError(where_ + ": '" + key + "' is not a number: '" + s + "'");
        return v;
    }

    const Ptree& sec_;
    std::string where_;
    std::set<std::string> used_;
};

inline void read_converter(KeyReader& k, ConverterParams& p, bool gfl)
{
    k.num("r_f", p.r_f);
    k.num("l_f", p.l_f);
    k.num("c_f", p.c_f);
    k.num("r_t", p.r_t);
    k.num("l_t", p.l_t);
    k.num("R_p", p.R_p);
    k.num("R_q", p.R_q);
    k.num("omega_z", p.omega_z);
    k.num("r_v", p.r_v);
    k.num("l_v", p.l_v);
    k.num("K_Pv", p.K_Pv);
    k.num("K_Iv", p.K_Iv);
    k.num("K_Fv", p.K_Fv);
    k.num("K_Pi", p.K_Pi);
    k.num("K_Ii", p.K_Ii);
    k.num("K_Fi", p.K_Fi);
    if (gfl)
    {
        k.num("K_Ps", p.K_Ps);
        k.num("K_Is", p.K_Is);
    }
    k.num("p", p.p);
    k.num("v_set", p.v_set);
}

inline void read_sg(KeyReader& k, SyncGenParams& p)
{
    k.num("H", p.H);
    k.num("D", p.D);
    k.num("L_ad", p.L_ad);
    k.num("L_aq", p.L_aq);
    k.num("L_l", p.L_l);
    k.num("R_a", p.R_a);
    k.num("L_fd", p.L_fd);
    k.num("R_fd", p.R_fd);
    k.num("L_1d", p.L_1d);
    k.num("R_1d", p.R_1d);
    k.num("L_1q", p.L_1q);
    k.num("R_1q", p.R_1q);
    k.num("L_2q", p.L_2q);
    k.num("R_2q", p.R_2q);
    k.num("r_t", p.r_t);
    k.num("l_t", p.l_t);
    k.num("R_gov", p.R_gov);
    k.num("T_1", p.T_1);
    k.num("T_2", p.T_2);
    k.num("T_3", p.T_3);
    k.num("D_t", p.D_t);
    k.num("K_a", p.K_a);
    k.num("T_a", p.T_a);
    k.num("T_b", p.T_b);
    k.num("T_e", p.T_e);
    k.num("K_s", p.K_s);
    k.num("T_w", p.T_w);
    k.num("T_1p", p.T_1p);
    k.num("T_2p", p.T_2p);
    k.num("p", p.p);
    k.num("v_set", p.v_set);
}

inline int parse_bus(const std::string& s, const std::string& where)
{
    try
    {
        std::size_t pos = 0;
        const int b = std::stoi(s, &pos);
        if (pos == s.size() && b >= 1)
            return b;
    }
    catch (const std::exception&)
    {
    }
    throw ConfigError(where + ": invalid bus number '" + s + "'");
}

} // namespace detail

/// Structural checks: bus references, one device per bus, connectivity,
/// physical parameter signs.
inline void validate(const ScenarioConfig& cfg)
{
    const int nb = cfg.net.buses;
    if (nb <= 0)
        throw ConfigError("[network] buses must be positive");
    if (!(cfg.net.omega_b > 0.0) || !(cfg.net.omega_g > 0.0))
        throw ConfigError("[network] omega_b and omega_g must be positive");
    if (!(cfg.net.shunt_g >= 0.0))
        throw ConfigError("[network] shunt_g must be nonnegative");
    auto check_bus = [&](int b, const std::string& what) {
        if (b < 1 || b > nb)
            throw ConfigError(what + " references unknown bus " + std::to_string(b));
    };
    std::set<int> device_buses;
    auto add_device = [&](int b, const std::string& what) {
        check_bus(b, what);
        if (!device_buses.insert(b).second)
            throw ConfigError("bus " + std::to_string(b) + " carries more than one generating unit");
    };
    for (const auto& c : cfg.converters)
        add_device(c.bus, "converter");
    for (const auto& g : cfg.generators)
        add_device(g.bus, "generator");
    if (device_buses.empty())
        throw ConfigError("scenario has no generating units");
    std::set<int> load_buses;
    for (const auto& l : cfg.loads)
    {
        check_bus(l.bus, "load");
        if (!load_buses.insert(l.bus).second)
            throw ConfigError("bus " + std::to_string(l.bus) + " has more than one load section");
    }
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(nb + 1));
    for (const auto& ln : cfg.net.lines)
    {
        check_bus(ln.from, "line");
        check_bus(ln.to, "line");
        if (ln.from == ln.to)
            throw ConfigError("line connects bus " + std::to_string(ln.from) + " to itself");
        if (!(ln.r >= 0.0) || !(ln.l > 0.0))
            throw ConfigError("line " + std::to_string(ln.from) + "-" + std::to_string(ln.to) +
                              ": need r >= 0 and l > 0");
        adj[static_cast<std::size_t>(ln.from)].push_back(ln.to);
        adj[static_cast<std::size_t>(ln.to)].push_back(ln.from);
    }
    std::vector<bool> seen(static_cast<std::size_t>(nb + 1), false);
    std::vector<int> stack{1};
    seen[1] = true;
    int count = 0;
    while (!stack.empty())
    {
        const int b = stack.back();
        stack.pop_back();
        ++count;
        for (int nbh : adj[static_cast<std::size_t>(b)])
            if (!seen[static_cast<std::size_t>(nbh)])
            {
                seen[static_cast<std::size_t>(nbh)] = true;
                stack.push_back(nbh);
            }
    }
    if (count != nb)
        throw TopologyError("network graph is not connected (" + std::to_string(count) + " of " +
                            std::to_string(nb) + " buses reachable from bus 1)");
    for (const auto& c : cfg.converters)
    {
        const auto& p = c.par;
        if (!(p.l_f > 0.0 && p.c_f > 0.0 && p.l_t > 0.0 && p.omega_z > 0.0))
            throw ConfigError("converter at bus " + std::to_string(c.bus) +
                              ": filter elements and omega_z must be positive");
        if (!(p.K_Iv > 0.0 && p.K_Ii > 0.0))
            throw ConfigError("converter at bus " + std::to_string(c.bus) +
                              ": integral gains K_Iv, K_Ii must be positive");
        for (double g : {p.R_p, p.R_q, p.K_Pv, p.K_Pi, p.K_Ps, p.K_Is, p.r_f, p.r_t, p.r_v, p.l_v})
            if (!(g >= 0.0))
                throw ConfigError("converter at bus " + std::to_string(c.bus) + ": negative gain");
        for (double g : {p.K_Fv, p.K_Fi})
            if (g != 0.0 && g != 1.0)
                throw ConfigError("converter at bus " + std::to_string(c.bus) +
                                  ": feed-forward gains must be 0 or 1");
    }
    for (const auto& g : cfg.generators)
    {
        const auto& p = g.par;
        for (double v : {p.H, p.L_ad, p.L_aq, p.L_l + p.l_t, p.L_fd, p.L_1d, p.L_1q, p.L_2q, p.T_1,
                         p.T_3, p.T_b, p.T_e, p.T_w, p.T_2p, p.R_gov, p.K_a})
            if (!(v > 0.0))
                throw ConfigError("generator at bus " + std::to_string(g.bus) +
                                  ": inductances, time constants and gains must be positive");
    }
}

/// Parses a scenario file. Unknown sections or keys raise ConfigError.
inline ScenarioConfig parse_scenario(std::istream& in, const std::string& name = "custom")
{
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    detail::Ptree tree;
    try
    {
        std::istringstream ss(text);
        boost::property_tree::ini_parser::read_ini(ss, tree);
    }
    catch (const boost::property_tree::ini_parser_error& e)
    {
        throw ConfigError("scenario file: " + std::string(e.what()));
    }
    // The INI reader drops sections without keys; a bare [gfm 3] still declares a unit.
    {
        static const std::regex header_re(R"re(^\s*\[\s*([^\]]*?)\s*\]\s*$)re");
        std::istringstream ss(text);
        std::string line;
        while (std::getline(ss, line))
        {
            std::smatch m;
            if (std::regex_match(line, m, header_re) && tree.find(m[1]) == tree.not_found())
                tree.push_back({m[1], detail::Ptree{}});
        }
    }

    ScenarioConfig cfg;
    cfg.name = name;
    bool have_network = false;
    static const std::regex line_re(R"re(line\s+"?\s*(\d+)\s*-\s*(\d+)\s*"?)re");
    static const std::regex dev_re(R"re((gfm|gfl|sg|load)\s+"?\s*(\d+)\s*"?)re");
    for (const auto& [section, body] : tree)
    {
        std::smatch m;
        if (section == "network")
        {
            have_network = true;
            detail::KeyReader k(body, "[network]");
            cfg.net.buses = static_cast<int>(k.required("buses"));
            k.num("omega_b", cfg.net.omega_b);
            k.num("omega_g", cfg.net.omega_g);
            k.num("shunt_g", cfg.net.shunt_g);
            std::optional<double> nf;
            k.num("n_fast", nf);
            if (nf)
                cfg.n_fast = static_cast<int>(*nf);
            if (auto f = k.text("frame"))
            {
                if (*f == "nominal")
                    cfg.net.frame = Frame::nominal;
                else if (*f == "reference")
                    cfg.net.frame = Frame::reference;
                else
                    throw ConfigError("[network]: frame must be 'nominal' or 'reference'");
            }
            k.finish();
        }
        else if (std::regex_match(section, m, line_re))
        {
            detail::KeyReader k(body, "[" + section + "]");
            LineSpec ln;
            ln.from = detail::parse_bus(m[1], section);
            ln.to = detail::parse_bus(m[2], section);
            ln.r = k.required("r");
            ln.l = k.required("l");
            k.finish();
            cfg.net.lines.push_back(ln);
        }
        else if (std::regex_match(section, m, dev_re))
        {
            const std::string kind = m[1];
            const int bus = detail::parse_bus(m[2], section);
            detail::KeyReader k(body, "[" + section + "]");
            if (kind == "load")
            {
                LoadSpec l;
                l.bus = bus;
                l.p = k.required("P");
                l.q = 0.0;
                k.num("Q", l.q);
                cfg.loads.push_back(l);
            }
            else if (kind == "sg")
            {
                SyncGenSpec g;
                g.bus = bus;
                detail::read_sg(k, g.par);
                cfg.generators.push_back(g);
            }
            else
            {
                ConverterSpec c;
                c.bus = bus;
                c.mode = kind == "gfm" ? ConverterMode::grid_forming : ConverterMode::grid_following;
                detail::read_converter(k, c.par, kind == "gfl");
                cfg.converters.push_back(c);
            }
            k.finish();
        }
        else
        {
            throw ConfigError("unknown section [" + section + "]");
        }
    }
    if (!have_network)
        throw ConfigError("scenario file lacks a [network] section");
    validate(cfg);
    return cfg;
}

inline ScenarioConfig load_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario file '" + path.string() + "'");
    return parse_scenario(in, path.stem().string());
}

/// Canonical file stem for a scenario id: "3bus-s1" -> "3bus_s1",
/// "kundur-3area" -> "kundur3area", "ieee39-mod" -> "ieee39_mod".
inline std::string scenario_stem(const std::string& id)
{
    static const std::map<std::string, std::string> alias = {
        {"3bus-s1", "3bus_s1"},       {"3bus-s2", "3bus_s2"},       {"3bus-s3", "3bus_s3"},
        {"kundur-3area", "kundur3area"}, {"ieee39-mod", "ieee39_mod"}};
    auto it = alias.find(id);
    return it == alias.end() ? id : it->second;
}

} // namespace stiffmor::powersys

#endif
