// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file split.hpp
///
/// Slow/fast partitions of the state space for participation-factor
/// selection, stiffness-oriented (real Jordan) reduction and balanced
/// truncation.
///
#ifndef STIFFMOR_MOR_SPLIT_HPP
#define STIFFMOR_MOR_SPLIT_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "stiffmor/modal/balanced.hpp"
#include "stiffmor/modal/jordan.hpp"
#include "stiffmor/modal/participation.hpp"

namespace stiffmor
{

enum class Method
{
    sor,
    pfa,
    bt
};

inline const char* to_string(Method m)
{
    switch (m)
    {
    case Method::sor: return "sor";
    case Method::pfa: return "pfa";
    case Method::bt: return "bt";
    }
    return "?";
}

inline Method parse_method(const std::string& s)
{
    if (s == "sor")
        return Method::sor;
    if (s == "pfa")
        return Method::pfa;
    if (s == "bt")
        return Method::bt;
    throw ConfigError("unknown reduction method '" + s + "'");
}

//
// x = T x~. The slow coordinates x~[slow] stay differential; x~[fast] become
// algebraic unknowns of the reduced system.
//
struct ModeSplit
{
    Method method = Method::sor;
    Mat T, T_inv;
    bool identity = false;       ///< T == I; skips the products
    std::vector<Index> slow;     ///< ascending coordinate indices
    std::vector<Index> fast;     ///< ascending coordinate indices
    std::string warning;         ///< set when n_s was adjusted

    Index n() const { return static_cast<Index>(slow.size() + fast.size()); }
    Index n_s() const { return static_cast<Index>(slow.size()); }
    Index n_f() const { return static_cast<Index>(fast.size()); }

    /// Row-selection matrix T_s (n_s x n).
    Mat selector_slow() const { return selector(slow); }
    /// Row-selection matrix T_f (n_f x n).
    Mat selector_fast() const { return selector(fast); }

private:
    Mat selector(const std::vector<Index>& idx) const
    {
        Mat s = Mat::Zero(static_cast<Index>(idx.size()), n());
        for (std::size_t r = 0; r < idx.size(); ++r)
            s(static_cast<Index>(r), idx[r]) = 1.0;
        return s;
    }
};

namespace detail
{

inline std::vector<Index> range(Index from, Index to)
{
    std::vector<Index> v;
    for (Index i = from; i < to; ++i)
        v.push_back(i);
    return v;
}

} // namespace detail

/// Greedy participation-factor selection of n_f fast states, T = I.
///
/// Modes are visited fastest first. Within a mode, unmarked states are
/// marked in order of decreasing |P| (ties by index) until the marked states
/// hold `threshold` of that mode's participation. `groups` optionally ties
/// states together (e.g. the d and q components of one current); a group is
/// marked as a whole and only if it fits the remaining budget.
inline ModeSplit split_pfa(const ParticipationMatrix& p, const ModeBasis& basis, Index n_f,
                           double threshold = 0.6, std::vector<Index> groups = {})
{
    const Index n = p.states();
    if (basis.size() != n || p.modes() != n)
        throw DimensionMismatch("split_pfa: participation matrix does not match basis");
    if (n_f < 0 || n_f >= n)
        throw ConfigError("split_pfa: need 0 <= n_f < n_x");
    if (groups.empty())
    {
        groups.resize(static_cast<std::size_t>(n));
        std::iota(groups.begin(), groups.end(), Index{0});
    }
    if (static_cast<Index>(groups.size()) != n)
        throw DimensionMismatch("split_pfa: group vector must have one entry per state");

    std::vector<bool> marked(static_cast<std::size_t>(n), false);
    Index count = 0;
    for (Index mode = 0; mode < n && count < n_f; ++mode)
    {
        std::vector<Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
            return p.magnitude(a, mode) > p.magnitude(b, mode);
        });
        double cum = 0.0;
        for (Index k = 0; k < n; ++k)
            if (marked[static_cast<std::size_t>(k)])
                cum += p.magnitude(k, mode);
        for (Index k : order)
        {
            if (cum >= threshold || count >= n_f)
                break;
            if (marked[static_cast<std::size_t>(k)])
                continue;
            std::vector<Index> members;
            for (Index j = 0; j < n; ++j)
                if (groups[static_cast<std::size_t>(j)] == groups[static_cast<std::size_t>(k)] &&
                    !marked[static_cast<std::size_t>(j)])
                    members.push_back(j);
            if (count + static_cast<Index>(members.size()) > n_f)
                continue;
            for (Index j : members)
            {
                marked[static_cast<std::size_t>(j)] = true;
                cum += p.magnitude(j, mode);
                ++count;
            }
        }
    }
    if (count < n_f)
        throw InsufficientStates("split_pfa: marked only " + std::to_string(count) + " of " +
                                 std::to_string(n_f) + " states");

    ModeSplit split;
    split.method = Method::pfa;
    split.identity = true;
    split.T = Mat::Identity(n, n);
    split.T_inv = Mat::Identity(n, n);
    for (Index k = 0; k < n; ++k)
        (marked[static_cast<std::size_t>(k)] ? split.fast : split.slow).push_back(k);
    return split;
}

/// Group ids that tie "<name>_d" / "<name>_q" labels together; every other
/// state is its own group.
inline std::vector<Index> dq_groups(const std::vector<Label>& labels)
{
    std::vector<Index> g(labels.size());
    std::map<std::string, Index> seen;
    for (std::size_t k = 0; k < labels.size(); ++k)
    {
        const std::string& nm = labels[k].name;
        g[k] = static_cast<Index>(k);
        if (nm.size() > 2 && nm[nm.size() - 2] == '_' && (nm.back() == 'd' || nm.back() == 'q'))
        {
            const std::string stem = nm.substr(0, nm.size() - 2);
            auto [it, inserted] = seen.emplace(stem, static_cast<Index>(k));
            g[k] = it->second;
        }
    }
    return g;
}

/// T = T_J; the first n_f real-Jordan coordinates are fast. A boundary that
/// would cut a conjugate pair moves one position towards fewer slow states.
inline ModeSplit split_sor(const ModeBasis& basis, const RealJordanTransform& jordan, Index n_s)
{
    const Index n = basis.size();
    if (jordan.T.rows() != n)
        throw DimensionMismatch("split_sor: Jordan transform does not match basis");
    if (n_s < 0 || n_s > n)
        throw ConfigError("split_sor: need 0 <= n_s <= n_x");
    ModeSplit split;
    split.method = Method::sor;
    Index n_f = n - n_s;
    if (n_f > 0 && n_f < n && basis.partner[static_cast<std::size_t>(n_f - 1)] == n_f)
    {
        split.warning = "n_s = " + std::to_string(n_s) + " splits a conjugate pair; using n_s = " +
                        std::to_string(n_s - 1);
        ++n_f;
    }
    split.T = jordan.T;
    split.T_inv = jordan.T_inv;
    split.fast = detail::range(0, n_f);
    split.slow = detail::range(n_f, n);
    return split;
}

/// T = T_bt; the leading n_s balanced coordinates are slow.
inline ModeSplit split_bt(const BalancedTransform& bt, Index n_s)
{
    const Index n = bt.T.rows();
    if (n_s <= 0 || n_s > n)
        throw ConfigError("split_bt: need 0 < n_s <= n_x");
    ModeSplit split;
    split.method = Method::bt;
    split.T = bt.T;
    split.T_inv = bt.T_inv;
    split.slow = detail::range(0, n_s);
    split.fast = detail::range(n_s, n);
    return split;
}

/// Number of fast modes suggested by the largest relative gap |Re l_k| /
/// |Re l_{k+1}| among the fastest half of the sorted spectrum. Never cuts a pair.
inline Index suggest_n_fast(const ModeBasis& basis)
{
    const Index n = basis.size();
    if (n < 2)
        return 0;
    Index best = 0;
    double best_gap = 1.0;
    for (Index k = 0; k < std::max<Index>(1, n / 2); ++k)
    {
        if (basis.partner[static_cast<std::size_t>(k)] == k + 1)
            continue;
        const double a = std::abs(basis.eigenvalues(k).real());
        const double b = std::abs(basis.eigenvalues(k + 1).real());
        const double gap = b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
        if (gap > best_gap)
        {
            best_gap = gap;
            best = k + 1;
        }
    }
    return best;
}

} // namespace stiffmor

#endif
