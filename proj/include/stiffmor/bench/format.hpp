// Copyright (c) 2026 The stiffmor authors.
// SPDX-License-Identifier: Apache-2.0

///
/// \file format.hpp
///
/// CSV output with shortest round-trip decimal doubles.
///
#ifndef STIFFMOR_BENCH_FORMAT_HPP
#define STIFFMOR_BENCH_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace stiffmor::bench
{

/// Shortest decimal that parses back to the same double; "nan"/"inf" otherwise.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        return std::nan("");
    return v;
}

/// Quotes a CSV field when it contains a separator, quote or newline.
inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

class CsvWriter
{
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) { row(cols); }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t k = 0; k < cells.size(); ++k)
        {
            if (k)
                os_ << ',';
            os_ << csv_field(cells[k]);
        }
        os_ << '\n';
    }

private:
    std::ostream& os_;
};

} // namespace stiffmor::bench

#endif
