#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"

namespace ffista {

/// One row of a convergence log: one accepted proximal-gradient step.
///
/// kappa_est and g_norm are NaN except on rows where the algorithm evaluated
/// them (the last step of a restart block, or every step for the baselines
/// that test the gradient mapping each iteration).
struct TraceRecord {
    std::string algo;
    int restart = 0;
    long global_iter = 0;
    int backtracks = 0;
    double tau = 0;
    double L_est = 0;
    double kappa_est = std::nan("");
    long n_j = 0;
    double F_value = 0;
    double g_norm = std::nan("");
    double time_s = 0;
};

inline constexpr std::string_view kTraceHeader =
    "algo,restart,global_iter,backtracks,tau,L_est,kappa_est,n_j,F_value,g_norm,time_s";

namespace detail {

inline std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_real(const std::string& s, long line) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw ParseError("trailing characters in number '" + s + "'", line);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("invalid number '" + s + "'", line);
    }
}

inline long parse_integer(const std::string& s, long line) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw ParseError("trailing characters in integer '" + s + "'", line);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("invalid integer '" + s + "'", line);
    }
}

} // namespace detail

inline void write_trace_header(std::ostream& os) { os << kTraceHeader << '\n'; }

inline void write_trace_row(std::ostream& os, const TraceRecord& r) {
    using detail::format_real;
    os << r.algo << ',' << r.restart << ',' << r.global_iter << ',' << r.backtracks << ',' << format_real(r.tau)
       << ',' << format_real(r.L_est) << ',' << format_real(r.kappa_est) << ',' << r.n_j << ','
       << format_real(r.F_value) << ',' << format_real(r.g_norm) << ',' << format_real(r.time_s) << '\n';
}

inline void write_trace(std::ostream& os, const std::vector<TraceRecord>& rows) {
    write_trace_header(os);
    for (const auto& r : rows) write_trace_row(os, r);
}

inline std::vector<TraceRecord> read_trace(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kTraceHeader) throw ParseError("trace: missing or unexpected header", 1);
    std::vector<TraceRecord> rows;
    long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 11) throw ParseError("trace: expected 11 fields, got " + std::to_string(f.size()), lineno);
        TraceRecord r;
        r.algo = f[0];
        r.restart = static_cast<int>(detail::parse_integer(f[1], lineno));
        r.global_iter = detail::parse_integer(f[2], lineno);
        r.backtracks = static_cast<int>(detail::parse_integer(f[3], lineno));
        r.tau = detail::parse_real(f[4], lineno);
        r.L_est = detail::parse_real(f[5], lineno);
        r.kappa_est = detail::parse_real(f[6], lineno);
        r.n_j = detail::parse_integer(f[7], lineno);
        r.F_value = detail::parse_real(f[8], lineno);
        r.g_norm = detail::parse_real(f[9], lineno);
        r.time_s = detail::parse_real(f[10], lineno);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace ffista
