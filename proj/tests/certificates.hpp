#pragma once

// Closed-form worst-case bounds of the restarted solver and checkers that
// evaluate them along a run. Shared by the unit tests and the acceptance
// binary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "freefista/fista_adabt.hpp"
#include "freefista/free_fista.hpp"

namespace cert {

using ffista::Vector;

/// log(C^2 rho / 4 - 1), the per-restart contraction exponent.
inline double log_contraction(double rho, double C) { return std::log(C * C * rho / 4.0 - 1.0); }

/// Worst-case total of n_0..n_j when the exit test first passes at tolerance eps.
inline double iteration_bound(double L, double mu, double rho, double C, double gap0, double eps) {
    const double a = log_contraction(rho, C);
    const double inner = 1.0 + 16.0 / (C * C * rho - 16.0) * 2.0 * L * gap0 / (rho * eps * eps);
    return 4.0 * C / a * std::sqrt(L / mu) * (2.0 * a + std::log(inner));
}

/// Upper envelope of F(r_j^+) - F* after a total of N iterations. Infinite
/// when N <= 8 C sqrt(L / mu), where the envelope is not defined.
inline double value_envelope(double L, double mu, double rho, double C, double L_min, double gap0, double N) {
    const double a = log_contraction(rho, C);
    const double e = std::exp(-2.0 * a + a / (4.0 * C) * std::sqrt(mu / L) * N) - 1.0;
    if (!(e > 0)) return std::numeric_limits<double>::infinity();
    const double w = 1.0 + L / L_min;
    return 4.0 * L * w * w / (rho * mu) * 16.0 / (C * C * rho - 16.0) / e * gap0;
}

/// Smallest T such that every window n_{s+1..s+T} with s >= 1 that ends
/// inside the run contains a doubling.
inline long realized_T(std::span<const long> n) {
    const long J = long(n.size()) - 1;
    auto doubled = [&](long j) { return n[j] == 2 * n[j - 1]; };
    for (long T = 1;; ++T) {
        bool ok = true;
        for (long s = 1; ok && s + T <= J; ++s) {
            bool any = false;
            for (long j = s + 1; j <= s + T; ++j) any = any || doubled(j);
            ok = any;
        }
        if (ok) return T;
    }
}

/// Collects violations as text; empty means every check passed.
struct Report {
    std::vector<std::string> violations;
    long checks = 0;

    bool ok() const { return violations.empty(); }
    void check(bool cond, const std::string& what) {
        ++checks;
        if (!cond && violations.size() < 20) violations.push_back(what);
        else if (!cond) violations.back() = "... " + what;
    }
    std::string summary() const {
        std::ostringstream os;
        os << checks << " checks, " << violations.size() << " violations";
        for (const auto& v : violations) os << "\n  " << v;
        return os.str();
    }
};

inline std::string fmt(const char* what, double lhs, double rhs) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": " << lhs << " > " << rhs;
    return os.str();
}

/// Rate certificate for one block of the adaptive FISTA:
///   F(x_{k+1}) - F* <= 2 Lbar_{k+1} |x_0 - x*|^2 / (k + 1)^2.
inline void check_block_rate(Report& rep, const ffista::AdaBtOutput& block, const Vector& x0, const Vector& x_star,
                             double F_star, double rel_slack = 1e-9) {
    const double R2 = (x0 - x_star).squaredNorm();
    const auto L = block.L_history();
    double inv_sqrt_sum = 0;
    for (std::size_t k = 0; k < block.steps.size(); ++k) {
        inv_sqrt_sum += 1.0 / std::sqrt(L[k]);
        const double mean = inv_sqrt_sum / double(k + 1);
        const double Lbar = 1.0 / (mean * mean);
        const double bound = 2.0 * Lbar * R2 / double((k + 1) * (k + 1));
        const double gap = block.steps[k].F - F_star;
        rep.check(gap <= bound * (1 + rel_slack) + rel_slack * std::max(1.0, std::abs(F_star)),
                  fmt("rate certificate", gap, bound));
    }
}

/// Energy F(x_k) + |x_k - x_{k-1}|^2 / (2 tau_k) is non-increasing within a block.
inline void check_block_energy(Report& rep, const ffista::AdaBtOutput& block, double slack = 1e-10) {
    double prev = block.F0;
    for (const auto& s : block.steps) {
        const double e = s.F + 0.5 * s.L * s.step_norm * s.step_norm;
        rep.check(e <= prev + slack * std::max(1.0, std::abs(prev)), fmt("energy increase", e, prev));
        prev = e;
    }
}

/// L_min <= L_k (exact) and L_k <= L_true / rho (relative 1e-12) for every accepted step.
inline void check_block_steps(Report& rep, const ffista::AdaBtOutput& block, double L_min, double L_true,
                              double rho) {
    for (const auto& s : block.steps) {
        rep.check(s.L >= L_min, fmt("L below L_min", L_min, s.L));
        rep.check(s.L <= L_true / rho * (1 + 1e-12), fmt("L above L_true/rho", s.L, L_true / rho));
    }
}

struct Truth {
    double L, mu, F_star;
};

/// Restart-level certificates of a finished restarted run.
inline void check_restarts(Report& rep, const ffista::SolveReport& run, const ffista::FreeFistaConfig& cfg,
                           const Truth& t, double kappa_rho) {
    const auto& st = run.state;
    const double C = cfg.doubling_constant();
    const double kappa = t.mu / t.L;
    // estimator safety
    for (std::size_t i = 0; i < st.kappa_hist.size(); ++i) {
        const double k = st.kappa_hist[i];
        rep.check(k > kappa - 1e-12 * k, fmt("kappa_j below mu/L", kappa, k));
        if (i > 0) rep.check(k <= st.kappa_hist[i - 1], fmt("kappa_j increased", k, st.kappa_hist[i - 1]));
    }
    // doubling bookkeeping
    for (std::size_t j = 0; j < st.n_hist.size(); ++j) {
        rep.check(double(st.n_hist[j]) <= 2 * C * std::sqrt(1 / kappa),
                  fmt("n_j above 2C sqrt(L/mu)", double(st.n_hist[j]), 2 * C * std::sqrt(1 / kappa)));
        if (j > 0)
            rep.check(st.n_hist[j] == st.n_hist[j - 1] || st.n_hist[j] == 2 * st.n_hist[j - 1],
                      fmt("n_j not in {n, 2n}", double(st.n_hist[j]), double(st.n_hist[j - 1])));
    }
    // gradient-value link between consecutive restarts
    const auto& log = run.restart_log;
    for (std::size_t i = 0; i + 1 < log.size(); ++i) {
        const double lhs = kappa_rho / (2 * t.L) * log[i].g_norm * log[i].g_norm;
        const double rhs = log[i].F_r - log[i + 1].F_r;
        rep.check(lhs <= rhs + 1e-12, fmt("gradient-value link", lhs, rhs));
    }
    // monotone restarts
    for (std::size_t j = 1; j < st.F_hist.size(); ++j)
        rep.check(st.F_hist[j] <= st.F_hist[j - 1] + 1e-12 * std::max(1.0, std::abs(st.F_hist[j - 1])),
                  fmt("F(r_j) increased", st.F_hist[j], st.F_hist[j - 1]));
    if (run.exit == ffista::ExitReason::epsilon_reached)
        rep.check(run.g_norm <= cfg.epsilon, fmt("exit above epsilon", run.g_norm, cfg.epsilon));
}

/// Envelope of the value gap at every restart, with the measured F(r_0) - F*.
inline void check_envelope(Report& rep, const ffista::SolveReport& run, const ffista::FreeFistaConfig& cfg,
                           const Truth& t) {
    const double gap0 = run.F_initial - t.F_star;
    long N = run.state.n_hist.empty() ? 0 : run.state.n_hist[0];
    for (const auto& r : run.restart_log) {
        N += r.n_next; // n_0 + ... + n_j
        const double env = value_envelope(t.L, t.mu, cfg.rho, cfg.doubling_constant(), cfg.L_min, gap0, double(N));
        rep.check(r.F_r_plus - t.F_star <= env, fmt("value envelope", r.F_r_plus - t.F_star, env));
    }
}

/// Value at exit against 2 (1 + L / L_min)^2 eps^2 / mu.
inline void check_exit_value(Report& rep, const ffista::SolveReport& run, const ffista::FreeFistaConfig& cfg,
                             const Truth& t) {
    if (run.exit != ffista::ExitReason::epsilon_reached) return;
    const double w = 1 + t.L / cfg.L_min;
    const double bound = 2 * w * w * cfg.epsilon * cfg.epsilon / t.mu;
    rep.check(run.F_out - t.F_star <= bound, fmt("exit value", run.F_out - t.F_star, bound));
}

/// Sum of n_0..n_j, the quantity bounded by iteration_bound.
inline long n_sum(const ffista::SolveReport& run) {
    long s = 0;
    for (long n : run.state.n_hist) s += n;
    return s;
}

} // namespace cert
