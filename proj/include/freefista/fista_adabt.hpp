#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "proximal_core.hpp"

namespace ffista {

/// t_{k+1} = (1 + sqrt(1 + 4 (tau_k / tau_{k+1}) t_k^2)) / 2.
///
/// Satisfies tau_{k+1} t_{k+1} (t_{k+1} - 1) = tau_k t_k^2.
inline double t_update(double t_k, double tau_k, double tau_k1) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * (tau_k / tau_k1) * t_k * t_k));
}

/// Squared harmonic mean of sqrt(L_i): ((1/n) sum 1/sqrt(L_i))^-2.
inline double harmonic_L_bar(std::span<const double> L) {
    if (L.empty()) throw ArityError("harmonic_L_bar: empty list");
    double s = 0;
    for (double v : L) s += 1.0 / std::sqrt(v);
    const double mean = s / double(L.size());
    return 1.0 / (mean * mean);
}

/// One accepted iteration of the adaptive-backtracking FISTA.
struct AdaBtStep {
    int backtracks = 0;   ///< rejected passes before acceptance
    double L = 0;         ///< 1 / tau_{k+1}
    double t = 1;         ///< t_{k+1}
    double F = 0;         ///< F(x_{k+1})
    double step_norm = 0; ///< |x_{k+1} - x_k|
    double time_s = 0;
};

struct AdaBtOptions {
    double rho = 0.8;
    double delta = 0.95;
    double L_min = 1e-12;
    int max_backtracks = 60;
    /// When false every first trial step is accepted and L never moves:
    /// plain FISTA with fixed step 1/L0.
    bool backtracking = true;
    Clock::time_point start = Clock::now();
};

/// Loop state of the adaptive-backtracking FISTA.
struct AdaBtState {
    Vector x_prev;
    Vector x_cur;
    double t = 1;
    double tau = 1;
    double L = 1; ///< 1 / tau, tracked separately so that L >= L_min holds exactly
    long k = 0;
    long cum_backtracks = 0;
};

/// FISTA with non-monotone backtracking, advanced one iteration at a time.
///
/// Each iteration first tries the enlarged step min(tau_k / delta, 1 / L_min),
/// then shrinks it by rho until the Bregman test holds at the extrapolated
/// point. t_{k+1}, the extrapolation and the prox step depend on the trial
/// step, so all of them are recomputed on every pass.
class FistaAdaBt {
public:
    FistaAdaBt(const CompositeProblem& prob, const Vector& x0, double L0, AdaBtOptions opts)
        : prob_(&prob), opts_(opts) {
        require_same_size(x0.size(), prob.dim(), "fista_adabt start");
        if (!(opts_.rho > 0 && opts_.rho < 1)) throw ConfigError("rho must lie in (0, 1)");
        if (!(opts_.delta > 0 && opts_.delta <= 1)) throw ConfigError("delta must lie in (0, 1]");
        if (!(opts_.L_min > 0)) throw ConfigError("L_min must be positive");
        if (!(L0 >= opts_.L_min)) throw ConfigError("L0 must be at least L_min");
        state_.x_prev = x0;
        state_.x_cur = x0;
        state_.L = L0;
        state_.tau = 1.0 / L0;
    }

    const AdaBtState& state() const noexcept { return state_; }
    const Vector& x() const noexcept { return state_.x_cur; }
    double L() const noexcept { return state_.L; }

    AdaBtStep step() {
        AdaBtState& s = state_;
        double L_trial = opts_.backtracking ? std::max(opts_.delta * s.L, opts_.L_min) : s.L;
        for (int pass = 0;; ++pass) {
            const double tau = 1.0 / L_trial;
            const double t_next = t_update(s.t, s.tau, tau);
            const double beta = (s.t - 1.0) / t_next;
            const Vector y = s.x_cur + beta * (s.x_cur - s.x_prev);
            const double f_y = prob_->has_bregman() ? 0.0 : prob_->f(y);
            const Vector grad_y = prob_->grad_f(y);
            Vector x_new = forward_backward_map(*prob_, y, grad_y, tau);
            const double f_new = prob_->f(x_new);
            if (!opts_.backtracking || detail::accepts(*prob_, f_new, f_y, grad_y, x_new, y, tau)) {
                AdaBtStep out;
                out.backtracks = pass;
                out.L = L_trial;
                out.t = t_next;
                out.F = f_new + prob_->h(x_new);
                out.step_norm = (x_new - s.x_cur).norm();
                s.x_prev = std::move(s.x_cur);
                s.x_cur = std::move(x_new);
                s.t = t_next;
                s.tau = tau;
                s.L = L_trial;
                ++s.k;
                s.cum_backtracks += pass;
                out.time_s = seconds_since(opts_.start);
                return out;
            }
            if (pass >= opts_.max_backtracks)
                throw BacktrackDivergence("fista_adabt: no acceptable step after " +
                                          std::to_string(opts_.max_backtracks) + " backtracks at iteration " +
                                          std::to_string(s.k + 1));
            L_trial /= opts_.rho;
        }
    }

private:
    const CompositeProblem* prob_;
    AdaBtOptions opts_;
    AdaBtState state_;
};

struct AdaBtOutput {
    Vector x_final;
    double L_est = 0; ///< 1 / tau_n
    double F0 = 0;    ///< F(x_0)
    std::vector<AdaBtStep> steps;
    long total_backtracks = 0;

    std::vector<double> L_history() const {
        std::vector<double> out;
        out.reserve(steps.size());
        for (const auto& s : steps) out.push_back(s.L);
        return out;
    }
};

/// Runs exactly n iterations from x0 with initial estimate L0 (t restarts at 1).
inline AdaBtOutput fista_adabt(const CompositeProblem& prob, const Vector& x0, long n, double L0,
                               AdaBtOptions opts = {}) {
    if (n < 1) throw ConfigError("fista_adabt: n must be positive");
    FistaAdaBt solver(prob, x0, L0, opts);
    AdaBtOutput out;
    out.F0 = prob.F(x0);
    out.steps.reserve(static_cast<std::size_t>(n));
    for (long k = 0; k < n; ++k) {
        out.steps.push_back(solver.step());
        out.total_backtracks += out.steps.back().backtracks;
    }
    out.x_final = solver.x();
    out.L_est = solver.L();
    return out;
}

} // namespace ffista
