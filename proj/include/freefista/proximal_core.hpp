#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "problem.hpp"

namespace ffista {

/// Step-size search parameters shared by every backtracking routine.
struct BacktrackConfig {
    double rho = 0.8;    ///< shrink factor in (0, 1)
    double delta = 0.95; ///< growth attempt tau/delta, delta in (0, 1]
    double L_min = 1e-12;
    double L0 = 1.0;
    int max_backtracks = 60;

    void validate() const {
        if (!(rho > 0 && rho < 1)) throw ConfigError("rho must lie in (0, 1)");
        if (!(delta > 0 && delta <= 1)) throw ConfigError("delta must lie in (0, 1]");
        if (!(L_min > 0)) throw ConfigError("L_min must be positive");
        if (!(L0 >= L_min)) throw ConfigError("L0 must be at least L_min");
        if (max_backtracks < 1) throw ConfigError("max_backtracks must be positive");
    }
};

struct FBStepResult {
    Vector point;      ///< T_{1/L_plus}(r)
    double L_plus = 0; ///< 1 / accepted step
    double g_norm = 0; ///< |g_{1/L_plus}(r)| = L_plus |r - point|
    int backtracks = 0;
};

/// T_tau(y) = prox_{tau h}(y - tau grad f(y)).
inline Vector forward_backward_map(const CompositeProblem& prob, const Vector& y, double tau) {
    return prob.prox_h(y - tau * prob.grad_f(y), tau);
}

/// Same map when grad f(y) is already known.
inline Vector forward_backward_map(const CompositeProblem& prob, const Vector& y, const Vector& grad_y,
                                   double tau) {
    return prob.prox_h(y - tau * grad_y, tau);
}

/// g_tau(y) = (y - T_tau(y)) / tau.
inline Vector composite_gradient_mapping(const CompositeProblem& prob, const Vector& y, double tau) {
    return (y - forward_backward_map(prob, y, tau)) / tau;
}

/// D_f(x, y) = f(x) - f(y) - <grad f(y), x - y>, using the problem's own
/// evaluation when it has one.
inline double bregman_f(const CompositeProblem& prob, const Vector& x, const Vector& y) {
    if (prob.has_bregman()) return prob.bregman(x, y);
    return prob.f(x) - prob.f(y) - prob.grad_f(y).dot(x - y);
}

/// Roundoff allowance, in units of the magnitudes entering the comparison.
inline constexpr double kAcceptanceRoundoff = 32 * std::numeric_limits<double>::epsilon();

/// Slack for comparing a Bregman value against the quadratic model when the
/// terms that formed them have total magnitude `scale`.
inline double acceptance_slack(double scale) { return kAcceptanceRoundoff * scale; }

/// D_f(x_new, y) <= |x_new - y|^2 / (2 tau), with D_f formed from f values.
inline bool acceptance_test(double f_x_new, double f_y, const Vector& grad_y, const Vector& x_new,
                            const Vector& y, double tau) {
    const Vector d = x_new - y;
    const double lin = grad_y.dot(d);
    const double model = d.squaredNorm() / (2.0 * tau);
    const double breg = f_x_new - f_y - lin;
    return breg <= model + acceptance_slack(std::abs(f_x_new) + std::abs(f_y) + std::abs(lin) + model);
}

/// Same test given the Bregman value directly.
inline bool acceptance_test(double breg, const Vector& x_new, const Vector& y, double tau) {
    const double model = (x_new - y).squaredNorm() / (2.0 * tau);
    return breg <= model + acceptance_slack(std::abs(breg) + model);
}

inline bool acceptance_test(const CompositeProblem& prob, const Vector& x_new, const Vector& y, double tau) {
    if (prob.has_bregman()) return acceptance_test(prob.bregman(x_new, y), x_new, y, tau);
    return acceptance_test(prob.f(x_new), prob.f(y), prob.grad_f(y), x_new, y, tau);
}

namespace detail {

// Acceptance with f(y), grad f(y) and f(x_new) already at hand.
inline bool accepts(const CompositeProblem& prob, double f_x_new, double f_y, const Vector& grad_y,
                    const Vector& x_new, const Vector& y, double tau) {
    if (prob.has_bregman()) return acceptance_test(prob.bregman(x_new, y), x_new, y, tau);
    return acceptance_test(f_x_new, f_y, grad_y, x_new, y, tau);
}

} // namespace detail

/// Forward-backward step with Armijo backtracking.
///
/// Tries tau = 1/L0, rho/L0, rho^2/L0, ... and returns the first point passing
/// the Bregman test, together with L_plus = 1/tau.
inline FBStepResult fb_bt(const CompositeProblem& prob, const Vector& r, double L0, double rho,
                          int max_backtracks = 60) {
    if (!(L0 > 0)) throw ConfigError("fb_bt: L0 must be positive");
    if (!(rho > 0 && rho < 1)) throw ConfigError("fb_bt: rho must lie in (0, 1)");
    const double f_r = prob.has_bregman() ? 0.0 : prob.f(r);
    const Vector grad_r = prob.grad_f(r);
    double L = L0;
    for (int i = 0; i <= max_backtracks; ++i) {
        const double tau = 1.0 / L;
        Vector point = forward_backward_map(prob, r, grad_r, tau);
        if (detail::accepts(prob, prob.has_bregman() ? 0.0 : prob.f(point), f_r, grad_r, point, r, tau)) {
            const double g_norm = L * (r - point).norm();
            return {std::move(point), L, g_norm, i};
        }
        L /= rho;
    }
    throw BacktrackDivergence("fb_bt: no acceptable step after " + std::to_string(max_backtracks) +
                              " backtracks (L reached " + std::to_string(L) + ")");
}

} // namespace ffista
