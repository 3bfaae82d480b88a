#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "core.hpp"

namespace ffista {

/// Known constants of a synthetic instance, used only by tests and certificates.
struct GroundTruth {
    double L_true = 0;
    double mu_true = 0;
    double F_star = 0;
    Vector x_star;
};

/// Callbacks describing F = f + h.
struct ProblemFunctions {
    std::function<double(const Vector&)> f;
    std::function<Vector(const Vector&)> grad_f;
    /// May return +infinity outside dom h.
    std::function<double(const Vector&)> h;
    /// (z, tau) -> argmin_w h(w) + |w - z|^2 / (2 tau)
    std::function<Vector(const Vector&, double)> prox_h;
    /// Optional (x, y) -> D_f(x, y) evaluated without forming f(x) - f(y).
    /// Near convergence the difference of f values is pure roundoff, so
    /// problems that can supply this should.
    std::function<double(const Vector&, const Vector&)> bregman;
};

/// Composite objective F = f + h.
///
/// f is convex and differentiable with Lipschitz gradient; h is convex, proper,
/// lower semicontinuous and has a cheap proximal map. The object is immutable
/// once built, so one instance can be shared across concurrently running solvers.
class CompositeProblem {
public:
    CompositeProblem(std::string name, Eigen::Index dim, ProblemFunctions fns,
                     std::optional<GroundTruth> truth = std::nullopt)
        : name_(std::move(name)), dim_(dim), fns_(std::move(fns)), truth_(std::move(truth)) {
        if (dim_ <= 0) throw ShapeError("CompositeProblem: dimension must be positive");
        if (!fns_.f || !fns_.grad_f || !fns_.h || !fns_.prox_h)
            throw ConfigError("CompositeProblem: f, grad_f, h and prox_h are required");
    }

    const std::string& name() const noexcept { return name_; }
    Eigen::Index dim() const noexcept { return dim_; }

    double f(const Vector& x) const {
        require_same_size(x.size(), dim_, "f");
        return fns_.f(x);
    }
    Vector grad_f(const Vector& x) const {
        require_same_size(x.size(), dim_, "grad_f");
        return fns_.grad_f(x);
    }
    double h(const Vector& x) const {
        require_same_size(x.size(), dim_, "h");
        return fns_.h(x);
    }
    Vector prox_h(const Vector& z, double tau) const {
        require_same_size(z.size(), dim_, "prox_h");
        return fns_.prox_h(z, tau);
    }
    double F(const Vector& x) const { return f(x) + h(x); }

    bool has_bregman() const noexcept { return static_cast<bool>(fns_.bregman); }
    double bregman(const Vector& x, const Vector& y) const {
        require_same_size(x.size(), dim_, "bregman");
        require_same_size(y.size(), dim_, "bregman");
        return fns_.bregman(x, y);
    }

    const std::optional<GroundTruth>& ground_truth() const noexcept { return truth_; }
    bool has_ground_truth() const noexcept { return truth_.has_value(); }

private:
    std::string name_;
    Eigen::Index dim_;
    ProblemFunctions fns_;
    std::optional<GroundTruth> truth_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace ffista
