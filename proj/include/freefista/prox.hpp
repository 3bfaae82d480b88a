#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "core.hpp"

// Closed-form proximal maps used by the bundled problems.
namespace ffista::prox {

/// prox of t*|.|_1: sign(z) * max(|z| - t, 0).
inline Vector soft_threshold(const Vector& z, double t) {
    return z.unaryExpr([t](double v) {
        const double a = std::abs(v) - t;
        return a > 0 ? std::copysign(a, v) : 0.0;
    });
}

/// prox of t*|.|_1 + indicator of the nonnegative orthant.
inline Vector nonneg_soft_threshold(const Vector& z, double t) {
    return z.unaryExpr([t](double v) { return std::max(v - t, 0.0); });
}

inline double l1_norm(const Vector& x) { return x.lpNorm<1>(); }

/// lambda*|x|_1 + indicator{x >= 0}
inline double nonneg_l1(const Vector& x, double lambda) {
    if ((x.array() < 0).any()) return std::numeric_limits<double>::infinity();
    return lambda * x.sum();
}

} // namespace ffista::prox
