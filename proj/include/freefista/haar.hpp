#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "core.hpp"

namespace ffista {

enum class Direction { forward, inverse };

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// One analysis level on data[0], data[stride], ..., data[(len-1)*stride].
// Approximations go to the first half, details to the second.
inline void haar_analysis_step(double* data, Eigen::Index len, Eigen::Index stride, double* work) {
    const Eigen::Index half = len / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
        const double a = data[(2 * i) * stride];
        const double b = data[(2 * i + 1) * stride];
        work[i] = (a + b) * kInvSqrt2;
        work[half + i] = (a - b) * kInvSqrt2;
    }
    for (Eigen::Index i = 0; i < len; ++i) data[i * stride] = work[i];
}

inline void haar_synthesis_step(double* data, Eigen::Index len, Eigen::Index stride, double* work) {
    const Eigen::Index half = len / 2;
    for (Eigen::Index i = 0; i < half; ++i) {
        const double a = data[i * stride];
        const double d = data[(half + i) * stride];
        work[2 * i] = (a + d) * kInvSqrt2;
        work[2 * i + 1] = (a - d) * kInvSqrt2;
    }
    for (Eigen::Index i = 0; i < len; ++i) data[i * stride] = work[i];
}

inline bool divisible_by_pow2(Eigen::Index n, int levels) {
    return levels >= 0 && levels < 62 && n > 0 && n % (Eigen::Index{1} << levels) == 0;
}

} // namespace detail

/// Multi-level orthonormal Haar transform of a 1-D signal.
///
/// Layout after the forward pass is the usual pyramid: coarsest approximation
/// first, then details from coarse to fine.
inline Vector haar_transform(const Vector& x, int levels, Direction dir) {
    const Eigen::Index n = x.size();
    if (!detail::divisible_by_pow2(n, levels))
        throw ShapeError("haar_transform: length " + std::to_string(n) +
                         " is not a multiple of 2^" + std::to_string(levels));
    Vector out = x;
    Vector work(n);
    if (dir == Direction::forward) {
        for (int l = 0; l < levels; ++l)
            detail::haar_analysis_step(out.data(), n >> l, 1, work.data());
    } else {
        for (int l = levels - 1; l >= 0; --l)
            detail::haar_synthesis_step(out.data(), n >> l, 1, work.data());
    }
    return out;
}

/// Separable 2-D Haar transform on a row-major rows x cols image.
class Haar2D {
public:
    Haar2D(Eigen::Index rows, Eigen::Index cols, int levels) : rows_(rows), cols_(cols), levels_(levels) {
        if (!detail::divisible_by_pow2(rows, levels) || !detail::divisible_by_pow2(cols, levels))
            throw ShapeError("Haar2D: image sides " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " are not multiples of 2^" + std::to_string(levels));
    }

    Eigen::Index rows() const noexcept { return rows_; }
    Eigen::Index cols() const noexcept { return cols_; }
    Eigen::Index size() const noexcept { return rows_ * cols_; }
    int levels() const noexcept { return levels_; }

    Vector forward(const Vector& x) const { return apply(x, Direction::forward); }
    Vector inverse(const Vector& x) const { return apply(x, Direction::inverse); }

    Vector apply(const Vector& x, Direction dir) const {
        require_same_size(x.size(), size(), "Haar2D");
        Vector out = x;
        Vector work(std::max(rows_, cols_));
        double* d = out.data();
        auto level = [&](int l) {
            const Eigen::Index r = rows_ >> l, c = cols_ >> l;
            if (dir == Direction::forward) {
                for (Eigen::Index i = 0; i < r; ++i) detail::haar_analysis_step(d + i * cols_, c, 1, work.data());
                for (Eigen::Index j = 0; j < c; ++j) detail::haar_analysis_step(d + j, r, cols_, work.data());
            } else {
                for (Eigen::Index j = 0; j < c; ++j) detail::haar_synthesis_step(d + j, r, cols_, work.data());
                for (Eigen::Index i = 0; i < r; ++i) detail::haar_synthesis_step(d + i * cols_, c, 1, work.data());
            }
        };
        if (dir == Direction::forward)
            for (int l = 0; l < levels_; ++l) level(l);
        else
            for (int l = levels_ - 1; l >= 0; --l) level(l);
        return out;
    }

private:
    Eigen::Index rows_, cols_;
    int levels_;
};

} // namespace ffista
