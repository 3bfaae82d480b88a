#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "core.hpp"

// Linear imaging operators on row-major images stored as flat vectors.
namespace ffista {

/// Symmetric (half-sample) reflection of an index into [0, n).
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

/// q x q block averaging from a rows x cols image to (rows/q) x (cols/q).
/// The adjoint replicates each coarse pixel over its block and divides by q^2.
class BlockDownsample {
public:
    BlockDownsample(Eigen::Index rows, Eigen::Index cols, int q) : rows_(rows), cols_(cols), q_(q) {
        if (q < 1 || rows % q != 0 || cols % q != 0)
            throw ShapeError("BlockDownsample: image " + std::to_string(rows) + "x" + std::to_string(cols) +
                             " is not divisible by factor " + std::to_string(q));
    }

    Eigen::Index in_size() const noexcept { return rows_ * cols_; }
    Eigen::Index out_rows() const noexcept { return rows_ / q_; }
    Eigen::Index out_cols() const noexcept { return cols_ / q_; }
    Eigen::Index out_size() const noexcept { return out_rows() * out_cols(); }
    int factor() const noexcept { return q_; }

    Vector apply(const Vector& x) const {
        require_same_size(x.size(), in_size(), "BlockDownsample::apply");
        Vector y = Vector::Zero(out_size());
        const double w = 1.0 / (double(q_) * q_);
        for (Eigen::Index r = 0; r < rows_; ++r)
            for (Eigen::Index c = 0; c < cols_; ++c) y[(r / q_) * out_cols() + c / q_] += w * x[r * cols_ + c];
        return y;
    }

    Vector adjoint(const Vector& y) const {
        require_same_size(y.size(), out_size(), "BlockDownsample::adjoint");
        Vector x(in_size());
        const double w = 1.0 / (double(q_) * q_);
        for (Eigen::Index r = 0; r < rows_; ++r)
            for (Eigen::Index c = 0; c < cols_; ++c) x[r * cols_ + c] = w * y[(r / q_) * out_cols() + c / q_];
        return x;
    }

private:
    Eigen::Index rows_, cols_;
    int q_;
};

/// Direct 2-D convolution with a centred kernel and reflective boundary.
class Convolution2D {
public:
    Convolution2D(Eigen::Index rows, Eigen::Index cols, Matrix kernel)
        : rows_(rows), cols_(cols), kernel_(std::move(kernel)) {
        if (rows <= 0 || cols <= 0 || kernel_.size() == 0) throw ShapeError("Convolution2D: empty image or kernel");
    }

    Eigen::Index size() const noexcept { return rows_ * cols_; }
    const Matrix& kernel() const noexcept { return kernel_; }

    Vector apply(const Vector& x) const {
        require_same_size(x.size(), size(), "Convolution2D::apply");
        Vector y = Vector::Zero(size());
        visit([&](Eigen::Index out, Eigen::Index in, double k) { y[out] += k * x[in]; });
        return y;
    }

    Vector adjoint(const Vector& y) const {
        require_same_size(y.size(), size(), "Convolution2D::adjoint");
        Vector x = Vector::Zero(size());
        visit([&](Eigen::Index out, Eigen::Index in, double k) { x[in] += k * y[out]; });
        return x;
    }

private:
    // Calls fn(output pixel, input pixel, weight) for every nonzero tap.
    template <class Fn>
    void visit(Fn&& fn) const {
        const Eigen::Index kr = kernel_.rows(), kc = kernel_.cols();
        const Eigen::Index cr = kr / 2, cc = kc / 2;
        for (Eigen::Index r = 0; r < rows_; ++r)
            for (Eigen::Index c = 0; c < cols_; ++c)
                for (Eigen::Index a = 0; a < kr; ++a)
                    for (Eigen::Index b = 0; b < kc; ++b) {
                        const double k = kernel_(a, b);
                        if (k == 0.0) continue;
                        const Eigen::Index sr = reflect_index(r - a + cr, rows_);
                        const Eigen::Index sc = reflect_index(c - b + cc, cols_);
                        fn(r * cols_ + c, sr * cols_ + sc, k);
                    }
    }

    Eigen::Index rows_, cols_;
    Matrix kernel_;
};

/// Normalised isotropic Gaussian point spread function of odd side.
inline Matrix gaussian_psf(int side, double sigma) {
    if (side < 1 || side % 2 == 0) throw ShapeError("gaussian_psf: side must be odd and positive");
    Matrix k(side, side);
    const int c = side / 2;
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            k(i, j) = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2 * sigma * sigma));
    return k / k.sum();
}

} // namespace ffista
