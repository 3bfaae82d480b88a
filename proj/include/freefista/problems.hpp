#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include <Eigen/SparseCore>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "haar.hpp"
#include "imaging.hpp"
#include "problem.hpp"
#include "prox.hpp"

namespace ffista {

// Boost.Random distributions are specified algorithmically, so seeded draws
// are identical across standard libraries.
using Rng = boost::random::mt19937_64;

inline Vector random_normal(Eigen::Index n, Rng& rng) {
    boost::random::normal_distribution<double> d;
    Vector v(n);
    for (auto& e : v) e = d(rng);
    return v;
}

inline Vector random_uniform(Eigen::Index n, double lo, double hi, Rng& rng) {
    boost::random::uniform_real_distribution<double> d(lo, hi);
    Vector v(n);
    for (auto& e : v) e = d(rng);
    return v;
}

// ---------------------------------------------------------------------------
// Diagonal quadratic (+ optional l1) with closed-form solution.

/// f(x) = 1/2 x'Qx - c'x with Q = diag(q), h = lambda |x|_1.
///
/// Q is positive definite, so F is min(q)-strongly convex and satisfies
/// quadratic growth with mu = min(q); grad f is max(q)-Lipschitz.
inline CompositeProblem make_diagonal_quadratic(Vector q, Vector c, double lambda = 0.0,
                                                std::string name = "quadratic") {
    require_same_size(c.size(), q.size(), "make_diagonal_quadratic");
    if (q.size() == 0 || (q.array() <= 0).any()) throw InvalidConditioning("diagonal must be positive");
    if (lambda < 0) throw ConfigError("lambda must be nonnegative");

    GroundTruth gt;
    gt.L_true = q.maxCoeff();
    gt.mu_true = q.minCoeff();
    gt.x_star = prox::soft_threshold(c, lambda).cwiseQuotient(q);
    const Vector& xs = gt.x_star;
    gt.F_star = 0.5 * xs.dot(q.cwiseProduct(xs)) - c.dot(xs) + lambda * xs.lpNorm<1>();

    auto qp = std::make_shared<const Vector>(std::move(q));
    auto cp = std::make_shared<const Vector>(std::move(c));
    const Eigen::Index n = qp->size();
    ProblemFunctions fns;
    fns.f = [qp, cp](const Vector& x) { return 0.5 * x.dot(qp->cwiseProduct(x)) - cp->dot(x); };
    fns.grad_f = [qp, cp](const Vector& x) -> Vector { return qp->cwiseProduct(x) - *cp; };
    fns.h = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
    fns.prox_h = [lambda](const Vector& z, double tau) { return prox::soft_threshold(z, lambda * tau); };
    fns.bregman = [qp](const Vector& x, const Vector& y) {
        const Vector d = x - y;
        return 0.5 * d.dot(qp->cwiseProduct(d));
    };
    return CompositeProblem(std::move(name), n, std::move(fns), std::move(gt));
}

/// Synthetic instance with spectrum spanning exactly [mu, L].
///
/// The diagonal holds mu and L plus log-uniform values in between; c is
/// standard normal. lambda > 0 selects the l1 variant.
inline CompositeProblem make_quadratic_growth_test(Eigen::Index dim, double L, double mu, std::uint64_t seed,
                                                   double lambda = 0.0) {
    if (!(mu > 0) || !(L > 0) || mu > L) throw InvalidConditioning("need 0 < mu <= L");
    if (dim < 1) throw ShapeError("dim must be positive");
    if (dim == 1 && mu != L) throw InvalidConditioning("dim = 1 cannot attain both mu and L");

    Rng rng(seed);
    Vector q = Vector::Constant(dim, mu);
    if (mu < L) {
        boost::random::uniform_real_distribution<double> u(std::log(mu), std::log(L));
        for (Eigen::Index i = 0; i < dim; ++i) q[i] = std::exp(u(rng));
    }
    q[0] = mu;
    if (dim > 1) q[dim - 1] = L;
    Vector c = random_normal(dim, rng);
    return make_diagonal_quadratic(std::move(q), std::move(c), lambda,
                                   lambda > 0 ? "quadratic-l1" : "quadratic");
}

// ---------------------------------------------------------------------------
// Lasso: 1/2 |Ax - b|^2 + lambda |x|_1

struct LassoInstance {
    Matrix A;
    Vector b;
    double lambda = 0;
};

inline CompositeProblem make_problem(LassoInstance inst) {
    require_same_size(inst.b.size(), inst.A.rows(), "lasso labels");
    auto p = std::make_shared<const LassoInstance>(std::move(inst));
    const double lambda = p->lambda;
    ProblemFunctions fns;
    fns.f = [p](const Vector& x) { return 0.5 * (p->A * x - p->b).squaredNorm(); };
    fns.grad_f = [p](const Vector& x) -> Vector { return p->A.transpose() * (p->A * x - p->b); };
    fns.h = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
    fns.prox_h = [lambda](const Vector& z, double tau) { return prox::soft_threshold(z, lambda * tau); };
    fns.bregman = [p](const Vector& x, const Vector& y) { return 0.5 * (p->A * (x - y)).squaredNorm(); };
    return CompositeProblem("lasso", p->A.cols(), std::move(fns));
}

/// Gaussian design with a sparse planted signal and small noise.
inline LassoInstance make_random_lasso(Eigen::Index m, Eigen::Index n, double lambda, std::uint64_t seed) {
    Rng rng(seed);
    LassoInstance inst;
    inst.A = Matrix(m, n);
    boost::random::normal_distribution<double> g;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) inst.A(i, j) = g(rng) / std::sqrt(double(m));
    Vector w = Vector::Zero(n);
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(n, 5); ++i) w[(i * 7) % n] = g(rng);
    inst.b = inst.A * w + 0.01 * random_normal(m, rng);
    inst.lambda = lambda;
    return inst;
}

// ---------------------------------------------------------------------------
// l2-l1 regularised logistic regression

/// Rows of A are samples (a_j in R^n), b holds +-1 labels.
template <class MatrixType = Matrix>
class LogisticL2L1Instance {
public:
    LogisticL2L1Instance(MatrixType A, Vector b, double lambda1, double lambda2)
        : A_(std::move(A)), b_(std::move(b)), lambda1_(lambda1), lambda2_(lambda2) {
        require_same_size(b_.size(), A_.rows(), "LogisticL2L1Instance labels");
        for (double v : b_)
            if (v != 1.0 && v != -1.0) throw ConfigError("logistic labels must be +1 or -1");
        if (!(lambda1 > 0)) throw ConfigError("lambda1 must be positive");
        // lambda2 = 0 drops the strongly convex term; kept for hand-checkable cases
        if (!(lambda2 >= 0)) throw ConfigError("lambda2 must be nonnegative");
        Atb_ = A_.transpose() * b_;
    }

    const MatrixType& A() const noexcept { return A_; }
    const Vector& b() const noexcept { return b_; }
    double lambda1() const noexcept { return lambda1_; }
    double lambda2() const noexcept { return lambda2_; }
    Eigen::Index samples() const noexcept { return A_.rows(); }
    Eigen::Index features() const noexcept { return A_.cols(); }
    const Vector& Atb() const noexcept { return Atb_; }

    /// lambda1 / (2 |A'b|_inf), the weight of the loss term.
    double loss_weight() const {
        const double inf = Atb_.size() ? Atb_.cwiseAbs().maxCoeff() : 0.0;
        if (inf == 0.0) throw DegenerateData("A^T b is zero");
        return lambda1_ / (2.0 * inf);
    }

private:
    MatrixType A_;
    Vector b_;
    double lambda1_, lambda2_;
    Vector Atb_;
};

namespace detail {

// log(1 + e^t) without overflow
inline double log1pexp(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

inline double sigmoid(double u) {
    if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

} // namespace detail

template <class MatrixType>
double logistic_value(const LogisticL2L1Instance<MatrixType>& inst, const Vector& x) {
    require_same_size(x.size(), inst.features(), "logistic_value");
    const Vector margins = (inst.A() * x).cwiseProduct(inst.b());
    double loss = 0;
    for (double s : margins) loss += detail::log1pexp(-s);
    return inst.loss_weight() * loss + 0.5 * inst.lambda2() * x.squaredNorm();
}

template <class MatrixType>
std::pair<double, Vector> logistic_value_grad(const LogisticL2L1Instance<MatrixType>& inst, const Vector& x) {
    require_same_size(x.size(), inst.features(), "logistic_value_grad");
    const double w = inst.loss_weight();
    const Vector margins = (inst.A() * x).cwiseProduct(inst.b());
    double loss = 0;
    Vector coef(margins.size());
    for (Eigen::Index j = 0; j < margins.size(); ++j) {
        loss += detail::log1pexp(-margins[j]);
        coef[j] = -inst.b()[j] * detail::sigmoid(-margins[j]);
    }
    Vector grad = w * (inst.A().transpose() * coef) + inst.lambda2() * x;
    return {w * loss + 0.5 * inst.lambda2() * x.squaredNorm(), std::move(grad)};
}

/// D_f(x, y) for the logistic objective, evaluated per sample from the margin
/// increment so that small steps do not cancel against the loss itself.
template <class MatrixType>
double logistic_bregman(const LogisticL2L1Instance<MatrixType>& inst, const Vector& x, const Vector& y) {
    require_same_size(x.size(), inst.features(), "logistic_bregman");
    require_same_size(y.size(), inst.features(), "logistic_bregman");
    const Vector d = x - y;
    const Vector s = (inst.A() * y).cwiseProduct(inst.b());
    const Vector ds = (inst.A() * d).cwiseProduct(inst.b());
    double sum = 0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
        const double p = detail::sigmoid(-s[j]);
        const double dj = ds[j];
        if (std::abs(dj) < 1e-3) {
            // Taylor series of phi(s + d) - phi(s) - phi'(s) d with phi(s) = log(1 + e^-s)
            const double c = p * (1 - p);
            sum += c * dj * dj * (0.5 - (1 - 2 * p) * dj / 6 + (1 - 6 * p + 6 * p * p) * dj * dj / 24);
        } else if (std::abs(dj) < 30) {
            sum += std::log1p(p * std::expm1(-dj)) + p * dj;
        } else {
            sum += detail::log1pexp(-s[j] - dj) - detail::log1pexp(-s[j]) + p * dj;
        }
    }
    return inst.loss_weight() * sum + 0.5 * inst.lambda2() * d.squaredNorm();
}

/// Upper bound lambda1 |A'b|^2 / (8 |A'b|_inf) + lambda2 on the gradient's Lipschitz constant.
template <class MatrixType>
double logistic_lipschitz_estimate(const LogisticL2L1Instance<MatrixType>& inst) {
    const double inf = inst.Atb().size() ? inst.Atb().cwiseAbs().maxCoeff() : 0.0;
    if (inf == 0.0) throw DegenerateData("A^T b is zero");
    return inst.lambda1() * inst.Atb().squaredNorm() / (8.0 * inf) + inst.lambda2();
}

/// F = logistic loss + l2 term + |x|_1.
template <class MatrixType>
CompositeProblem make_problem(LogisticL2L1Instance<MatrixType> inst) {
    auto p = std::make_shared<const LogisticL2L1Instance<MatrixType>>(std::move(inst));
    p->loss_weight();
    ProblemFunctions fns;
    fns.f = [p](const Vector& x) { return logistic_value(*p, x); };
    fns.grad_f = [p](const Vector& x) { return logistic_value_grad(*p, x).second; };
    fns.h = [](const Vector& x) { return x.lpNorm<1>(); };
    fns.prox_h = [](const Vector& z, double tau) { return prox::soft_threshold(z, tau); };
    fns.bregman = [p](const Vector& x, const Vector& y) { return logistic_bregman(*p, x, y); };
    return CompositeProblem("logistic", p->features(), std::move(fns));
}

/// Standard normal A (m samples, n features) and independent uniform +-1 labels.
inline LogisticL2L1Instance<Matrix> make_random_logistic(Eigen::Index m, Eigen::Index n, double lambda1,
                                                         double lambda2, std::uint64_t seed) {
    Rng rng(seed);
    Matrix A(m, n);
    boost::random::normal_distribution<double> g;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = g(rng);
    boost::random::bernoulli_distribution<double> coin(0.5);
    Vector b(m);
    for (auto& v : b) v = coin(rng) ? 1.0 : -1.0;
    return LogisticL2L1Instance<Matrix>(std::move(A), std::move(b), lambda1, lambda2);
}

// ---------------------------------------------------------------------------
// Inpainting: 1/2 |Mx - y|^2 + lambda |Tx|_1 with T an orthogonal wavelet transform

class InpaintingInstance {
public:
    InpaintingInstance(Vector mask, Vector observed, Haar2D transform, double lambda)
        : mask_(std::move(mask)), y_(std::move(observed)), T_(std::move(transform)), lambda_(lambda) {
        require_same_size(mask_.size(), T_.size(), "InpaintingInstance mask");
        require_same_size(y_.size(), T_.size(), "InpaintingInstance observation");
        for (double v : mask_)
            if (v != 0.0 && v != 1.0) throw ConfigError("inpainting mask must be 0/1");
        if (!(lambda > 0)) throw ConfigError("lambda must be positive");
        y_ = y_.cwiseProduct(mask_);
    }

    const Vector& mask() const noexcept { return mask_; }
    const Vector& observed() const noexcept { return y_; }
    const Haar2D& transform() const noexcept { return T_; }
    double lambda() const noexcept { return lambda_; }

    Vector apply_mask(const Vector& x) const { return x.cwiseProduct(mask_); }

    /// prox of tau*lambda*|T.|_1 = T' soft(T z, tau*lambda), exact because T is orthogonal.
    Vector prox(const Vector& z, double tau) const {
        return T_.inverse(prox::soft_threshold(T_.forward(z), lambda_ * tau));
    }

private:
    Vector mask_;
    Vector y_;
    Haar2D T_;
    double lambda_;
};

inline CompositeProblem make_problem(InpaintingInstance inst) {
    auto p = std::make_shared<const InpaintingInstance>(std::move(inst));
    ProblemFunctions fns;
    fns.f = [p](const Vector& x) { return 0.5 * (p->apply_mask(x) - p->observed()).squaredNorm(); };
    fns.grad_f = [p](const Vector& x) -> Vector { return p->apply_mask(p->apply_mask(x) - p->observed()); };
    fns.h = [p](const Vector& x) { return p->lambda() * p->transform().forward(x).lpNorm<1>(); };
    fns.prox_h = [p](const Vector& z, double tau) { return p->prox(z, tau); };
    fns.bregman = [p](const Vector& x, const Vector& y) { return 0.5 * p->apply_mask(x - y).squaredNorm(); };
    return CompositeProblem("inpainting", p->transform().size(), std::move(fns));
}

/// Piecewise-smooth test image: a ramp background with two constant blocks and a disc.
inline Vector synthetic_image(Eigen::Index rows, Eigen::Index cols) {
    Vector img(rows * cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double u = double(r) / rows, v = double(c) / cols;
            double val = 0.2 + 0.3 * v;
            if (u > 0.15 && u < 0.45 && v > 0.1 && v < 0.5) val = 0.9;
            if (u > 0.6 && u < 0.9 && v > 0.55 && v < 0.85) val = 0.05;
            if ((u - 0.3) * (u - 0.3) + (v - 0.72) * (v - 0.72) < 0.02) val = 0.6;
            img[r * cols + c] = val;
        }
    return img;
}

/// Random mask keeping each pixel with probability 1 - missing.
inline InpaintingInstance make_synthetic_inpainting(Eigen::Index side, int levels, double missing, double lambda,
                                                    std::uint64_t seed) {
    Rng rng(seed);
    boost::random::bernoulli_distribution<double> keep(1.0 - missing);
    Vector mask(side * side);
    for (auto& m : mask) m = keep(rng) ? 1.0 : 0.0;
    Vector truth = synthetic_image(side, side);
    return InpaintingInstance(mask, truth.cwiseProduct(mask), Haar2D(side, side, levels), lambda);
}

// ---------------------------------------------------------------------------
// Poisson super-resolution: KL(MHx + b; z) + lambda |x|_1 + i_{x >= 0}

class PoissonSRInstance {
public:
    PoissonSRInstance(BlockDownsample M, Convolution2D H, Vector z, double b_bar, double lambda)
        : M_(std::move(M)), H_(std::move(H)), z_(std::move(z)), b_bar_(b_bar), lambda_(lambda) {
        require_same_size(H_.size(), M_.in_size(), "PoissonSRInstance operators");
        require_same_size(z_.size(), M_.out_size(), "PoissonSRInstance data");
        if ((z_.array() < 0).any()) throw ConfigError("Poisson data must be nonnegative");
        if (!(b_bar > 0)) throw ConfigError("background must be positive");
        if (!(lambda > 0)) throw ConfigError("lambda must be positive");
    }

    const BlockDownsample& M() const noexcept { return M_; }
    const Convolution2D& H() const noexcept { return H_; }
    const Vector& z() const noexcept { return z_; }
    double b_bar() const noexcept { return b_bar_; }
    double lambda() const noexcept { return lambda_; }
    Eigen::Index n() const noexcept { return M_.in_size(); }
    Eigen::Index m() const noexcept { return M_.out_size(); }

    Vector forward(const Vector& x) const { return M_.apply(H_.apply(x)); }
    Vector adjoint(const Vector& y) const { return H_.adjoint(M_.adjoint(y)); }

private:
    BlockDownsample M_;
    Convolution2D H_;
    Vector z_;
    double b_bar_, lambda_;
};

namespace detail {

inline Vector kl_mean(const PoissonSRInstance& inst, const Vector& x) {
    require_same_size(x.size(), inst.n(), "kl");
    Vector mean = inst.forward(x).array() + inst.b_bar();
    if ((mean.array() <= 0).any()) throw DomainError("KL: MHx + b has a non-positive entry");
    return mean;
}

inline double kl_sum(const Vector& z, const Vector& mean) {
    double f = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        f += (zi > 0 ? zi * std::log(zi / mean[i]) : 0.0) + mean[i] - zi;
    }
    return f;
}

} // namespace detail

inline double kl_value(const PoissonSRInstance& inst, const Vector& x) {
    return detail::kl_sum(inst.z(), detail::kl_mean(inst, x));
}

inline std::pair<double, Vector> kl_value_grad(const PoissonSRInstance& inst, const Vector& x) {
    const Vector mean = detail::kl_mean(inst, x);
    const Vector w = Vector::Ones(inst.m()) - inst.z().cwiseQuotient(mean);
    return {detail::kl_sum(inst.z(), mean), inst.adjoint(w)};
}

/// D_f(x, y) = sum z_i (u_i - log(1 + u_i)) with u = MH(x - y) / (MHy + b).
inline double kl_bregman(const PoissonSRInstance& inst, const Vector& x, const Vector& y) {
    require_same_size(x.size(), inst.n(), "kl_bregman");
    const Vector mean_y = detail::kl_mean(inst, y);
    const Vector du = inst.forward(x - y).cwiseQuotient(mean_y);
    double sum = 0;
    for (Eigen::Index i = 0; i < du.size(); ++i) {
        const double u = du[i];
        if (!(u > -1)) throw DomainError("KL: MHx + b has a non-positive entry");
        const double zi = inst.z()[i];
        if (zi == 0) continue;
        if (std::abs(u) < 1e-3)
            sum += zi * u * u * (0.5 - u / 3 + u * u / 4 - u * u * u / 5);
        else
            sum += zi * (u - std::log1p(u));
    }
    return sum;
}

/// (max z / b^2) * max((MH)' 1) * max(MH 1), valid on x >= 0.
inline double kl_lipschitz_estimate(const PoissonSRInstance& inst) {
    const double col = inst.adjoint(Vector::Ones(inst.m())).maxCoeff();
    const double row = inst.forward(Vector::Ones(inst.n())).maxCoeff();
    return inst.z().maxCoeff() / (inst.b_bar() * inst.b_bar()) * col * row;
}

inline CompositeProblem make_problem(PoissonSRInstance inst) {
    auto p = std::make_shared<const PoissonSRInstance>(std::move(inst));
    const double lambda = p->lambda();
    ProblemFunctions fns;
    fns.f = [p](const Vector& x) { return kl_value(*p, x); };
    fns.grad_f = [p](const Vector& x) { return kl_value_grad(*p, x).second; };
    fns.h = [lambda](const Vector& x) { return prox::nonneg_l1(x, lambda); };
    fns.prox_h = [lambda](const Vector& z, double tau) { return prox::nonneg_soft_threshold(z, lambda * tau); };
    fns.bregman = [p](const Vector& x, const Vector& y) { return kl_bregman(*p, x, y); };
    return CompositeProblem("poisson", p->n(), std::move(fns));
}

/// Sparse bright spots on a side x side grid, blurred, down-sampled by q and
/// corrupted by Poisson noise with background b_bar.
inline PoissonSRInstance make_synthetic_poisson(Eigen::Index side, int q, double b_bar, double lambda,
                                                std::uint64_t seed, int psf_side = 5, double psf_sigma = 1.0,
                                                double intensity = 50.0) {
    Rng rng(seed);
    BlockDownsample M(side, side, q);
    Convolution2D H(side, side, gaussian_psf(psf_side, psf_sigma));
    Vector truth = Vector::Zero(side * side);
    boost::random::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Index spots = std::max<Eigen::Index>(1, side * side / 40);
    for (Eigen::Index s = 0; s < spots; ++s) {
        const auto idx = static_cast<Eigen::Index>(u(rng) * double(side * side)) % (side * side);
        truth[idx] += intensity * (0.5 + u(rng));
    }
    const Vector mean = M.apply(H.apply(truth)).array() + b_bar;
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        boost::random::poisson_distribution<int, double> pois(mean[i]);
        z[i] = pois(rng);
    }
    return PoissonSRInstance(std::move(M), std::move(H), std::move(z), b_bar, lambda);
}

} // namespace ffista
