#include <cmath>

#include <gtest/gtest.h>

#include "freefista/problems.hpp"
#include "freefista/proximal_core.hpp"
#include "oracles.hpp"

using namespace ffista;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// f = a/2 x^2 in one dimension
CompositeProblem scalar_quadratic(double a) { return make_diagonal_quadratic(vec({a}), vec({0.0})); }

// Same f without a closed-form Bregman function, so the f-difference path is used.
CompositeProblem scalar_quadratic_plain(double a) {
    ProblemFunctions fns;
    fns.f = [a](const Vector& x) { return 0.5 * a * x.squaredNorm(); };
    fns.grad_f = [a](const Vector& x) -> Vector { return a * x; };
    fns.h = [](const Vector&) { return 0.0; };
    fns.prox_h = [](const Vector& z, double) { return z; };
    return CompositeProblem("plain", 1, std::move(fns));
}

CompositeProblem pure_l1(Eigen::Index n, double lambda) {
    ProblemFunctions fns;
    fns.f = [](const Vector&) { return 0.0; };
    fns.grad_f = [n](const Vector&) -> Vector { return Vector::Zero(n); };
    fns.h = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
    fns.prox_h = [lambda](const Vector& z, double tau) {
        Vector w(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) w[i] = oracle::shrink(z[i], lambda * tau);
        return w;
    };
    return CompositeProblem("l1", n, std::move(fns));
}

std::vector<CompositeProblem> growth_suite() {
    std::vector<CompositeProblem> out;
    out.push_back(make_quadratic_growth_test(20, 100, 1, 1));
    out.push_back(make_quadratic_growth_test(30, 1e3, 0.5, 2, 0.3));
    out.push_back(make_quadratic_growth_test(10, 10, 10, 3, 1.0));
    return out;
}

} // namespace

TEST(ForwardBackward, GradientStepOnQuadratic) {
    auto p = scalar_quadratic(1);
    EXPECT_EQ(forward_backward_map(p, vec({2}), 1.0)[0], 0.0);
    EXPECT_EQ(composite_gradient_mapping(p, vec({2}), 1.0)[0], 2.0);
}

TEST(ForwardBackward, FixedPointAtMinimiser) {
    for (const auto& p : growth_suite()) {
        const Vector& xs = p.ground_truth()->x_star;
        for (double tau : {1e-3, 0.01, 0.1, 1.0 / p.ground_truth()->L_true}) {
            EXPECT_LT((forward_backward_map(p, xs, tau) - xs).norm(), 1e-12 * (1 + xs.norm()));
            EXPECT_LT(composite_gradient_mapping(p, xs, tau).norm(), 1e-12 * (1 + xs.norm()) / tau);
        }
    }
}

TEST(ForwardBackward, SoftThresholdingWhenSmoothPartVanishes) {
    auto p = pure_l1(2, 1.0);
    EXPECT_EQ(forward_backward_map(p, vec({3, -0.5}), 1.0), vec({2, 0}));
    auto q = pure_l1(1, 1.0);
    EXPECT_EQ(forward_backward_map(q, vec({0.5}), 1.0)[0], 0.0);
    EXPECT_EQ(composite_gradient_mapping(q, vec({0.5}), 1.0)[0], 0.5);
}

TEST(Bregman, Examples) {
    auto half = make_diagonal_quadratic(Vector::Ones(2), Vector::Zero(2));
    EXPECT_EQ(bregman_f(half, vec({1, 0}), vec({0, 0})), 0.5);
    EXPECT_EQ(bregman_f(half, vec({0.3, -2}), vec({0.3, -2})), 0.0);

    // f = x^2: D(-1, 1) = 1 - 1 - 2 * (-2) = 4
    EXPECT_EQ(bregman_f(scalar_quadratic(2), vec({-1}), vec({1})), 4.0);
    EXPECT_EQ(bregman_f(scalar_quadratic_plain(2), vec({-1}), vec({1})), 4.0);
}

TEST(Bregman, ClosedFormsMatchDefinition) {
    Rng rng(9);
    std::vector<CompositeProblem> probs = growth_suite();
    probs.push_back(make_problem(make_random_lasso(12, 8, 0.1, 1)));
    probs.push_back(make_problem(make_random_logistic(15, 6, 10, 3, 2)));
    for (const auto& p : probs) {
        ASSERT_TRUE(p.has_bregman()) << p.name();
        for (int k = 0; k < 20; ++k) {
            const Vector x = random_normal(p.dim(), rng), y = random_normal(p.dim(), rng);
            const double direct = p.f(x) - p.f(y) - p.grad_f(y).dot(x - y);
            const double scale = std::abs(p.f(x)) + std::abs(p.f(y)) + std::abs(p.grad_f(y).dot(x - y));
            EXPECT_NEAR(bregman_f(p, x, y), direct, 1e-12 * scale) << p.name();
            EXPECT_GE(bregman_f(p, x, y), 0.0);
        }
    }
}

TEST(Acceptance, IdenticalPointsAccepted) {
    auto p = scalar_quadratic(5);
    EXPECT_TRUE(acceptance_test(p, vec({0.7}), vec({0.7}), 1.0));
    EXPECT_TRUE(acceptance_test(scalar_quadratic_plain(5), vec({0.7}), vec({0.7}), 1.0));
}

TEST(Acceptance, ExactThresholdForQuadratics) {
    for (double L : {0.5, 1.0, 2.0, 1e4}) {
        for (const auto& p : {scalar_quadratic(L), scalar_quadratic_plain(L)}) {
            const Vector y = vec({1.0}), x = vec({0.0});
            EXPECT_TRUE(acceptance_test(p, x, y, 1.0 / L)) << L;
            EXPECT_TRUE(acceptance_test(p, x, y, 1.0 / L - 1e-12)) << L;
            EXPECT_FALSE(acceptance_test(p, x, y, 1.0 / L + 1e-12)) << L;
        }
    }
}

TEST(Acceptance, HandTraceRejectsUnitStepForSquare) {
    // f = x^2, y = 1, tau = 1: T(1) = -1, D = 4 > 2
    for (const auto& p : {scalar_quadratic(2), scalar_quadratic_plain(2)}) {
        const Vector x = forward_backward_map(p, vec({1}), 1.0);
        EXPECT_EQ(x[0], -1.0);
        EXPECT_FALSE(acceptance_test(p, x, vec({1}), 1.0));
    }
}

TEST(FbBt, HandTrace) {
    for (const auto& p : {scalar_quadratic(2), scalar_quadratic_plain(2)}) {
        const auto r = fb_bt(p, vec({1}), 1.0, 0.5);
        EXPECT_EQ(r.point[0], 0.0);
        EXPECT_EQ(r.L_plus, 2.0);
        EXPECT_EQ(r.backtracks, 1);
        EXPECT_EQ(r.g_norm, 2.0);
    }
}

TEST(FbBt, MinimiserAcceptedImmediately) {
    // minimisers representable exactly, so that T(x*) = x* holds bit for bit
    Rng rng(3);
    const Vector q = random_uniform(6, 1, 100, rng);
    std::vector<CompositeProblem> probs;
    probs.push_back(make_diagonal_quadratic(q, Vector::Zero(6)));
    probs.push_back(make_diagonal_quadratic(q, random_uniform(6, -0.5, 0.5, rng), 1.0));
    for (const auto& p : probs) {
        const Vector& xs = p.ground_truth()->x_star;
        ASSERT_EQ(xs, Vector::Zero(6));
        for (double L0 : {0.3, 1.0, 500.0}) {
            const auto r = fb_bt(p, xs, L0, 0.5);
            EXPECT_EQ(r.backtracks, 0);
            EXPECT_EQ(r.L_plus, L0);
            EXPECT_EQ(r.point, xs);
            EXPECT_EQ(r.g_norm, 0.0);
        }
    }
}

TEST(FbBt, NoBacktrackAboveTrueConstant) {
    Rng rng(4);
    for (const auto& p : growth_suite()) {
        const double L = p.ground_truth()->L_true;
        for (int k = 0; k < 20; ++k) {
            const auto r = fb_bt(p, random_normal(p.dim(), rng), 2 * L, 0.8);
            EXPECT_EQ(r.backtracks, 0);
            EXPECT_EQ(r.L_plus, 2 * L);
        }
    }
}

TEST(FbBt, DivergesOnNonSmoothF) {
    // f = |x| has no Lipschitz gradient: near the kink no step passes
    ProblemFunctions fns;
    fns.f = [](const Vector& x) { return x.lpNorm<1>(); };
    fns.grad_f = [](const Vector& x) -> Vector { return x.array().sign().matrix(); };
    fns.h = [](const Vector&) { return 0.0; };
    fns.prox_h = [](const Vector& z, double) { return z; };
    CompositeProblem p("abs", 1, std::move(fns));
    EXPECT_THROW(fb_bt(p, vec({1e-30}), 1.0, 0.5, 20), BacktrackDivergence);
}

TEST(FbBt, RejectsBadArguments) {
    auto p = scalar_quadratic(1);
    EXPECT_THROW(fb_bt(p, vec({1}), 0.0, 0.5), ConfigError);
    EXPECT_THROW(fb_bt(p, vec({1}), 1.0, 1.0), ConfigError);
    BacktrackConfig c;
    EXPECT_NO_THROW(c.validate());
    c.L0 = c.L_min / 2;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(FbBt, PropertiesOnRandomPoints) {
    Rng rng(17);
    std::vector<CompositeProblem> probs = growth_suite();
    probs.push_back(make_problem(make_random_logistic(30, 10, 10, 3, 3)));
    probs.push_back(make_problem(make_synthetic_inpainting(8, 2, 0.5, 0.05, 4)));
    for (const auto& p : probs) {
        const double rho = 0.7;
        for (int k = 0; k < 30; ++k) {
            const Vector r = random_normal(p.dim(), rng);
            const double L0 = std::exp(random_uniform(1, std::log(1e-3), std::log(1e3), rng)[0]);
            const auto out = fb_bt(p, r, L0, rho);
            EXPECT_GE(out.L_plus, L0);
            EXPECT_NEAR(out.g_norm, out.L_plus * (r - out.point).norm(), 1e-12 * out.g_norm);
            // sufficient decrease implied by the accepted Bregman test
            const double Fr = p.F(r), Fp = p.F(out.point);
            EXPECT_LE(Fp, Fr + 1e-12 * std::max(1.0, std::abs(Fr))) << p.name();
            EXPECT_LE(bregman_f(p, out.point, r),
                      0.5 * out.L_plus * (out.point - r).squaredNorm() * (1 + 1e-12) + 1e-300);
            if (p.ground_truth() && L0 <= p.ground_truth()->L_true / rho)
                EXPECT_LE(out.L_plus, p.ground_truth()->L_true / rho * (1 + 1e-12)) << p.name();
        }
    }
}

TEST(FbBt, ValueControlledByGradientMapping) {
    // F(T x) - F* <= 2 (1 + L tau)^2 / mu |g_tau(x)|^2 for steps passing the test
    Rng rng(23);
    for (const auto& p : growth_suite()) {
        const auto& gt = *p.ground_truth();
        for (int k = 0; k < 100; ++k) {
            const Vector x = 3.0 * random_normal(p.dim(), rng);
            const double tau = random_uniform(1, 0.01, 1.0, rng)[0] / gt.L_true;
            const Vector Tx = forward_backward_map(p, x, tau);
            const double g2 = ((x - Tx) / tau).squaredNorm();
            const double bound = 2 * std::pow(1 + gt.L_true * tau, 2) / gt.mu_true * g2;
            EXPECT_LE(p.F(Tx) - gt.F_star, bound + 1e-12 * std::max(1.0, std::abs(gt.F_star))) << p.name();
        }
    }
}
