#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "compost/estimator.hpp"
#include "compost/rng.hpp"
#include "compost/solver.hpp"
#include "oracles.hpp"

using namespace compost;

namespace {

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

struct Instance {
    CountVector k;
    BaseMeasure w;
    double lambda;
};

Instance random_instance(RngStream& rng, int max_m, double log10_lam_lo,
                         double log10_lam_hi, double zero_prob = 0.25,
                         bool uniform_w = false) {
    const int m = 2 + static_cast<int>(rng.next_uniform() * (max_m - 2));
    VectorXd k(m), w(m);
    for (int i = 0; i < m; ++i) {
        k[i] = rng.next_uniform() < zero_prob
                   ? 0.0
                   : std::floor(rng.next_uniform() * 20.0) + 1.0;
        w[i] = uniform_w ? 1.0 : std::exp(rng.next_gaussian());
    }
    if (k.sum() == 0.0) k[0] = 3.0;
    const double lam = std::pow(
        10.0, log10_lam_lo + (log10_lam_hi - log10_lam_lo) * rng.next_uniform());
    return Instance{CountVector(k), BaseMeasure(w), lam};
}

}  // namespace

TEST_CASE("objective examples") {
    // uniform everything at eta = 0: log m
    const CountVector k(vec({2, 2, 2, 2}));
    const BaseMeasure w = BaseMeasure::uniform(4);
    CHECK(objective(k, w, 0.7, VectorXd::Zero(4)) ==
          doctest::Approx(std::log(4.0)).epsilon(1e-15));

    // m=2, k=(1,1), w=(1,1), lambda=1, eta=(1,-1): log(e + 1/e) + 1
    const double val = objective(CountVector(vec({1, 1})), BaseMeasure::uniform(2), 1.0,
                                 vec({1, -1}));
    CHECK(val == doctest::Approx(2.1269280110429725).epsilon(1e-14));

    // scaling the base measure shifts the objective by log c, pointwise
    RngStream rng(21);
    for (int t = 0; t < 20; ++t) {
        const Instance inst = random_instance(rng, 20, -3, 2);
        VectorXd eta(inst.k.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = rng.next_gaussian();
        const double c = 37.5;
        const double base = objective(inst.k, inst.w, inst.lambda, eta);
        const double scaled =
            objective(inst.k, BaseMeasure(inst.w.weights() * c), inst.lambda, eta);
        CHECK(scaled == doctest::Approx(base + std::log(c)).epsilon(1e-12));
    }

    CHECK_THROWS_AS(objective(k, w, 0.0, VectorXd::Zero(4)), std::invalid_argument);
    CHECK_THROWS_AS(objective(CountVector(vec({0, 0})), BaseMeasure::uniform(2), 1.0,
                              VectorXd::Zero(2)),
                    std::invalid_argument);
}

TEST_CASE("gradient matches finite differences") {
    const CountVector ku(vec({3, 3}));
    CHECK(gradient(ku, BaseMeasure::uniform(2), 0.5, VectorXd::Zero(2)).norm() == 0.0);

    RngStream rng(22);
    for (int t = 0; t < 30; ++t) {
        const Instance inst = random_instance(rng, 15, -2, 1);
        VectorXd eta(inst.k.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = 0.5 * rng.next_gaussian();
        const VectorXd g = gradient(inst.k, inst.w, inst.lambda, eta);
        const VectorXd g_fd =
            oracle::gradient_fd(inst.k.counts(), inst.w.weights(), inst.lambda, eta);
        CHECK((g - g_fd).lpNorm<Eigen::Infinity>() <=
              1e-6 * std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("hessian examples and finite differences") {
    // eta = 0, uniform w, m = 2, lambda = 0.5
    const MatrixXd h =
        hessian(CountVector(vec({1, 1})), BaseMeasure::uniform(2), 0.5, VectorXd::Zero(2));
    CHECK(h(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(h(0, 1) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(h(1, 0) == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(h(1, 1) == doctest::Approx(0.75).epsilon(1e-15));

    RngStream rng(23);
    for (int t = 0; t < 20; ++t) {
        const Instance inst = random_instance(rng, 10, -2, 1);
        const Eigen::Index m = inst.k.size();
        VectorXd eta(m);
        for (Eigen::Index i = 0; i < m; ++i) eta[i] = 0.5 * rng.next_gaussian();
        const MatrixXd hess = hessian(inst.k, inst.w, inst.lambda, eta);

        // row-sum identity: H * 1 = lambda * 1
        const VectorXd row_sums = hess * VectorXd::Ones(m);
        CHECK((row_sums.array() - inst.lambda).abs().maxCoeff() < 1e-14);

        // central differences of the gradient
        const double step = 1e-5;
        for (Eigen::Index j = 0; j < m; ++j) {
            VectorXd hi = eta, lo = eta;
            hi[j] += step;
            lo[j] -= step;
            const VectorXd col = (gradient(inst.k, inst.w, inst.lambda, hi) -
                                  gradient(inst.k, inst.w, inst.lambda, lo)) /
                                 (2.0 * step);
            CHECK((col - hess.col(j)).lpNorm<Eigen::Infinity>() <= 1e-5);
        }
    }
}

TEST_CASE("solve: symmetry fixed point") {
    const CountVector k(vec({4, 4, 4}));
    for (double lam : {1e-4, 1.0, 1e4}) {
        const FitResult fit = solve(k, BaseMeasure::uniform(3), lam);
        CHECK(fit.eta_hat.eta().lpNorm<Eigen::Infinity>() < 1e-14);
        for (int i = 0; i < 3; ++i)
            CHECK(fit.p_hat[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    }
}

TEST_CASE("solve: shrinkage limits") {
    RngStream rng(24);
    for (int t = 0; t < 10; ++t) {
        const Instance inst = random_instance(rng, 30, 0, 0);
        // lambda -> infinity pulls p_hat onto the normalized base measure
        const FitResult hi = solve(inst.k, inst.w, 1e8);
        const VectorXd target = inst.w.weights() / inst.w.weights().sum();
        CHECK((hi.p_hat.probs() - target).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
    // lambda -> 0 with all-positive counts approaches the empirical ratios
    for (int t = 0; t < 10; ++t) {
        const Instance inst = random_instance(rng, 30, 0, 0, /*zero_prob=*/0.0);
        const FitResult lo = solve(inst.k, inst.w, 1e-10);
        CHECK((lo.p_hat.probs() - empirical_composition(inst.k)).lpNorm<Eigen::Infinity>() <=
              1e-4);
    }
}

TEST_CASE("solve matches brute-force minimizer") {
    RngStream rng(25);
    // the named example: m=3, k=(7,2,1), uniform w, lambda=0.1
    {
        const CountVector k(vec({7, 2, 1}));
        const BaseMeasure w = BaseMeasure::uniform(3);
        const FitResult fit = solve(k, w, 0.1);
        const VectorXd eta_star =
            oracle::brute_force_minimize(k.counts(), w.weights(), 0.1);
        const VectorXd p_star = oracle::composition_of(eta_star, w.weights());
        CHECK((fit.p_hat.probs() - p_star).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
    for (int t = 0; t < 10; ++t) {
        const Instance inst = random_instance(rng, 5, -2, 2);
        const FitResult fit = solve(inst.k, inst.w, inst.lambda);
        const VectorXd eta_star = oracle::brute_force_minimize(
            inst.k.counts(), inst.w.weights(), inst.lambda);
        const VectorXd p_star = oracle::composition_of(eta_star, inst.w.weights());
        CHECK((fit.p_hat.probs() - p_star).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
}

TEST_CASE("stationarity identity and auto-centering") {
    RngStream rng(26);
    for (int t = 0; t < 60; ++t) {
        const Instance inst = random_instance(rng, 60, -6, 4);
        const FitResult fit = solve(inst.k, inst.w, inst.lambda);
        CHECK(stationarity_residual(fit, inst.k) <= 1e-8);
        CHECK(std::abs(fit.eta_sum) <= 1e-8);
        CHECK(fit.iterations <= 50);
    }
}

TEST_CASE("stationarity_residual flags perturbed fits") {
    const CountVector k(vec({5, 3, 2, 2}));
    const BaseMeasure w = BaseMeasure::uniform(4);
    FitResult fit = solve(k, w, 0.3);
    CHECK(stationarity_residual(fit, k) <= 1e-10);

    VectorXd bumped = fit.eta_hat.eta();
    bumped[0] += 0.1;
    bumped[1] -= 0.1;
    const FitResult perturbed{LogDensity::unchecked(bumped), to_composition_raw(bumped, w),
                              fit.lambda, fit.iterations, 0.0, 0.0, 0.0};
    CHECK(stationarity_residual(perturbed, k) > 1e-3);
}

TEST_CASE("permutation equivariance") {
    RngStream rng(27);
    for (int t = 0; t < 20; ++t) {
        const Instance inst = random_instance(rng, 25, -4, 3);
        const Eigen::Index m = inst.k.size();
        std::vector<Eigen::Index> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        for (Eigen::Index i = m - 1; i > 0; --i)
            std::swap(perm[i], perm[static_cast<Eigen::Index>(rng.next_uniform() * (i + 1))]);

        VectorXd kp(m), wp(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            kp[i] = inst.k[perm[i]];
            wp[i] = inst.w.weights()[perm[i]];
        }
        const FitResult base = solve(inst.k, inst.w, inst.lambda);
        const FitResult permuted = solve(CountVector(kp), BaseMeasure(wp), inst.lambda);
        for (Eigen::Index i = 0; i < m; ++i) {
            CHECK(std::abs(permuted.p_hat[i] - base.p_hat[perm[i]]) <= 1e-8);
            CHECK(std::abs(permuted.eta_hat[i] - base.eta_hat[perm[i]]) <= 1e-8);
        }
    }
}

TEST_CASE("count-scale and base-measure-scale invariance") {
    RngStream rng(28);
    for (int t = 0; t < 15; ++t) {
        const Instance inst = random_instance(rng, 25, -4, 3);
        const FitResult base = solve(inst.k, inst.w, inst.lambda);
        const FitResult scaled_counts =
            solve(CountVector(inst.k.counts() * 7.25), inst.w, inst.lambda);
        const FitResult scaled_measure =
            solve(inst.k, BaseMeasure(inst.w.weights() * 0.004), inst.lambda);
        CHECK((scaled_counts.eta_hat.eta() - base.eta_hat.eta()).lpNorm<Eigen::Infinity>() <=
              1e-8);
        CHECK((scaled_measure.eta_hat.eta() - base.eta_hat.eta()).lpNorm<Eigen::Infinity>() <=
              1e-8);
    }
}

TEST_CASE("zero-count cells share one estimate under uniform weights") {
    RngStream rng(29);
    for (int t = 0; t < 15; ++t) {
        const Instance inst = random_instance(rng, 40, -5, 2, 0.5, /*uniform_w=*/true);
        if (inst.k.zero_cells() < 2) continue;
        const FitResult fit = solve(inst.k, inst.w, inst.lambda);
        double lo = 1e300, hi = -1e300;
        for (Eigen::Index i = 0; i < inst.k.size(); ++i) {
            if (inst.k[i] != 0.0) continue;
            lo = std::min(lo, fit.eta_hat[i]);
            hi = std::max(hi, fit.eta_hat[i]);
        }
        CHECK(hi - lo <= 1e-10);
    }
}

TEST_CASE("non-convergence is an error with diagnostics") {
    const CountVector k(vec({50, 1, 1, 1, 1}));
    FitConfig cfg;
    cfg.max_iterations = 1;
    cfg.polish_iterations = 0;
    try {
        solve(k, BaseMeasure::uniform(5), 1e-5, cfg);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations >= 1);
        CHECK(e.gradient_norm > 0.0);
    }
    CHECK_THROWS_AS(solve(k, BaseMeasure::uniform(5), -1.0), std::invalid_argument);
}

TEST_CASE("warm start converges to the same fit") {
    const CountVector k(vec({9, 0, 3, 1, 0, 7}));
    const BaseMeasure w = BaseMeasure::uniform(6);
    const FitResult cold = solve(k, w, 0.02);
    const FitResult prev = solve(k, w, 0.2);
    const VectorXd warm_eta = prev.eta_hat.eta();
    const FitResult warm = solve(k, w, 0.02, {}, &warm_eta);
    CHECK((warm.eta_hat.eta() - cold.eta_hat.eta()).lpNorm<Eigen::Infinity>() <= 1e-8);
}
