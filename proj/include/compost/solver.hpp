#pragma once

#include <stdexcept>

#include "compost/domain.hpp"

namespace compost {

struct FitConfig {
    double gradient_tolerance = 1e-9;  // sup-norm stopping tolerance
    int max_iterations = 50;
    double line_search_shrink = 0.5;
    int max_line_search_steps = 30;
    // After reaching the tolerance, full Newton steps continue while they keep
    // shrinking the gradient (up to this many). They drive the residual to the
    // rounding floor, which the stationarity and auto-centering identities
    // need at small lambda.
    int polish_iterations = 4;
};

/// One fitted column at a fixed smoothing level.
struct FitResult {
    LogDensity eta_hat;
    Composition p_hat;
    double lambda = 0.0;
    int iterations = 0;
    double final_gradient_norm = 0.0;  // sup-norm of -k~ + p(eta) + lambda*eta
    double objective_value = 0.0;
    double eta_sum = 0.0;  // centering diagnostic, sum_y eta_hat_y
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, int iterations, double gradient_norm)
        : std::runtime_error(msg), iterations(iterations), gradient_norm(gradient_norm) {}

    int iterations;
    double gradient_norm;
};

/// Penalized likelihood objective on the discrete domain:
///   -(1/n) sum_y k_y eta_y + log sum_y w_y exp(eta_y) + (lambda/2) sum_y eta_y^2.
double objective(const CountVector& k, const BaseMeasure& w, double lambda,
                 const VectorXd& eta);

/// Gradient -k~ + p(eta) + lambda * eta with k~ = k/n and p(eta) the
/// composition mapped from eta under w.
VectorXd gradient(const CountVector& k, const BaseMeasure& w, double lambda,
                  const VectorXd& eta);

/// Hessian (P - p p') + lambda I with P = diag(p(eta)). Symmetric positive
/// definite for lambda > 0 (all eigenvalues >= lambda).
MatrixXd hessian(const CountVector& k, const BaseMeasure& w, double lambda,
                 const VectorXd& eta);

/// Damped Newton from eta = 0 (or warm_start): solve H d = -g, backtrack by
/// halving until the objective decreases, stop at the gradient tolerance.
/// Throws ConvergenceError when max_iterations is exhausted or a step stalls.
FitResult solve(const CountVector& k, const BaseMeasure& w, double lambda,
                const FitConfig& config = {}, const VectorXd* warm_start = nullptr);

/// max_y |k_y/n - p_hat_y - lambda * eta_hat_y|; zero at an exact minimizer.
double stationarity_residual(const FitResult& fit, const CountVector& k);

namespace detail {

/// Grouped form of the objective: coordinate j stands for mult_j identical
/// cells sharing one count total, base weight and log-density value. The
/// plain problem is mult = 1; the zero-collapse reduction merges all
/// zero-count cells into a single coordinate.
struct GroupedProblem {
    VectorXd k_tilde;      // per-group count total / n
    VectorXd log_weights;  // log of one member's base weight
    VectorXd mult;         // group sizes (>= 1)
    double lambda = 0.0;
};

struct GroupedFit {
    VectorXd eta;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective_value = 0.0;
};

GroupedFit newton_minimize(const GroupedProblem& prob, const FitConfig& config,
                           const VectorXd* warm_start);

/// Reduced solve for uniform weights: merges zero-count cells, runs Newton on
/// the grouped problem, expands back to all m cells. Estimator-level wrapper:
/// solve_with_zero_collapse.
FitResult solve_collapsed(const CountVector& k, const BaseMeasure& w, double lambda,
                          const FitConfig& config, const VectorXd* warm_start);

}  // namespace detail
}  // namespace compost
