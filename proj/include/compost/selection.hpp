#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "compost/solver.hpp"

namespace compost {

/// Search grid for the smoothing parameter, stored as descending log10(lambda)
/// so a sweep can warm-start each fit from the previous (more-shrunk) one.
struct LambdaGrid {
    std::vector<double> log10_values;

    /// log10(lambda) from 2 down to -6 in steps of 0.1 (81 points). Brackets
    /// the near-MLE and near-uniform limits for n up to 1e6, m up to 1e3.
    static LambdaGrid default_grid();

    /// Descending grid covering [lo, hi] in log10 with the given step.
    static LambdaGrid from_log10_bounds(double lo, double hi, double step);

    std::size_t size() const { return log10_values.size(); }
    double lambda_at(std::size_t i) const;
    void validate() const;  // non-empty, strictly descending
};

struct SelectionPoint {
    double lambda = 0.0;
    double log10_lambda = 0.0;
    double score = 0.0;  // CV score or KL loss; NaN when the fit was skipped
    bool converged = false;
    int iterations = 0;
    double final_gradient_norm = 0.0;
};

struct SelectionTrace {
    std::vector<SelectionPoint> points;  // grid order (descending lambda)
    double chosen_lambda = 0.0;
    std::size_t chosen_index = 0;
};

struct SweepOptions {
    bool warm_start = true;
    // Route fits through the zero-collapse reduction (caller guarantees a
    // uniform base measure).
    bool zero_collapse = false;
};

/// Fits every grid point. Failed points are recorded as nullopt and skipped;
/// throws only if the whole grid fails.
struct GridSweep {
    std::vector<double> lambdas;
    std::vector<std::optional<FitResult>> fits;
};

GridSweep sweep_grid(const CountVector& k, const BaseMeasure& w, const LambdaGrid& grid,
                     const FitConfig& config = {}, const SweepOptions& options = {});

struct CvScoreParts {
    double fit_term = 0.0;  // -k~' eta_hat + log sum w exp(eta_hat)
    double loo_term = 0.0;  // (n-1)^{-1} sum_y k~_y (e_y - k~)' H^{-1} e_y
};

/// Cross-validation score
///   V(lambda) = -sum_y k~_y eta_hat_y + log sum_y w_y e^{eta_hat_y}
///             + alpha (n-1)^{-1} sum_y k~_y (e_y - k~)' H^{-1} e_y,
/// with H = (P_hat - p_hat p_hat') + lambda I the Hessian at the fit.
///
/// Derivation: deleting one observation from cell z changes the objective's
/// gradient at eta_hat from 0 to (e_z - k~)/(n-1), so one Newton step puts the
/// delete-one fit at eta_hat - H^{-1}(e_z - k~)/(n-1). Substituting that into
/// the delete-one likelihood term and averaging over observations gives the
/// correction above; alpha > 1 inflates it toward heavier smoothing.
double cv_score(const FitResult& fit, const CountVector& k, const BaseMeasure& w,
                double alpha);

CvScoreParts cv_score_parts(const FitResult& fit, const CountVector& k,
                            const BaseMeasure& w);

/// Exact delete-one refit: solve on counts k - e_cell with total n - 1.
/// Test oracle for the one-step approximation inside cv_score.
FitResult loo_refit(const CountVector& k, const BaseMeasure& w, double lambda,
                    Eigen::Index cell, const FitConfig& config = {});

struct SelectionResult {
    FitResult fit;
    SelectionTrace trace;
};

/// Fits the grid and returns the fit minimizing the CV score; ties break
/// toward larger lambda (more shrinkage).
SelectionResult select_lambda_cv(const CountVector& k, const BaseMeasure& w,
                                 const LambdaGrid& grid, double alpha = 1.4,
                                 const FitConfig& config = {},
                                 const SweepOptions& options = {});

/// Oracle selection for simulations: minimizes KL(p_true, p_hat(lambda)).
SelectionResult select_lambda_oracle(const CountVector& k, const BaseMeasure& w,
                                     const LambdaGrid& grid, const Composition& p_true,
                                     const FitConfig& config = {},
                                     const SweepOptions& options = {});

/// Score an existing sweep; lets one sweep serve both selectors.
SelectionResult select_cv_from_sweep(const GridSweep& sweep, const CountVector& k,
                                     const BaseMeasure& w, double alpha);
SelectionResult select_oracle_from_sweep(const GridSweep& sweep, const Composition& p_true);

}  // namespace compost
