#include "compost/selection.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace compost {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

SelectionResult pick_minimum(const GridSweep& sweep,
                             const std::vector<double>& scores) {
    SelectionTrace trace;
    trace.points.reserve(sweep.lambdas.size());
    std::size_t best = sweep.lambdas.size();
    for (std::size_t i = 0; i < sweep.lambdas.size(); ++i) {
        SelectionPoint pt;
        pt.lambda = sweep.lambdas[i];
        pt.log10_lambda = std::log10(pt.lambda);
        if (sweep.fits[i]) {
            pt.converged = true;
            pt.score = scores[i];
            pt.iterations = sweep.fits[i]->iterations;
            pt.final_gradient_norm = sweep.fits[i]->final_gradient_norm;
            // strict < keeps the earlier (larger lambda) point on ties
            if (best == sweep.lambdas.size() || pt.score < trace.points[best].score)
                best = i;
        } else {
            pt.score = std::numeric_limits<double>::quiet_NaN();
        }
        trace.points.push_back(pt);
    }
    if (best == sweep.lambdas.size())
        throw ConvergenceError("selection: every grid point failed to converge", 0, 0.0);
    trace.chosen_index = best;
    trace.chosen_lambda = sweep.lambdas[best];
    return SelectionResult{*sweep.fits[best], std::move(trace)};
}

}  // namespace

LambdaGrid LambdaGrid::default_grid() { return from_log10_bounds(-6.0, 2.0, 0.1); }

LambdaGrid LambdaGrid::from_log10_bounds(double lo, double hi, double step) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi,
            "LambdaGrid: invalid bounds");
    require(std::isfinite(step) && step > 0.0, "LambdaGrid: step must be positive");
    LambdaGrid grid;
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
    grid.log10_values.reserve(count);
    for (int i = 0; i < count; ++i) grid.log10_values.push_back(hi - i * step);
    grid.validate();
    return grid;
}

double LambdaGrid::lambda_at(std::size_t i) const {
    return std::pow(10.0, log10_values.at(i));
}

void LambdaGrid::validate() const {
    require(!log10_values.empty(), "LambdaGrid: empty grid");
    for (std::size_t i = 1; i < log10_values.size(); ++i)
        require(log10_values[i] < log10_values[i - 1],
                "LambdaGrid: log10 values must be strictly descending");
}

GridSweep sweep_grid(const CountVector& k, const BaseMeasure& w, const LambdaGrid& grid,
                     const FitConfig& config, const SweepOptions& options) {
    grid.validate();
    GridSweep sweep;
    sweep.lambdas.reserve(grid.size());
    sweep.fits.reserve(grid.size());
    VectorXd warm;
    bool have_warm = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lambda = grid.lambda_at(i);
        sweep.lambdas.push_back(lambda);
        const VectorXd* start = (options.warm_start && have_warm) ? &warm : nullptr;
        try {
            FitResult fit = options.zero_collapse
                                ? detail::solve_collapsed(k, w, lambda, config, start)
                                : solve(k, w, lambda, config, start);
            warm = fit.eta_hat.eta();
            have_warm = true;
            sweep.fits.emplace_back(std::move(fit));
        } catch (const ConvergenceError&) {
            sweep.fits.emplace_back(std::nullopt);
        }
    }
    return sweep;
}

CvScoreParts cv_score_parts(const FitResult& fit, const CountVector& k,
                            const BaseMeasure& w) {
    require(k.size() == w.size(), "cv_score: counts and weights length mismatch");
    require(k.size() == fit.eta_hat.size(), "cv_score: fit length mismatch");
    const double n = k.total();
    require(n > 1.0, "cv_score: needs total count > 1");

    const VectorXd k_tilde = k.counts() / n;
    const VectorXd& eta = fit.eta_hat.eta();
    const VectorXd& p = fit.p_hat.probs();
    const Eigen::Index m = k.size();

    CvScoreParts parts;
    parts.fit_term =
        -k_tilde.dot(eta) + detail::softmax_from_logits(eta + w.log_weights()).log_z;

    MatrixXd h = -p * p.transpose();
    h.diagonal() += p;
    h.diagonal().array() += fit.lambda;
    Eigen::LLT<MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("cv_score: Hessian factorization failed");
    const MatrixXd h_inv = llt.solve(MatrixXd::Identity(m, m));
    const VectorXd h_inv_k = h_inv * k_tilde;
    parts.loo_term =
        (k_tilde.dot(h_inv.diagonal()) - k_tilde.dot(h_inv_k)) / (n - 1.0);
    return parts;
}

double cv_score(const FitResult& fit, const CountVector& k, const BaseMeasure& w,
                double alpha) {
    require(alpha >= 1.0, "cv_score: alpha must be >= 1");
    const CvScoreParts parts = cv_score_parts(fit, k, w);
    return parts.fit_term + alpha * parts.loo_term;
}

FitResult loo_refit(const CountVector& k, const BaseMeasure& w, double lambda,
                    Eigen::Index cell, const FitConfig& config) {
    require(cell >= 0 && cell < k.size(), "loo_refit: cell index out of range");
    require(k[cell] >= 1.0, "loo_refit: cell must hold at least one observation");
    require(k.total() > 1.0, "loo_refit: needs total count > 1");
    VectorXd reduced = k.counts();
    reduced[cell] -= 1.0;
    return solve(CountVector(reduced), w, lambda, config);
}

SelectionResult select_cv_from_sweep(const GridSweep& sweep, const CountVector& k,
                                     const BaseMeasure& w, double alpha) {
    std::vector<double> scores(sweep.lambdas.size(),
                               std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < sweep.lambdas.size(); ++i)
        if (sweep.fits[i]) scores[i] = cv_score(*sweep.fits[i], k, w, alpha);
    return pick_minimum(sweep, scores);
}

SelectionResult select_oracle_from_sweep(const GridSweep& sweep,
                                         const Composition& p_true) {
    std::vector<double> scores(sweep.lambdas.size(),
                               std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < sweep.lambdas.size(); ++i)
        if (sweep.fits[i]) scores[i] = kl_divergence(p_true, sweep.fits[i]->p_hat);
    return pick_minimum(sweep, scores);
}

SelectionResult select_lambda_cv(const CountVector& k, const BaseMeasure& w,
                                 const LambdaGrid& grid, double alpha,
                                 const FitConfig& config, const SweepOptions& options) {
    const GridSweep sweep = sweep_grid(k, w, grid, config, options);
    return select_cv_from_sweep(sweep, k, w, alpha);
}

SelectionResult select_lambda_oracle(const CountVector& k, const BaseMeasure& w,
                                     const LambdaGrid& grid, const Composition& p_true,
                                     const FitConfig& config, const SweepOptions& options) {
    require(p_true.size() == k.size(), "select_lambda_oracle: p_true length mismatch");
    const GridSweep sweep = sweep_grid(k, w, grid, config, options);
    return select_oracle_from_sweep(sweep, p_true);
}

}  // namespace compost
