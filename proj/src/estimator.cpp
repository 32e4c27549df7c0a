#include "compost/estimator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace compost {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool want_zero_collapse(const CountVector& k, const BaseMeasure& w,
                        ZeroCollapse mode) {
    switch (mode) {
        case ZeroCollapse::Off: return false;
        case ZeroCollapse::On:
            require(w.is_uniform(), "sscomp: zero-collapse requires uniform weights");
            return true;
        case ZeroCollapse::Auto:
            return w.is_uniform() &&
                   4 * k.zero_cells() >= k.size();  // >= 25% zero cells
    }
    return false;
}

}  // namespace

CountMatrix::CountMatrix(MatrixXd counts) : counts_(std::move(counts)) {
    require(counts_.rows() >= 1 && counts_.cols() >= 1,
            "CountMatrix: need at least one cell and one column");
    for (Eigen::Index x = 0; x < counts_.cols(); ++x) {
        double total = 0.0;
        for (Eigen::Index y = 0; y < counts_.rows(); ++y) {
            const double v = counts_(y, x);
            require(std::isfinite(v) && v >= 0.0,
                    "CountMatrix: counts must be finite and non-negative (row " +
                        std::to_string(y) + ", column " + std::to_string(x) + ")");
            total += v;
        }
        require(total > 0.0,
                "CountMatrix: column " + std::to_string(x) + " has zero total");
    }
}

CountVector CountMatrix::column(Eigen::Index x) const {
    return CountVector(counts_.col(x));
}

CountVector CountMatrix::collapsed() const {
    return CountVector(counts_.rowwise().sum());
}

CompositionMatrix::CompositionMatrix(MatrixXd probs) : probs_(std::move(probs)) {
    for (Eigen::Index x = 0; x < probs_.cols(); ++x)
        Composition(probs_.col(x));  // per-column validation
}

Composition CompositionMatrix::column(Eigen::Index x) const {
    return Composition(probs_.col(x));
}

SscompResult sscomp(const CountVector& k, const BaseMeasure* w,
                    const EstimateOptions& options) {
    require(k.total() > 0.0, "sscomp: total count must be positive");
    const BaseMeasure weights = w ? *w : BaseMeasure::uniform(k.size());
    require(weights.size() == k.size(), "sscomp: weights length mismatch");

    SweepOptions sweep;
    sweep.zero_collapse = want_zero_collapse(k, weights, options.zero_collapse);
    SelectionResult sel =
        select_lambda_cv(k, weights, options.grid, options.alpha, options.fit, sweep);
    return SscompResult{sel.fit.p_hat, std::move(sel.trace), std::move(sel.fit)};
}

Sscomp2Result sscomp2(const CountMatrix& K, const EstimateOptions& options) {
    // Stage 1: prior shape from the collapsed counts under uniform weights.
    SscompResult stage1 = sscomp(K.collapsed(), nullptr, options);
    const BaseMeasure prior_measure(stage1.p_hat.probs());

    // Stage 2: per-column fits against the prior, embarrassingly parallel.
    const Eigen::Index s = K.cols();
    std::vector<std::optional<Sscomp2Column>> results(s);
    EstimateOptions column_options = options;
    column_options.zero_collapse = ZeroCollapse::Off;  // weights are not uniform
    detail::parallel_for(static_cast<std::size_t>(s), [&](std::size_t x) {
        const CountVector kx = K.column(static_cast<Eigen::Index>(x));
        SscompResult r = sscomp(kx, &prior_measure, column_options);
        Sscomp2Column col{std::move(r), kx.total(), kx.zero_cells(), 0.0};
        col.kl_prior_to_fit = kl_divergence(stage1.p_hat, col.result.p_hat);
        results[x] = std::move(col);
    });

    MatrixXd probs(K.rows(), s);
    std::vector<Sscomp2Column> columns;
    columns.reserve(s);
    for (Eigen::Index x = 0; x < s; ++x) {
        probs.col(x) = results[x]->result.p_hat.probs();
        columns.push_back(std::move(*results[x]));
    }
    return Sscomp2Result{CompositionMatrix(std::move(probs)), std::move(stage1.p_hat),
                         std::move(stage1.trace), std::move(columns)};
}

FitResult solve_with_zero_collapse(const CountVector& k, const BaseMeasure& w,
                                   double lambda, const FitConfig& config) {
    return detail::solve_collapsed(k, w, lambda, config, nullptr);
}

}  // namespace compost
