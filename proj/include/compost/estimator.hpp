#pragma once

#include "compost/selection.hpp"

namespace compost {

/// m cells by s samples of non-negative counts; every column must have a
/// positive total.
class CountMatrix {
public:
    explicit CountMatrix(MatrixXd counts);

    const MatrixXd& counts() const { return counts_; }
    Eigen::Index rows() const { return counts_.rows(); }
    Eigen::Index cols() const { return counts_.cols(); }

    CountVector column(Eigen::Index x) const;
    /// Element-wise sum over columns (the collapsed data).
    CountVector collapsed() const;

private:
    MatrixXd counts_;
};

/// m x s matrix whose columns are Compositions.
class CompositionMatrix {
public:
    explicit CompositionMatrix(MatrixXd probs);

    const MatrixXd& probs() const { return probs_; }
    Eigen::Index rows() const { return probs_.rows(); }
    Eigen::Index cols() const { return probs_.cols(); }
    Composition column(Eigen::Index x) const;

private:
    MatrixXd probs_;
};

enum class ZeroCollapse {
    Auto,  // collapse when the base measure is uniform and >= 25% cells are zero
    On,    // always (requires uniform weights)
    Off,
};

struct EstimateOptions {
    double alpha = 1.4;
    LambdaGrid grid = LambdaGrid::default_grid();
    FitConfig fit{};
    ZeroCollapse zero_collapse = ZeroCollapse::Auto;
};

struct SscompResult {
    Composition p_hat;
    SelectionTrace trace;
    FitResult fit;
};

/// Cross-validated density estimate on the nominal domain. Zero-count cells
/// must be present in k (the input length fixes m); the estimate is strictly
/// positive regardless. w = nullptr means uniform weights.
SscompResult sscomp(const CountVector& k, const BaseMeasure* w = nullptr,
                    const EstimateOptions& options = {});

struct Sscomp2Column {
    SscompResult result;
    double n = 0.0;
    Eigen::Index zero_cells = 0;
    double kl_prior_to_fit = 0.0;  // KL(p~, p_hat_x), advisory statistic
};

struct Sscomp2Result {
    CompositionMatrix matrix;
    Composition prior;  // stage-1 collapsed estimate p~
    SelectionTrace prior_trace;
    std::vector<Sscomp2Column> columns;
};

/// Two-stage matrix estimator: stage 1 fits the collapsed counts with uniform
/// weights to obtain the prior shape p~; stage 2 fits each column with
/// w proportional to p~. Columns are fitted in parallel (COMPOST_THREADS caps
/// the workers); results do not depend on scheduling.
Sscomp2Result sscomp2(const CountMatrix& K, const EstimateOptions& options = {});

/// Reduced solve exploiting the zero-count symmetry under uniform weights:
/// all k_y = 0 cells share one coordinate (base weight z, penalty multiplicity
/// z for z zero cells). Agrees with solve() to ~1e-8 per coordinate.
FitResult solve_with_zero_collapse(const CountVector& k, const BaseMeasure& w,
                                   double lambda, const FitConfig& config = {});

}  // namespace compost
