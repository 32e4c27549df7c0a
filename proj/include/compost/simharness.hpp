#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compost/estimator.hpp"
#include "compost/rng.hpp"

namespace compost {

/// Seeded simulation study: s multinomial columns over m
/// cells with log-probabilities Z_y + z_{x,y}, a total budget of N_total
/// observations split unevenly over the columns, and four estimates per
/// column (uniform/prior weights x CV/oracle lambda).
struct StudyConfig {
    int m = 100;
    int s = 50;
    double sigma2_between = 0.25;   // variance of the per-column noise z_{x,y}
    long long N_total = 10000;
    std::uint64_t seed = 1;
    double dirichlet_concentration = 25.0;  // unevenness of the size split
    double alpha = 1.4;
    LambdaGrid grid = LambdaGrid::default_grid();
    FitConfig fit{};
};

struct TruthSet {
    VectorXd z_shared;            // Z_y, one draw shared by all columns
    MatrixXd z_offsets;           // z_{x,y} ~ N(0, sigma2_between), m rows x s columns
    std::vector<Composition> p;   // column truths, p_{x,y} proportional to e^{Z_{x,y}}
};

/// Deterministic per seed: Z_y ~ N(0,1) once, Z_{x,y} = Z_y + z_{x,y} with
/// z ~ N(0, sigma2_between), then p_x = softmax(Z_x).
TruthSet generate_truths(const StudyConfig& config);

/// Random positive integers summing to N: proportions from a symmetric
/// Dirichlet(concentration), scaled by N, rounded by largest remainder.
/// Concentration 25 gives a spread of roughly [100, 320]
/// at N = 10000 over s = 50 columns.
std::vector<long long> split_total(long long N, int s, double concentration,
                                   RngStream& rng);

/// Multinomial(n; p) as a CountVector; deterministic per stream.
CountVector sample_multinomial(const Composition& p, long long n, RngStream& rng);

struct ColumnOutcome {
    int column = 0;
    long long n = 0;
    double l_oracle = 0.0;       // KL(p_x, p_hat) at the oracle lambda
    double l_cv = 0.0;           // KL(p_x, p_hat) at the cross-validated lambda
    double lambda_oracle = 0.0;
    double lambda_cv = 0.0;
    double efficacy = 0.0;       // l_oracle / l_cv, in (0, 1]
};

struct FiveNumber {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Five-number summary with type-7 (linear interpolation) quartiles.
FiveNumber five_number_summary(std::vector<double> values);

struct SchemeReport {
    std::string scheme;  // "uniform" or "prior"
    std::vector<ColumnOutcome> columns;
    FiveNumber oracle_loss;
    FiveNumber cv_loss;
    FiveNumber efficacy;
    // Columns where CV lost badly: L(lambda_v) > 2 L(lambda_o).
    int cv_failures = 0;
};

struct StudyReport {
    StudyConfig config;
    std::vector<long long> sizes;
    double prior_lambda = 0.0;  // stage-1 collapsed fit's cross-validated lambda
    SchemeReport uniform;
    SchemeReport prior;
};

/// Full study: truths, sizes, samples, stage-1 prior from the collapsed data,
/// then per column and per weighting scheme one grid sweep scored by both the
/// CV criterion and the KL oracle. Columns run in parallel on per-column RNG
/// streams; the report is byte-identical for a given config.
StudyReport run_study(const StudyConfig& config);

}  // namespace compost
