#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "compost/solver.hpp"

namespace compost {

/// Known truth for theory diagnostics: p0_y = w_y exp(eta0_y) / sum_x w_x exp(eta0_x)
/// with the side condition sum_y eta0_y = 0.
struct TruthSpec {
    Composition p0;
    LogDensity eta0;
    BaseMeasure w;

    static TruthSpec from_composition(const Composition& p0, const BaseMeasure& w);
    static TruthSpec from_log_density(const LogDensity& eta0, const BaseMeasure& w);
};

/// eta0_y = log(p0_y / w_y) - mean_y log(p0_y / w_y); inverse of to_composition.
LogDensity eta_from_composition(const Composition& p0, const BaseMeasure& w);

/// Minimizer of the quadratic approximation of the objective at eta0:
///   eta~ - eta0 = (lambda I + P0 - p0 p0')^{-1} ((k~ - p0) - lambda eta0).
/// Linear in k~. lambda = 0 is rejected: P0 - p0 p0' annihilates constants.
VectorXd linearized_estimate(const VectorXd& k_tilde, const TruthSpec& truth,
                             double lambda);

/// (eta - eta0)' (lambda I + P0 - p0 p0') (eta - eta0), the penalized error
/// (lambda J + V)(eta - eta0).
double penalized_error(const TruthSpec& truth, const VectorXd& eta, double lambda);

struct RateRecord {
    double n = 0.0;
    double lambda = 0.0;
    double mc_mean = 0.0;        // Monte Carlo average of (lambda J + V)(eta~ - eta0)
    double mc_stderr = 0.0;
    double analytic_mean = 0.0;  // lambda^2 eta0' G^{-1} eta0 + (1/n) sum_y rho_y/(lambda+rho_y)
    double bias_exact = 0.0;
    double variance_exact = 0.0;
    double bias_bound = 0.0;      // lambda eta0' eta0
    double variance_bound = 0.0;  // 1 / (n lambda)
    double bound = 0.0;           // bias_bound + variance_bound
    double ratio_mc_over_bound = 0.0;
};

struct RateReport {
    std::vector<RateRecord> records;   // one per (n, lambda) pair, n-major order
    VectorXd rho;                      // eigenvalues of P0 - p0 p0' (ascending)
    double rho_sum = 0.0;              // = 1 - sum_y p0_y^2 < 1
    double eta0_norm_sq = 0.0;
};

/// Monte Carlo check of the error bound: for each (n, lambda) draws
/// `replications` multinomial samples, averages the penalized error of the
/// linearized estimate and reports it next to its exact expectation and the
/// bias/variance bounds. Replications run in parallel on per-replication
/// streams; the reduction is ordered, so results are seed-deterministic.
RateReport rate_experiment(const TruthSpec& truth, const std::vector<double>& n_values,
                           const std::vector<double>& lambda_values, int replications,
                           std::uint64_t seed);

/// Least-squares slope of log(value) against log(n).
double loglog_slope(const std::vector<std::pair<double, double>>& n_and_value);

/// (V(eta_hat - eta~), V(eta~ - eta0)): how far the exact penalized fit sits
/// from the linearized one, against how far the linearized one sits from the
/// truth. The first is higher-order small relative to the second.
std::pair<double, double> approximation_gap(const CountVector& k, const BaseMeasure& w,
                                            double lambda, const TruthSpec& truth,
                                            const FitConfig& config = {});

}  // namespace compost
