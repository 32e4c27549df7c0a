#include "compost/linearized.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

#include "compost/rng.hpp"

namespace compost {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

MatrixXd centered_covariance(const Composition& p0) {
    MatrixXd v = -p0.probs() * p0.probs().transpose();
    v.diagonal() += p0.probs();
    return v;
}

}  // namespace

LogDensity eta_from_composition(const Composition& p0, const BaseMeasure& w) {
    require(p0.size() == w.size(), "eta_from_composition: length mismatch");
    VectorXd eta = p0.probs().array().log() - w.log_weights().array();
    return LogDensity::centered(std::move(eta));
}

TruthSpec TruthSpec::from_composition(const Composition& p0, const BaseMeasure& w) {
    LogDensity eta0 = eta_from_composition(p0, w);
    const Composition round_trip = to_composition(eta0, w);
    const double err =
        (round_trip.probs() - p0.probs()).lpNorm<Eigen::Infinity>();
    require(err <= 1e-12, "TruthSpec: p0 does not round-trip through eta0");
    return TruthSpec{p0, std::move(eta0), w};
}

TruthSpec TruthSpec::from_log_density(const LogDensity& eta0, const BaseMeasure& w) {
    require(eta0.size() == w.size(), "TruthSpec: length mismatch");
    return TruthSpec{to_composition(eta0, w), eta0, w};
}

VectorXd linearized_estimate(const VectorXd& k_tilde, const TruthSpec& truth,
                             double lambda) {
    require(std::isfinite(lambda) && lambda > 0.0,
            "linearized_estimate: lambda must be positive");
    require(k_tilde.size() == truth.p0.size(), "linearized_estimate: length mismatch");
    MatrixXd g = centered_covariance(truth.p0);
    g.diagonal().array() += lambda;
    const VectorXd rhs = (k_tilde - truth.p0.probs()) - lambda * truth.eta0.eta();
    return truth.eta0.eta() + Eigen::LLT<MatrixXd>(g).solve(rhs);
}

double penalized_error(const TruthSpec& truth, const VectorXd& eta, double lambda) {
    require(eta.size() == truth.p0.size(), "penalized_error: length mismatch");
    const VectorXd d = eta - truth.eta0.eta();
    const VectorXd& p0 = truth.p0.probs();
    const VectorXd v_d = p0.cwiseProduct(d) - p0 * p0.dot(d);
    return d.dot(lambda * d + v_d);
}

RateReport rate_experiment(const TruthSpec& truth, const std::vector<double>& n_values,
                           const std::vector<double>& lambda_values, int replications,
                           std::uint64_t seed) {
    require(!n_values.empty() && !lambda_values.empty(),
            "rate_experiment: empty grid");
    require(replications >= 1, "rate_experiment: need at least one replication");
    for (double n : n_values)
        require(n >= 1.0 && n == std::floor(n), "rate_experiment: n must be integral >= 1");
    for (double lambda : lambda_values)
        require(lambda > 0.0, "rate_experiment: lambda must be positive");

    const VectorXd& p0 = truth.p0.probs();
    const VectorXd& eta0 = truth.eta0.eta();

    RateReport report;
    const MatrixXd v0 = centered_covariance(truth.p0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(v0);
    report.rho = eig.eigenvalues().cwiseMax(0.0);
    report.rho_sum = report.rho.sum();
    report.eta0_norm_sq = eta0.squaredNorm();

    // One factorization and one exact bias term per lambda.
    std::vector<Eigen::LLT<MatrixXd>> factors;
    std::vector<double> bias_exact(lambda_values.size());
    factors.reserve(lambda_values.size());
    for (std::size_t j = 0; j < lambda_values.size(); ++j) {
        MatrixXd g = v0;
        g.diagonal().array() += lambda_values[j];
        factors.emplace_back(g);
        const double lam = lambda_values[j];
        bias_exact[j] = lam * lam * eta0.dot(factors[j].solve(eta0));
    }

    RngStream root(seed);
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
        const double n = n_values[ni];
        const long long n_int = static_cast<long long>(n);
        // errors[rep][j]; written by index, reduced in order
        std::vector<std::vector<double>> errors(
            replications, std::vector<double>(lambda_values.size(), 0.0));
        RngStream n_stream = root.child(ni);
        detail::parallel_for(static_cast<std::size_t>(replications), [&](std::size_t rep) {
            RngStream rng = n_stream.child(rep);
            const VectorXd counts = sample_multinomial_counts(p0, n_int, rng);
            const VectorXd k_tilde = counts / n;
            for (std::size_t j = 0; j < lambda_values.size(); ++j) {
                const VectorXd rhs =
                    (k_tilde - p0) - lambda_values[j] * eta0;
                errors[rep][j] = rhs.dot(factors[j].solve(rhs));
            }
        });
        for (std::size_t j = 0; j < lambda_values.size(); ++j) {
            const double lam = lambda_values[j];
            VectorXd vals(replications);
            for (int rep = 0; rep < replications; ++rep) vals[rep] = errors[rep][j];
            const double mean = detail::neumaier_sum(vals) / replications;
            double var = 0.0;
            for (int rep = 0; rep < replications; ++rep) {
                const double c = vals[rep] - mean;
                var += c * c;
            }
            var = replications > 1 ? var / (replications - 1.0) : 0.0;

            RateRecord rec;
            rec.n = n;
            rec.lambda = lam;
            rec.mc_mean = mean;
            rec.mc_stderr = std::sqrt(var / replications);
            rec.bias_exact = bias_exact[j];
            rec.variance_exact =
                (report.rho.array() / (lam + report.rho.array())).sum() / n;
            rec.analytic_mean = rec.bias_exact + rec.variance_exact;
            rec.bias_bound = lam * report.eta0_norm_sq;
            rec.variance_bound = 1.0 / (n * lam);
            rec.bound = rec.bias_bound + rec.variance_bound;
            rec.ratio_mc_over_bound = rec.mc_mean / rec.bound;
            report.records.push_back(rec);
        }
    }
    return report;
}

double loglog_slope(const std::vector<std::pair<double, double>>& n_and_value) {
    if (n_and_value.size() < 2)
        throw std::invalid_argument("loglog_slope: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(n_and_value.size());
    for (const auto& [n, v] : n_and_value) {
        const double x = std::log(n), y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

std::pair<double, double> approximation_gap(const CountVector& k, const BaseMeasure& w,
                                            double lambda, const TruthSpec& truth,
                                            const FitConfig& config) {
    require(k.size() == truth.p0.size(), "approximation_gap: length mismatch");
    const FitResult fit = solve(k, w, lambda, config);
    const VectorXd eta_lin = linearized_estimate(empirical_composition(k), truth, lambda);
    const double gap_solver_vs_linear =
        quadratic_proxy_V(truth.p0, fit.eta_hat.eta() - eta_lin);
    const double gap_linear_vs_truth =
        quadratic_proxy_V(truth.p0, eta_lin - truth.eta0.eta());
    return {gap_solver_vs_linear, gap_linear_vs_truth};
}

}  // namespace compost
