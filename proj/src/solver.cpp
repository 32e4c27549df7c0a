#include "compost/solver.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>
#include <vector>

namespace compost {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_inputs(const CountVector& k, const BaseMeasure& w, double lambda) {
    require(k.size() == w.size(), "solver: counts and weights length mismatch");
    require(k.total() > 0.0, "solver: total count must be positive");
    require(std::isfinite(lambda) && lambda > 0.0, "solver: lambda must be positive");
}

}  // namespace

double objective(const CountVector& k, const BaseMeasure& w, double lambda,
                 const VectorXd& eta) {
    check_inputs(k, w, lambda);
    require(eta.size() == k.size(), "objective: eta length mismatch");
    const VectorXd k_tilde = k.counts() / k.total();
    const double log_z = detail::softmax_from_logits(eta + w.log_weights()).log_z;
    return -k_tilde.dot(eta) + log_z + 0.5 * lambda * eta.squaredNorm();
}

VectorXd gradient(const CountVector& k, const BaseMeasure& w, double lambda,
                  const VectorXd& eta) {
    check_inputs(k, w, lambda);
    require(eta.size() == k.size(), "gradient: eta length mismatch");
    const VectorXd k_tilde = k.counts() / k.total();
    const VectorXd p = detail::softmax_from_logits(eta + w.log_weights()).p;
    return -k_tilde + p + lambda * eta;
}

MatrixXd hessian(const CountVector& k, const BaseMeasure& w, double lambda,
                 const VectorXd& eta) {
    check_inputs(k, w, lambda);
    require(eta.size() == k.size(), "hessian: eta length mismatch");
    const VectorXd p = detail::softmax_from_logits(eta + w.log_weights()).p;
    MatrixXd h = -p * p.transpose();
    h.diagonal() += p;
    h.diagonal().array() += lambda;
    return h;
}

namespace detail {

namespace {

struct GroupedState {
    VectorXd group_p;  // group probability masses, sum = 1
    double log_z = 0.0;
    double objective = 0.0;
};

GroupedState evaluate(const GroupedProblem& prob, const VectorXd& eta) {
    GroupedState st;
    const VectorXd t = eta + prob.log_weights + prob.mult.array().log().matrix();
    const Softmax sm = softmax_from_logits(t);
    st.group_p = sm.p;
    st.log_z = sm.log_z;
    const double penalty = prob.mult.dot(eta.cwiseProduct(eta));
    st.objective = -prob.k_tilde.dot(eta) + sm.log_z + 0.5 * prob.lambda * penalty;
    return st;
}

// Per-cell gradient of one group member; the full-problem sup-norm criterion
// is invariant under the grouping.
VectorXd per_cell_gradient(const GroupedProblem& prob, const VectorXd& eta,
                           const GroupedState& st) {
    VectorXd g(eta.size());
    for (Eigen::Index j = 0; j < eta.size(); ++j) {
        const double c = prob.mult[j];
        g[j] = (-prob.k_tilde[j] + st.group_p[j]) / c + prob.lambda * eta[j];
    }
    return g;
}

}  // namespace

GroupedFit newton_minimize(const GroupedProblem& prob, const FitConfig& config,
                           const VectorXd* warm_start) {
    require(config.gradient_tolerance > 0.0, "FitConfig: tolerance must be positive");
    require(config.max_iterations >= 1 && config.max_line_search_steps >= 1,
            "FitConfig: iteration counts must be >= 1");
    const Eigen::Index r = prob.k_tilde.size();
    VectorXd eta = (warm_start && warm_start->size() == r) ? *warm_start
                                                           : VectorXd::Zero(r);

    GroupedState st = evaluate(prob, eta);
    VectorXd g = per_cell_gradient(prob, eta, st);
    double gn = g.lpNorm<Eigen::Infinity>();
    int iterations = 0;

    auto newton_direction = [&](const GroupedState& s) -> VectorXd {
        MatrixXd h = -s.group_p * s.group_p.transpose();
        h.diagonal() += s.group_p;
        h.diagonal() += prob.lambda * prob.mult;
        Eigen::LLT<MatrixXd> llt(h);
        if (llt.info() != Eigen::Success)
            throw ConvergenceError("solver: Hessian factorization failed", iterations, gn);
        // group gradient = mult .* per-cell gradient
        return llt.solve((-g.cwiseProduct(prob.mult)).eval());
    };

    while (gn > config.gradient_tolerance) {
        if (iterations >= config.max_iterations)
            throw ConvergenceError(
                "solver: no convergence after " + std::to_string(iterations) +
                    " iterations (gradient sup-norm " + std::to_string(gn) + ")",
                iterations, gn);
        const VectorXd d = newton_direction(st);
        double step = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < config.max_line_search_steps; ++ls) {
            const VectorXd trial = eta + step * d;
            const GroupedState trial_st = evaluate(prob, trial);
            if (trial_st.objective < st.objective) {
                eta = trial;
                st = trial_st;
                accepted = true;
                break;
            }
            step *= config.line_search_shrink;
        }
        if (!accepted) {
            // Objective differences have hit rounding resolution before the
            // gradient tolerance (happens at moderate lambda). Take the full
            // Newton step if it shrinks the gradient without raising the
            // objective beyond rounding.
            const VectorXd trial = eta + d;
            const GroupedState trial_st = evaluate(prob, trial);
            const VectorXd trial_g = per_cell_gradient(prob, trial, trial_st);
            const double slack = 1e-14 * (1.0 + std::abs(st.objective));
            if (trial_st.objective <= st.objective + slack &&
                trial_g.lpNorm<Eigen::Infinity>() < gn) {
                eta = trial;
                st = trial_st;
                accepted = true;
            }
        }
        if (!accepted)
            throw ConvergenceError("solver: line search stalled (gradient sup-norm " +
                                       std::to_string(gn) + ")",
                                   iterations, gn);
        ++iterations;
        g = per_cell_gradient(prob, eta, st);
        gn = g.lpNorm<Eigen::Infinity>();
    }

    // Polish: full Newton steps while the gradient keeps dropping. Quadratic
    // convergence takes the residual from ~tolerance to the rounding floor in
    // one or two steps.
    for (int p = 0; p < config.polish_iterations; ++p) {
        if (gn == 0.0) break;
        const VectorXd d = newton_direction(st);
        const VectorXd trial = eta + d;
        const GroupedState trial_st = evaluate(prob, trial);
        const VectorXd trial_g = per_cell_gradient(prob, trial, trial_st);
        const double trial_gn = trial_g.lpNorm<Eigen::Infinity>();
        if (trial_gn >= gn) break;
        eta = trial;
        st = trial_st;
        g = trial_g;
        gn = trial_gn;
        ++iterations;
    }

    GroupedFit fit;
    fit.eta = std::move(eta);
    fit.iterations = iterations;
    fit.gradient_norm = gn;
    fit.objective_value = st.objective;
    return fit;
}

FitResult solve_collapsed(const CountVector& k, const BaseMeasure& w, double lambda,
                          const FitConfig& config, const VectorXd* warm_start) {
    check_inputs(k, w, lambda);
    require(w.is_uniform(), "solve_collapsed: base measure must be uniform");
    const Eigen::Index m = k.size();
    const double n = k.total();

    std::vector<Eigen::Index> positive;
    positive.reserve(m);
    for (Eigen::Index y = 0; y < m; ++y)
        if (k[y] > 0.0) positive.push_back(y);
    const Eigen::Index z = m - static_cast<Eigen::Index>(positive.size());

    const Eigen::Index r = static_cast<Eigen::Index>(positive.size()) + (z > 0 ? 1 : 0);
    GroupedProblem prob;
    prob.lambda = lambda;
    prob.k_tilde.resize(r);
    prob.log_weights = VectorXd::Constant(r, w.log_weights()[0]);
    prob.mult = VectorXd::Ones(r);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(positive.size()); ++j)
        prob.k_tilde[j] = k[positive[j]] / n;
    if (z > 0) {
        prob.k_tilde[r - 1] = 0.0;
        prob.mult[r - 1] = static_cast<double>(z);
    }

    VectorXd reduced_warm;
    const VectorXd* warm = nullptr;
    if (warm_start && warm_start->size() == m) {
        reduced_warm.resize(r);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(positive.size()); ++j)
            reduced_warm[j] = (*warm_start)[positive[j]];
        if (z > 0) {
            double acc = 0.0;
            for (Eigen::Index y = 0; y < m; ++y)
                if (k[y] == 0.0) acc += (*warm_start)[y];
            reduced_warm[r - 1] = acc / static_cast<double>(z);
        }
        warm = &reduced_warm;
    }

    const GroupedFit reduced = newton_minimize(prob, config, warm);

    VectorXd eta(m);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(positive.size()); ++j)
        eta[positive[j]] = reduced.eta[j];
    if (z > 0) {
        const double eta_zero = reduced.eta[r - 1];
        for (Eigen::Index y = 0; y < m; ++y)
            if (k[y] == 0.0) eta[y] = eta_zero;
    }

    // Diagnostics reported against the full problem.
    FitResult fit{LogDensity::unchecked(eta), to_composition_raw(eta, w), lambda,
                  reduced.iterations, 0.0, 0.0, 0.0};
    const VectorXd g = gradient(k, w, lambda, eta);
    fit.final_gradient_norm = g.lpNorm<Eigen::Infinity>();
    fit.objective_value = objective(k, w, lambda, eta);
    fit.eta_sum = fit.eta_hat.center_sum();
    return fit;
}

}  // namespace detail

FitResult solve(const CountVector& k, const BaseMeasure& w, double lambda,
                const FitConfig& config, const VectorXd* warm_start) {
    check_inputs(k, w, lambda);
    detail::GroupedProblem prob;
    prob.k_tilde = k.counts() / k.total();
    prob.log_weights = w.log_weights();
    prob.mult = VectorXd::Ones(k.size());
    prob.lambda = lambda;
    const detail::GroupedFit raw = detail::newton_minimize(prob, config, warm_start);

    FitResult fit{LogDensity::unchecked(raw.eta), to_composition_raw(raw.eta, w), lambda,
                  raw.iterations, raw.gradient_norm, raw.objective_value, 0.0};
    fit.eta_sum = fit.eta_hat.center_sum();
    return fit;
}

double stationarity_residual(const FitResult& fit, const CountVector& k) {
    const VectorXd k_tilde = k.counts() / k.total();
    const VectorXd r =
        k_tilde - fit.p_hat.probs() - fit.lambda * fit.eta_hat.eta();
    return r.lpNorm<Eigen::Infinity>();
}

}  // namespace compost
