#include "compost/domain.hpp"

#include <cmath>
#include <string>

namespace compost {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

CountVector::CountVector(VectorXd counts) : counts_(std::move(counts)) {
    require(counts_.size() >= 1, "CountVector: need at least one cell");
    for (Eigen::Index i = 0; i < counts_.size(); ++i) {
        require(std::isfinite(counts_[i]) && counts_[i] >= 0.0,
                "CountVector: counts must be finite and non-negative (cell " +
                    std::to_string(i) + ")");
    }
    total_ = detail::neumaier_sum(counts_);
}

Eigen::Index CountVector::zero_cells() const {
    Eigen::Index z = 0;
    for (Eigen::Index i = 0; i < counts_.size(); ++i)
        if (counts_[i] == 0.0) ++z;
    return z;
}

BaseMeasure::BaseMeasure(VectorXd weights) : weights_(std::move(weights)) {
    require(weights_.size() >= 1, "BaseMeasure: need at least one cell");
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        require(std::isfinite(weights_[i]) && weights_[i] > 0.0,
                "BaseMeasure: weights must be finite and strictly positive (cell " +
                    std::to_string(i) + ")");
    }
    log_weights_ = weights_.array().log();
    uniform_ = true;
    for (Eigen::Index i = 1; i < weights_.size(); ++i)
        if (weights_[i] != weights_[0]) { uniform_ = false; break; }
}

BaseMeasure BaseMeasure::uniform(Eigen::Index m) {
    return BaseMeasure(VectorXd::Ones(m));
}

LogDensity::LogDensity(VectorXd eta) : eta_(std::move(eta)) {
    require(eta_.size() >= 1, "LogDensity: need at least one cell");
    const double s = detail::neumaier_sum(eta_);
    require(std::isfinite(s) && std::abs(s) <= 1e-8,
            "LogDensity: coordinates must sum to 0 (got " + std::to_string(s) + ")");
}

LogDensity LogDensity::centered(VectorXd eta) {
    const double mean = detail::neumaier_sum(eta) / static_cast<double>(eta.size());
    eta.array() -= mean;
    return LogDensity(std::move(eta), unchecked_t{});
}

LogDensity LogDensity::unchecked(VectorXd eta) {
    return LogDensity(std::move(eta), unchecked_t{});
}

double LogDensity::center_sum() const { return detail::neumaier_sum(eta_); }

Composition::Composition(VectorXd probs) : probs_(std::move(probs)) {
    require(probs_.size() >= 1, "Composition: need at least one cell");
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
        require(std::isfinite(probs_[i]) && probs_[i] > 0.0,
                "Composition: entries must be strictly positive (cell " +
                    std::to_string(i) + ")");
    }
    const double s = detail::neumaier_sum(probs_);
    require(std::abs(s - 1.0) <= 1e-10,
            "Composition: entries must sum to 1 (got " + std::to_string(s) + ")");
}

Composition Composition::uniform(Eigen::Index m) {
    return Composition(VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
}

Composition to_composition_raw(const VectorXd& eta, const BaseMeasure& w) {
    require(eta.size() == w.size(), "to_composition: length mismatch");
    const VectorXd t = eta + w.log_weights();
    return Composition(detail::softmax_from_logits(t).p);
}

Composition to_composition(const LogDensity& eta, const BaseMeasure& w) {
    return to_composition_raw(eta.eta(), w);
}

double kl_divergence(const Composition& p, const Composition& q) {
    require(p.size() == q.size(), "kl_divergence: length mismatch");
    VectorXd terms(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
        terms[i] = p[i] * std::log1p((p[i] - q[i]) / q[i]);
    return detail::neumaier_sum(terms);
}

double quadratic_proxy_V(const Composition& p0, const VectorXd& d) {
    require(p0.size() == d.size(), "quadratic_proxy_V: length mismatch");
    VectorXd w = p0.probs().cwiseProduct(d);
    const double mean = detail::neumaier_sum(w);
    VectorXd sq(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double c = d[i] - mean;
        sq[i] = p0[i] * c * c;
    }
    return detail::neumaier_sum(sq);
}

VectorXd empirical_composition(const CountVector& k) {
    require(k.total() > 0.0, "empirical_composition: total count must be positive");
    return k.counts() / k.total();
}

}  // namespace compost
