#pragma once

#include <stdexcept>
#include <utility>

#include "compost/numeric.hpp"

namespace compost {

/// Observed counts k_y per cell. Entries are non-negative reals; the
/// multinomial story wants integers but everything downstream only uses the
/// ratios k_y/n, so fractional "counts" are accepted as-is.
class CountVector {
public:
    explicit CountVector(VectorXd counts);

    const VectorXd& counts() const { return counts_; }
    double total() const { return total_; }
    Eigen::Index size() const { return counts_.size(); }
    double operator[](Eigen::Index i) const { return counts_[i]; }

    Eigen::Index zero_cells() const;

private:
    VectorXd counts_;
    double total_;  // Neumaier sum of counts
};

/// Strictly positive prior weights w_y defining the base measure. Scale-free:
/// w and c*w (c > 0) describe the same measure and must produce identical fits.
class BaseMeasure {
public:
    explicit BaseMeasure(VectorXd weights);

    static BaseMeasure uniform(Eigen::Index m);

    const VectorXd& weights() const { return weights_; }
    const VectorXd& log_weights() const { return log_weights_; }
    Eigen::Index size() const { return weights_.size(); }

    bool is_uniform() const { return uniform_; }

private:
    VectorXd weights_;
    VectorXd log_weights_;
    bool uniform_;
};

/// Centered log-density coordinates: sum_y eta_y = 0 (within 1e-8).
class LogDensity {
public:
    /// Validates the centering side condition.
    explicit LogDensity(VectorXd eta);

    /// Centers eta by subtracting its mean.
    static LogDensity centered(VectorXd eta);

    /// Wraps eta produced by an optimizer whose centering is a tested property
    /// rather than a construction-time guarantee (it degrades as lambda -> 0).
    static LogDensity unchecked(VectorXd eta);

    const VectorXd& eta() const { return eta_; }
    Eigen::Index size() const { return eta_.size(); }
    double operator[](Eigen::Index i) const { return eta_[i]; }

    /// sum_y eta_y, compensated.
    double center_sum() const;

private:
    struct unchecked_t {};
    LogDensity(VectorXd eta, unchecked_t) : eta_(std::move(eta)) {}

    VectorXd eta_;
};

/// Probability vector with strictly positive entries summing to 1 (within 1e-10).
class Composition {
public:
    explicit Composition(VectorXd probs);

    static Composition uniform(Eigen::Index m);

    const VectorXd& probs() const { return probs_; }
    Eigen::Index size() const { return probs_.size(); }
    double operator[](Eigen::Index i) const { return probs_[i]; }

private:
    VectorXd probs_;
};

/// p_y = w_y exp(eta_y) / sum_x w_x exp(eta_x), computed with max-subtraction.
Composition to_composition(const LogDensity& eta, const BaseMeasure& w);

/// Same map for raw (possibly uncentered) coordinates; used by the solver.
Composition to_composition_raw(const VectorXd& eta, const BaseMeasure& w);

/// KL(p, q) = sum_y p_y log(p_y / q_y). Terms use log1p of the relative
/// difference so nearly-equal pairs do not lose the small positive value
/// to cancellation.
double kl_divergence(const Composition& p, const Composition& q);

/// V(d) = d' (P0 - p0 p0') d = sum_y p0_y d_y^2 - (sum_y p0_y d_y)^2, the
/// quadratic proxy for symmetrized KL. Evaluated as a p0-weighted variance of
/// d, which keeps it non-negative and shift-invariant.
double quadratic_proxy_V(const Composition& p0, const VectorXd& d);

/// k_y / n. May contain zeros, hence a plain vector rather than a Composition.
VectorXd empirical_composition(const CountVector& k);

}  // namespace compost
