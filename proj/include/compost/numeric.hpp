#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>

namespace compost {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace detail {

/// Neumaier compensated summation. The partition function, count totals and
/// centering sums all feed quantities that get divided by lambda (as small as
/// 1e-10), so plain accumulation is not good enough.
inline double neumaier_sum(const double* x, Eigen::Index n) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double t = sum + x[i];
        if (std::abs(sum) >= std::abs(x[i]))
            comp += (sum - t) + x[i];
        else
            comp += (x[i] - t) + sum;
        sum = t;
    }
    return sum + comp;
}

inline double neumaier_sum(const VectorXd& x) { return neumaier_sum(x.data(), x.size()); }

struct Softmax {
    VectorXd p;    // p_y = exp(t_y) / sum_x exp(t_x), strictly positive
    double log_z;  // log sum_y exp(t_y)
};

/// Normalized exponential of t with max-subtraction. t typically holds
/// eta_y + log w_y, so p is the composition and log_z the log-partition.
inline Softmax softmax_from_logits(const VectorXd& t) {
    Softmax out;
    const double m = t.maxCoeff();
    VectorXd e = (t.array() - m).exp();
    const double z = neumaier_sum(e);
    out.p = e / z;
    out.log_z = m + std::log(z);
    return out;
}

/// Runs fn(i) for i in [0, count), spread over worker threads. The COMPOST_THREADS
/// environment variable caps the worker count. Results must be written to
/// per-index slots so scheduling cannot affect output.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

/// Worker cap currently in effect (>= 1).
unsigned thread_cap();

}  // namespace detail
}  // namespace compost
