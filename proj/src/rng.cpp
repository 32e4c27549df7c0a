#include "compost/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "compost/numeric.hpp"

namespace compost {

double RngStream::next_gaussian() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double sample_gamma(double shape, RngStream& rng) {
    if (!(shape >= 1.0)) throw std::invalid_argument("sample_gamma: shape must be >= 1");
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.next_gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

Eigen::VectorXd sample_symmetric_dirichlet(int s, double concentration, RngStream& rng) {
    if (s < 1) throw std::invalid_argument("sample_symmetric_dirichlet: need s >= 1");
    Eigen::VectorXd g(s);
    for (int i = 0; i < s; ++i) g[i] = sample_gamma(concentration, rng);
    return g / g.sum();
}

Eigen::VectorXd sample_multinomial_counts(const Eigen::VectorXd& p, long long n, RngStream& rng) {
    const Eigen::Index m = p.size();
    if (n < 0) throw std::invalid_argument("sample_multinomial_counts: n must be >= 0");
    // Cumulative table + inversion per draw; exact and O(n log m).
    Eigen::VectorXd cum(m);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        acc += p[i];
        cum[i] = acc;
    }
    const double total = cum[m - 1];
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
    for (long long t = 0; t < n; ++t) {
        const double u = rng.next_uniform() * total;
        // first index with cum[idx] >= u
        Eigen::Index lo = 0, hi = m - 1;
        while (lo < hi) {
            const Eigen::Index mid = (lo + hi) / 2;
            if (cum[mid] >= u)
                hi = mid;
            else
                lo = mid + 1;
        }
        counts[lo] += 1.0;
    }
    return counts;
}

}  // namespace compost
