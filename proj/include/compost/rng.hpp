#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace compost {

/// Splittable pseudo-random stream built on splitmix64. A stream is identified
/// by the seed it was constructed from; child(key) derives an independent
/// stream from that identity without disturbing this one, so per-column or
/// per-replication work can be parallelized while staying reproducible.
///
/// Stream layout conventions used by the simulation harness are documented at
/// the call sites (simharness.cpp).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : origin_(seed), state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += GOLDEN);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform on (0, 1]; never returns 0 so log(u) is safe.
    double next_uniform() {
        return ((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (two uniforms per call, cosine branch).
    double next_gaussian();

    /// Independent stream keyed off this stream's identity (not its position).
    RngStream child(std::uint64_t key) const {
        return RngStream(mix(origin_ ^ mix(key * GOLDEN + 0x6A09E667F3BCC909ull)));
    }

    std::uint64_t seed() const { return origin_; }

private:
    static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t origin_;
    std::uint64_t state_;
};

/// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang squeeze method).
double sample_gamma(double shape, RngStream& rng);

/// Symmetric Dirichlet(concentration) of dimension s.
Eigen::VectorXd sample_symmetric_dirichlet(int s, double concentration, RngStream& rng);

/// n draws from the categorical distribution with probabilities p (need not be
/// normalized beyond summing to ~1); returns per-cell counts.
Eigen::VectorXd sample_multinomial_counts(const Eigen::VectorXd& p, long long n, RngStream& rng);

}  // namespace compost
