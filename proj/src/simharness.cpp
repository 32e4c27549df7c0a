#include "compost/simharness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>

namespace compost {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void check_config(const StudyConfig& c) {
    require(c.m >= 2, "StudyConfig: m must be >= 2");
    require(c.s >= 1, "StudyConfig: s must be >= 1");
    require(c.N_total >= c.s, "StudyConfig: N_total must be >= s");
    require(c.sigma2_between > 0.0, "StudyConfig: sigma2_between must be positive");
    require(c.dirichlet_concentration > 0.0,
            "StudyConfig: dirichlet_concentration must be positive");
    c.grid.validate();
}

// Stream layout off the root seed: 1 = shared Z, 2.x = per-column truth
// noise, 3 = size split, 4.x = per-column multinomial sampling.
constexpr std::uint64_t kStreamSharedZ = 1;
constexpr std::uint64_t kStreamTruthNoise = 2;
constexpr std::uint64_t kStreamSplit = 3;
constexpr std::uint64_t kStreamSampling = 4;

}  // namespace

TruthSet generate_truths(const StudyConfig& config) {
    check_config(config);
    RngStream root(config.seed);
    RngStream z_stream = root.child(kStreamSharedZ);

    TruthSet out;
    out.z_shared.resize(config.m);
    for (int y = 0; y < config.m; ++y) out.z_shared[y] = z_stream.next_gaussian();

    const double sigma = std::sqrt(config.sigma2_between);
    out.z_offsets.resize(config.m, config.s);
    out.p.reserve(config.s);
    RngStream noise_root = root.child(kStreamTruthNoise);
    for (int x = 0; x < config.s; ++x) {
        RngStream col = noise_root.child(static_cast<std::uint64_t>(x));
        VectorXd z(config.m);
        for (int y = 0; y < config.m; ++y) {
            out.z_offsets(y, x) = sigma * col.next_gaussian();
            z[y] = out.z_shared[y] + out.z_offsets(y, x);
        }
        out.p.emplace_back(detail::softmax_from_logits(z).p);
    }
    return out;
}

std::vector<long long> split_total(long long N, int s, double concentration,
                                   RngStream& rng) {
    require(s >= 1, "split_total: s must be >= 1");
    require(N >= s, "split_total: N must be >= s");
    const VectorXd w = sample_symmetric_dirichlet(s, concentration, rng);

    std::vector<long long> sizes(s);
    std::vector<std::pair<double, int>> remainders(s);
    long long assigned = 0;
    for (int i = 0; i < s; ++i) {
        const double raw = w[i] * static_cast<double>(N);
        sizes[i] = static_cast<long long>(std::floor(raw));
        remainders[i] = {raw - std::floor(raw), i};
        assigned += sizes[i];
    }
    // Largest-remainder correction; ties broken by index for determinism.
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (long long d = N - assigned, i = 0; d > 0; --d, ++i)
        sizes[remainders[i % s].second] += 1;
    // Every column needs at least one observation.
    for (int i = 0; i < s; ++i) {
        while (sizes[i] < 1) {
            const auto largest = std::max_element(sizes.begin(), sizes.end());
            *largest -= 1;
            sizes[i] += 1;
        }
    }
    return sizes;
}

CountVector sample_multinomial(const Composition& p, long long n, RngStream& rng) {
    require(n >= 1, "sample_multinomial: n must be >= 1");
    return CountVector(sample_multinomial_counts(p.probs(), n, rng));
}

FiveNumber five_number_summary(std::vector<double> values) {
    require(!values.empty(), "five_number_summary: empty input");
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double q) {
        const double h = q * (static_cast<double>(values.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = h - std::floor(h);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    return FiveNumber{values.front(), quantile(0.25), quantile(0.5), quantile(0.75),
                      values.back()};
}

namespace {

SchemeReport summarize(std::string name, std::vector<ColumnOutcome> columns) {
    SchemeReport rep;
    rep.scheme = std::move(name);
    std::vector<double> lo, lv, ratio;
    lo.reserve(columns.size());
    lv.reserve(columns.size());
    ratio.reserve(columns.size());
    for (const ColumnOutcome& c : columns) {
        lo.push_back(c.l_oracle);
        lv.push_back(c.l_cv);
        ratio.push_back(c.efficacy);
        if (c.l_cv > 2.0 * c.l_oracle) ++rep.cv_failures;
    }
    rep.oracle_loss = five_number_summary(lo);
    rep.cv_loss = five_number_summary(lv);
    rep.efficacy = five_number_summary(ratio);
    rep.columns = std::move(columns);
    return rep;
}

}  // namespace

StudyReport run_study(const StudyConfig& config) {
    check_config(config);
    RngStream root(config.seed);

    const TruthSet truths = generate_truths(config);
    RngStream split_stream = root.child(kStreamSplit);
    std::vector<long long> sizes =
        split_total(config.N_total, config.s, config.dirichlet_concentration, split_stream);

    MatrixXd counts(config.m, config.s);
    RngStream sample_root = root.child(kStreamSampling);
    for (int x = 0; x < config.s; ++x) {
        RngStream col = sample_root.child(static_cast<std::uint64_t>(x));
        counts.col(x) =
            sample_multinomial(truths.p[x], sizes[x], col).counts();
    }
    const CountMatrix K(std::move(counts));

    // Stage-1 prior from the collapsed counts, uniform weights.
    EstimateOptions est;
    est.alpha = config.alpha;
    est.grid = config.grid;
    est.fit = config.fit;
    const SscompResult stage1 = [&] {
        try {
            return sscomp(K.collapsed(), nullptr, est);
        } catch (const std::exception& e) {
            throw std::runtime_error(
                std::string("run_study: collapsed stage-1 fit failed: ") + e.what());
        }
    }();
    const BaseMeasure uniform_w = BaseMeasure::uniform(config.m);
    const BaseMeasure prior_w(stage1.p_hat.probs());

    struct ColumnPair {
        ColumnOutcome uniform;
        ColumnOutcome prior;
    };
    std::vector<std::optional<ColumnPair>> results(config.s);

    detail::parallel_for(static_cast<std::size_t>(config.s), [&](std::size_t xi) {
        const int x = static_cast<int>(xi);
        try {
            const CountVector kx = K.column(x);
            const Composition& px = truths.p[x];
            ColumnPair pair;
            for (int scheme = 0; scheme < 2; ++scheme) {
                const BaseMeasure& w = scheme == 0 ? uniform_w : prior_w;
                SweepOptions sweep_opts;
                sweep_opts.zero_collapse =
                    w.is_uniform() && 4 * kx.zero_cells() >= kx.size();
                const GridSweep sweep =
                    sweep_grid(kx, w, config.grid, config.fit, sweep_opts);
                const SelectionResult cv =
                    select_cv_from_sweep(sweep, kx, w, config.alpha);
                const SelectionResult oracle = select_oracle_from_sweep(sweep, px);

                ColumnOutcome out;
                out.column = x;
                out.n = sizes[x];
                out.l_cv = kl_divergence(px, cv.fit.p_hat);
                out.l_oracle = kl_divergence(px, oracle.fit.p_hat);
                out.lambda_cv = cv.trace.chosen_lambda;
                out.lambda_oracle = oracle.trace.chosen_lambda;
                out.efficacy = out.l_oracle / out.l_cv;
                (scheme == 0 ? pair.uniform : pair.prior) = out;
            }
            results[xi] = pair;
        } catch (const std::exception& e) {
            throw std::runtime_error("run_study: column " + std::to_string(x) +
                                     " failed: " + e.what());
        }
    });

    std::vector<ColumnOutcome> uniform_cols, prior_cols;
    uniform_cols.reserve(config.s);
    prior_cols.reserve(config.s);
    for (int x = 0; x < config.s; ++x) {
        uniform_cols.push_back(results[x]->uniform);
        prior_cols.push_back(results[x]->prior);
    }

    StudyReport report;
    report.config = config;
    report.sizes = std::move(sizes);
    report.prior_lambda = stage1.trace.chosen_lambda;
    report.uniform = summarize("uniform", std::move(uniform_cols));
    report.prior = summarize("prior", std::move(prior_cols));
    return report;
}

}  // namespace compost
