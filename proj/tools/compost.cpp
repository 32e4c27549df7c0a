// compost: composition estimation from count data via penalized likelihood
// density estimation on a nominal discrete domain.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "compost/estimator.hpp"
#include "compost/io.hpp"
#include "compost/reporting.hpp"
#include "compost/simharness.hpp"

namespace {

using namespace compost;

// Exit codes (see README): 0 ok, 1 internal error, 2 bad usage,
// 3 input parse error, 4 validation error, 5 convergence failure.
enum ExitCode {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kParse = 3,
    kValidation = 4,
    kConvergence = 5,
};

struct GridFlags {
    double log10_min = -6.0;
    double log10_max = 2.0;
    double step = 0.1;

    LambdaGrid build() const { return LambdaGrid::from_log10_bounds(log10_min, log10_max, step); }

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid-min", log10_min, "Smallest log10(lambda) on the search grid");
        cmd->add_option("--grid-max", log10_max, "Largest log10(lambda) on the search grid");
        cmd->add_option("--grid-step", step, "log10 step of the search grid");
    }
};

Json fit_to_json(const FitResult& fit, const CountVector& k) {
    return Json{{"iterations", fit.iterations},
                {"final_gradient_norm", fit.final_gradient_norm},
                {"objective", fit.objective_value},
                {"stationarity_residual", stationarity_residual(fit, k)},
                {"eta_sum", fit.eta_sum}};
}

void write_json(const std::filesystem::path& path, const Json& j) {
    io::write_text_atomic(path, j.dump(2) + "\n");
}

BaseMeasure load_weights(const std::string& path, Eigen::Index m) {
    const io::Table t = io::read_table(path);
    if (t.values.cols() != 1)
        throw std::invalid_argument("weights file must have a single column");
    if (t.values.rows() != m)
        throw std::invalid_argument("weights file has " + std::to_string(t.values.rows()) +
                                    " rows, counts have " + std::to_string(m));
    return BaseMeasure(t.values.col(0));
}

int run_estimate(const std::string& input, const std::string& weights_path,
                 const std::string& lambda_arg, double alpha, const GridFlags& grid,
                 int column, const std::string& output, const std::string& summary) {
    const io::Table t = io::read_table(input);
    Eigen::Index col = 0;
    if (t.values.cols() > 1) {
        if (column < 1)
            throw std::invalid_argument(
                "input has " + std::to_string(t.values.cols()) +
                " columns; select one with --column (1-based)");
        if (column > t.values.cols())
            throw std::invalid_argument("--column out of range");
        col = column - 1;
    } else if (column > 1) {
        throw std::invalid_argument("--column out of range");
    }
    const CountVector k(t.values.col(col));
    std::optional<BaseMeasure> w;
    if (!weights_path.empty()) w = load_weights(weights_path, k.size());

    EstimateOptions options;
    options.alpha = alpha;
    options.grid = grid.build();

    Json summary_json{{"schema_version", kSchemaVersion},
                      {"command", "estimate"},
                      {"input", input},
                      {"m", k.size()},
                      {"n", k.total()},
                      {"zero_cells", k.zero_cells()}};
    summary_json["alpha"] = alpha;

    if (lambda_arg == "auto") {
        const SscompResult r = sscomp(k, w ? &*w : nullptr, options);
        io::write_vector(output, r.p_hat.probs());
        summary_json["lambda"] = Json{{"value", r.trace.chosen_lambda},
                                      {"log10", std::log10(r.trace.chosen_lambda)},
                                      {"source", "cv"}};
        summary_json["fit"] = fit_to_json(r.fit, k);
        summary_json["cv_trace"] = selection_trace_to_json(r.trace);
    } else {
        double lambda = 0.0;
        try {
            lambda = std::stod(lambda_arg);
        } catch (const std::exception&) {
            throw std::invalid_argument("--lambda must be 'auto' or a positive number");
        }
        if (!(lambda > 0.0))
            throw std::invalid_argument("--lambda must be 'auto' or a positive number");
        const BaseMeasure bm = w ? *w : BaseMeasure::uniform(k.size());
        const FitResult fit = solve(k, bm, lambda, options.fit);
        io::write_vector(output, fit.p_hat.probs());
        summary_json["lambda"] = Json{{"value", lambda},
                                      {"log10", std::log10(lambda)},
                                      {"source", "fixed"}};
        summary_json["fit"] = fit_to_json(fit, k);
    }
    if (!summary.empty()) write_json(summary, summary_json);
    return kOk;
}

int run_estimate_matrix(const std::string& input, double alpha, const GridFlags& grid,
                        const std::string& output, const std::string& summary) {
    const io::Table t = io::read_table(input);
    const CountMatrix K(t.values);

    EstimateOptions options;
    options.alpha = alpha;
    options.grid = grid.build();

    const Sscomp2Result r = sscomp2(K, options);
    io::write_matrix(output, r.matrix.probs(), t.delimiter == ' ' ? '\t' : t.delimiter);

    if (!summary.empty()) {
        Json columns = Json::array();
        for (std::size_t x = 0; x < r.columns.size(); ++x) {
            const Sscomp2Column& c = r.columns[x];
            columns.push_back(
                Json{{"column", x},
                     {"n", c.n},
                     {"zero_cells", c.zero_cells},
                     {"lambda", c.result.trace.chosen_lambda},
                     {"log10_lambda", std::log10(c.result.trace.chosen_lambda)},
                     {"kl_prior_to_fit", c.kl_prior_to_fit},
                     {"iterations", c.result.fit.iterations}});
        }
        write_json(summary, Json{{"schema_version", kSchemaVersion},
                                 {"command", "estimate-matrix"},
                                 {"input", input},
                                 {"m", K.rows()},
                                 {"s", K.cols()},
                                 {"alpha", alpha},
                                 {"prior_lambda", r.prior_trace.chosen_lambda},
                                 {"columns", columns}});
    }
    return kOk;
}

int run_simulate(const StudyConfig& config, const std::string& output,
                 const std::string& csv) {
    const StudyReport report = run_study(config);
    write_json(output, study_report_to_json(report));
    if (!csv.empty()) io::write_text_atomic(csv, study_report_to_csv(report));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compost: composition estimation from count data"};
    app.require_subcommand(1);

    // estimate
    std::string est_input, est_weights, est_output, est_summary;
    std::string est_lambda = "auto";
    double est_alpha = 1.4;
    int est_column = 0;
    GridFlags est_grid;
    CLI::App* est = app.add_subcommand("estimate", "Estimate one composition from counts");
    est->add_option("--input", est_input, "Counts file (one column, or pick one with --column)")
        ->required();
    est->add_option("--weights", est_weights, "Base-measure weights file (default uniform)");
    est->add_option("--lambda", est_lambda, "'auto' (cross-validated) or a fixed positive value");
    est->add_option("--alpha", est_alpha, "CV inflation factor (>= 1)");
    est->add_option("--column", est_column, "1-based column to estimate when the input has several");
    est->add_option("--output", est_output, "Output composition file")->required();
    est->add_option("--summary", est_summary, "JSON summary path");
    est_grid.attach(est);

    // estimate-matrix
    std::string mat_input, mat_output, mat_summary;
    double mat_alpha = 1.4;
    GridFlags mat_grid;
    CLI::App* mat = app.add_subcommand(
        "estimate-matrix", "Two-stage estimate for an m x s count matrix");
    mat->add_option("--input", mat_input, "Count matrix file")->required();
    mat->add_option("--alpha", mat_alpha, "CV inflation factor (>= 1)");
    mat->add_option("--output", mat_output, "Output composition matrix file")->required();
    mat->add_option("--summary", mat_summary, "JSON summary path");
    mat_grid.attach(mat);

    // simulate
    StudyConfig sim_config;
    GridFlags sim_grid;
    std::string sim_output, sim_csv;
    CLI::App* sim = app.add_subcommand("simulate", "Run the seeded simulation study");
    sim->add_option("--m", sim_config.m, "Number of cells");
    sim->add_option("--s", sim_config.s, "Number of columns");
    sim->add_option("--N", sim_config.N_total, "Total sample size across columns");
    sim->add_option("--seed", sim_config.seed, "RNG seed");
    sim->add_option("--alpha", sim_config.alpha, "CV inflation factor");
    sim->add_option("--sigma2", sim_config.sigma2_between, "Between-column log-scale variance");
    sim->add_option("--concentration", sim_config.dirichlet_concentration,
                    "Dirichlet concentration of the size split");
    sim->add_option("--output", sim_output, "JSON report path")->required();
    sim->add_option("--csv", sim_csv, "Tidy CSV report path");
    sim_grid.attach(sim);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (est->parsed())
            return run_estimate(est_input, est_weights, est_lambda, est_alpha, est_grid,
                                est_column, est_output, est_summary);
        if (mat->parsed())
            return run_estimate_matrix(mat_input, mat_alpha, mat_grid, mat_output,
                                       mat_summary);
        sim_config.grid = sim_grid.build();
        return run_simulate(sim_config, sim_output, sim_csv);
    } catch (const compost::io::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParse;
    } catch (const compost::ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
}
