#include "compost/reporting.hpp"

#include <cmath>

#include "compost/io.hpp"

namespace compost {

namespace {

Json five_number_to_json(const FiveNumber& f) {
    return Json{{"min", f.min}, {"q1", f.q1}, {"median", f.median},
                {"q3", f.q3},   {"max", f.max}};
}

Json scheme_to_json(const SchemeReport& s) {
    Json columns = Json::array();
    for (const ColumnOutcome& c : s.columns) {
        columns.push_back(Json{{"column", c.column},
                               {"n", c.n},
                               {"l_oracle", c.l_oracle},
                               {"l_cv", c.l_cv},
                               {"lambda_oracle", c.lambda_oracle},
                               {"log10_lambda_oracle", std::log10(c.lambda_oracle)},
                               {"lambda_cv", c.lambda_cv},
                               {"log10_lambda_cv", std::log10(c.lambda_cv)},
                               {"efficacy", c.efficacy}});
    }
    return Json{{"scheme", s.scheme},
                {"oracle_loss", five_number_to_json(s.oracle_loss)},
                {"cv_loss", five_number_to_json(s.cv_loss)},
                {"efficacy", five_number_to_json(s.efficacy)},
                {"cv_failures", s.cv_failures},
                {"columns", columns}};
}

}  // namespace

Json selection_trace_to_json(const SelectionTrace& trace) {
    Json points = Json::array();
    for (const SelectionPoint& p : trace.points) {
        Json j{{"lambda", p.lambda},
               {"log10_lambda", p.log10_lambda},
               {"converged", p.converged}};
        if (p.converged) {
            j["score"] = p.score;
            j["iterations"] = p.iterations;
            j["final_gradient_norm"] = p.final_gradient_norm;
        } else {
            j["score"] = nullptr;
        }
        points.push_back(std::move(j));
    }
    return Json{{"chosen_lambda", trace.chosen_lambda},
                {"chosen_log10_lambda", std::log10(trace.chosen_lambda)},
                {"chosen_index", trace.chosen_index},
                {"points", points}};
}

Json study_report_to_json(const StudyReport& report) {
    Json sizes = Json::array();
    for (long long n : report.sizes) sizes.push_back(n);
    return Json{
        {"schema_version", kSchemaVersion},
        {"config",
         Json{{"m", report.config.m},
              {"s", report.config.s},
              {"N_total", report.config.N_total},
              {"seed", report.config.seed},
              {"sigma2_between", report.config.sigma2_between},
              {"dirichlet_concentration", report.config.dirichlet_concentration},
              {"alpha", report.config.alpha},
              {"grid_log10_max", report.config.grid.log10_values.front()},
              {"grid_log10_min", report.config.grid.log10_values.back()},
              {"grid_size", report.config.grid.size()}}},
        {"cv_failure_rule", "l_cv > 2 * l_oracle"},
        {"sizes", sizes},
        {"prior_lambda", report.prior_lambda},
        {"schemes", Json::array({scheme_to_json(report.uniform),
                                 scheme_to_json(report.prior)})}};
}

Json rate_report_to_json(const RateReport& report) {
    Json records = Json::array();
    for (const RateRecord& r : report.records) {
        records.push_back(Json{{"n", r.n},
                               {"lambda", r.lambda},
                               {"mc_mean", r.mc_mean},
                               {"mc_stderr", r.mc_stderr},
                               {"analytic_mean", r.analytic_mean},
                               {"bias_exact", r.bias_exact},
                               {"variance_exact", r.variance_exact},
                               {"bias_bound", r.bias_bound},
                               {"variance_bound", r.variance_bound},
                               {"bound", r.bound},
                               {"ratio_mc_over_bound", r.ratio_mc_over_bound}});
    }
    Json rho = Json::array();
    for (Eigen::Index i = 0; i < report.rho.size(); ++i) rho.push_back(report.rho[i]);
    return Json{{"schema_version", kSchemaVersion},
                {"records", records},
                {"rho", rho},
                {"rho_sum", report.rho_sum},
                {"eta0_norm_sq", report.eta0_norm_sq}};
}

std::string study_report_to_csv(const StudyReport& report) {
    std::string out = "column,n,scheme,selector,lambda,log10_lambda,kl_loss\n";
    const auto emit = [&out](const SchemeReport& s) {
        for (const ColumnOutcome& c : s.columns) {
            out += std::to_string(c.column) + "," + std::to_string(c.n) + "," +
                   s.scheme + ",oracle," + io::format_full(c.lambda_oracle) + "," +
                   io::format_full(std::log10(c.lambda_oracle)) + "," +
                   io::format_full(c.l_oracle) + "\n";
            out += std::to_string(c.column) + "," + std::to_string(c.n) + "," +
                   s.scheme + ",cv," + io::format_full(c.lambda_cv) + "," +
                   io::format_full(std::log10(c.lambda_cv)) + "," +
                   io::format_full(c.l_cv) + "\n";
        }
    };
    emit(report.uniform);
    emit(report.prior);
    return out;
}

}  // namespace compost
