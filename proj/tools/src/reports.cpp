#include "bsdelab/reports.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "bsde/errors.hpp"

namespace bsdelab {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw bsde::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bsde::ConfigError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw bsde::ConfigError("failed writing '" + path + "'");
}

json norm_to_json(const bsde::NormEstimate& est) {
    return json{{"value", est.value},
                {"std_error", est.std_error},
                {"p", est.p},
                {"paths", est.paths},
                {"heavy_tail_warning", est.heavy_tail_warning}};
}

json residual_to_json(const bsde::ResidualReport& report) {
    return json{{"mean", report.mean}, {"q50", report.q50},   {"q90", report.q90},
                {"q99", report.q99},   {"max", report.max}};
}

json apriori_to_json(const bsde::AprioriReport& report) {
    return json{{"ratio_y", report.ratio_y}, {"ratio_z", report.ratio_z},
                {"lhs_y", report.lhs_y},     {"rhs_y", report.rhs_y},
                {"lhs_z", report.lhs_z},     {"rhs_z", report.rhs_z},
                {"c_used", report.c_used},   {"pass", report.pass}};
}

json delta_to_json(const bsde::DeltaReport& report) {
    return json{{"sp_dist", norm_to_json(report.sp_dist)},
                {"hp_dist", norm_to_json(report.hp_dist)},
                {"delta_terminal_pth_moment", report.delta_terminal_pth_moment},
                {"gap_term_y", report.gap_term_y},
                {"gap_term_z", report.gap_term_z},
                {"ratio_i_y", report.ratio_i_y},
                {"ratio_i_z", report.ratio_i_z},
                {"ratio_ii_y", report.ratio_ii_y},
                {"ratio_ii_z", report.ratio_ii_z},
                {"c_used", report.c_used},
                {"pass", report.pass}};
}

json lemma31_to_json(const bsde::Lemma31Report& report) {
    auto item = [](const bsde::Lemma31Item& it) {
        return json{{"pass", it.pass}, {"violations", it.violations}, {"worst_margin", it.worst_margin}};
    };
    json rows = json::array();
    for (const bsde::ConvergenceRow& row : report.convergence)
        rows.push_back(json{{"n", row.index},
                            {"delta", row.delta},
                            {"mean_gap", row.mean_gap},
                            {"max_gap", row.max_gap}});
    return json{{"bound", item(report.bound)},
                {"monotone", item(report.monotone)},
                {"lipschitz", item(report.lipschitz)},
                {"convergence", rows},
                {"convergence_pass", report.convergence_pass},
                {"all_pass", report.all_pass()}};
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bsde::ConfigError("cannot open '" + path + "' for writing");
    return out;
}

std::string index_label(double n) {
    if (std::isinf(n)) return "U";
    return format_double(n);
}

} // namespace

void write_solution_csv(const std::string& path, const bsde::SolutionEstimate& sol) {
    std::ofstream out = open_csv(path);
    out << "m,i,t_i,Y";
    for (std::size_t k = 1; k <= sol.dimension; ++k) out << ",Z_" << k;
    out << "\n";
    const std::size_t n = sol.grid.steps;
    for (std::size_t m = 0; m < sol.paths; ++m) {
        for (std::size_t i = 0; i <= n; ++i) {
            out << m << ',' << i << ',' << format_double(sol.grid.node(i)) << ','
                << format_double(sol.y_at(m, i));
            for (std::size_t k = 0; k < sol.dimension; ++k)
                out << ',' << format_double(i < n ? sol.z_at(m, i)[k] : 0.0);
            out << "\n";
        }
    }
}

void write_norms_csv(const std::string& path, const std::vector<bsde::PerIndexSummary>& rows) {
    std::ofstream out = open_csv(path);
    out << "n,y0_mean,y0_spread,sp_norm,sp_se,hp_norm,hp_se,picard_max_iters,picard_mean_iters\n";
    for (const bsde::PerIndexSummary& row : rows)
        out << index_label(row.index) << ',' << format_double(row.y0_mean) << ','
            << format_double(row.y0_spread) << ',' << format_double(row.sp.value) << ','
            << format_double(row.sp.std_error) << ',' << format_double(row.hp.value) << ','
            << format_double(row.hp.std_error) << ',' << row.picard_max_iterations << ','
            << format_double(row.picard_mean_iterations) << "\n";
}

void write_residuals_csv(const std::string& path, const std::vector<bsde::PerIndexSummary>& rows) {
    std::ofstream out = open_csv(path);
    out << "n,mean,q50,q90,q99,max\n";
    for (const bsde::PerIndexSummary& row : rows)
        out << index_label(row.index) << ',' << format_double(row.residual.mean) << ','
            << format_double(row.residual.q50) << ',' << format_double(row.residual.q90) << ','
            << format_double(row.residual.q99) << ',' << format_double(row.residual.max) << "\n";
}

void write_cauchy_csv(const std::string& path, const bsde::CauchyTable& table) {
    std::ofstream out = open_csv(path);
    out << "n_low,n_high,sp_dist,sp_se,hp_dist,hp_se\n";
    for (const bsde::CauchyRow& row : table.rows)
        out << format_double(row.index_low) << ',' << format_double(row.index_high) << ','
            << format_double(row.sp_dist) << ',' << format_double(row.sp_se) << ','
            << format_double(row.hp_dist) << ',' << format_double(row.hp_se) << "\n";
}

void write_monotone_csv(const std::string& path, const std::vector<bsde::MonotoneStat>& stats) {
    std::ofstream out = open_csv(path);
    out << "comparison,frac_violation,worst_violation,worst_path,worst_step\n";
    for (const bsde::MonotoneStat& stat : stats)
        out << stat.label << ',' << format_double(stat.violation_fraction) << ','
            << format_double(stat.worst_violation) << ',' << stat.worst_path << ','
            << stat.worst_step << "\n";
}

void write_envelope_csv(const std::string& path, const std::vector<EnvelopeRow>& rows) {
    std::ofstream out = open_csv(path);
    out << "y,f,f_n,tol\n";
    for (const EnvelopeRow& row : rows)
        out << format_double(row.y) << ',' << format_double(row.f) << ','
            << format_double(row.f_n) << ',' << format_double(row.tol) << "\n";
}

} // namespace bsdelab
