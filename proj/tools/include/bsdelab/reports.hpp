#pragma once

#include <string>

#include <json.hpp>

#include "bsde/diagnostics.hpp"
#include "bsde/harness.hpp"
#include "bsde/infconv.hpp"

namespace bsdelab {

/// Shortest-roundtrip decimal of a double; stable across thread counts.
std::string format_double(double v);

void ensure_directory(const std::string& dir);
void write_text_file(const std::string& path, const std::string& text);

nlohmann::json norm_to_json(const bsde::NormEstimate& est);
nlohmann::json residual_to_json(const bsde::ResidualReport& report);
nlohmann::json apriori_to_json(const bsde::AprioriReport& report);
nlohmann::json delta_to_json(const bsde::DeltaReport& report);
nlohmann::json lemma31_to_json(const bsde::Lemma31Report& report);

/// solution.csv: m,i,t_i,Y,Z_1..Z_d
void write_solution_csv(const std::string& path, const bsde::SolutionEstimate& sol);
/// norms.csv: n,y0_mean,y0_spread,sp_norm,sp_se,hp_norm,hp_se,picard_max_iters,picard_mean_iters
void write_norms_csv(const std::string& path, const std::vector<bsde::PerIndexSummary>& rows);
/// residuals.csv: n,mean,q50,q90,q99,max
void write_residuals_csv(const std::string& path, const std::vector<bsde::PerIndexSummary>& rows);
/// cauchy.csv: n_low,n_high,sp_dist,sp_se,hp_dist,hp_se
void write_cauchy_csv(const std::string& path, const bsde::CauchyTable& table);
/// monotone.csv: comparison,frac_violation,worst_violation,worst_path,worst_step
void write_monotone_csv(const std::string& path, const std::vector<bsde::MonotoneStat>& stats);
/// envelope.csv: y,f,f_n,tol
struct EnvelopeRow {
    double y, f, f_n, tol;
};
void write_envelope_csv(const std::string& path, const std::vector<EnvelopeRow>& rows);

} // namespace bsdelab
