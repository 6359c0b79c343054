#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "robustde/dataset.hpp"
#include "robustde/estimator.hpp"

namespace robustde {

// Three data-generating processes over X ~ N(0,1) with unit Gaussian noise:
//   case 1: W depends on X only, A depends on (W, X)   [confounder reading]
//   case 2: A depends on X, W depends on (A, X), additive outcome
//   case 3: like case 2 with an A*W outcome interaction
// The outcome is intercept + a_coef*A + w_coef*W + aw_coef*A*W + x_coef*X + e.
struct DgpSpec {
    int case_id = 1;
    double intercept = 0.5;
    double a_coef = 0.8;
    double w_coef = 0.9;
    double aw_coef = 1.0;
    double x_coef = 0.4;
    // Degenerate-covariate diagnostic: every row uses this X and no X draw
    // is consumed from the stream.
    std::optional<double> fixed_x;

    static DgpSpec standard(int case_id);
    // a_coef = aw_coef = 0: both estimands are zero (union-test size checks).
    static DgpSpec null_effect(int case_id);
    void validate() const;
};

// Draw order per row: X, then (W, A) for case 1 or (A, W) for cases 2 and 3,
// then the outcome noise. One uniform per variate.
Dataset draw(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

struct TruthPair {
    double psi = 0.0;
    double lambda = 0.0;
    std::string method;  // "quadrature" or "closed-form"
};

// Population values of both estimands under the given generating process,
// via adaptive Gauss-Hermite quadrature over X (closed form when no
// interaction).
TruthPair truth(const DgpSpec& spec);

struct StudyConfig {
    std::vector<int> cases{1, 2, 3};
    std::vector<std::size_t> sample_sizes{500, 2000};
    int reps = 500;
    int K = 5;
    std::uint64_t seed = 0;
    ClipBounds clip{};
    double alpha = 0.05;
    std::optional<NuisanceSpec> nuisance;  // misspecification arms
    bool comparator = true;
    double max_failure_rate = 0.01;
    int threads = 1;  // 0 = hardware count
};

struct SimSummary {
    int case_id = 0;
    std::size_t n = 0;
    int reps = 0;
    double psi_true = 0.0;
    double lambda_true = 0.0;
    double mean_psi = 0.0;
    double bias_psi = 0.0;
    double rmse_psi = 0.0;
    double coverage95 = 0.0;
    double mc_sd_psi = 0.0;
    double mean_se_psi = 0.0;
    double mean_lambda = 0.0;
    double lambda_bias_to_psi = 0.0;
    double mc_sd_lambda = 0.0;
    int failures = 0;
};

struct ReplicateRecord {
    int case_id = 0;
    std::size_t n = 0;
    std::string method;  // "onestep" or "comparator"
    int rep = 0;
    double estimate = 0.0;
};

// One row per (case, n) cell. Per-replicate seeds chain off the master seed
// through (case, n, replicate), so any cell can be reproduced in isolation.
// Errors inside a replicate count as failures; a cell whose failure rate
// exceeds the configured maximum aborts the study.
std::vector<SimSummary> run_study(const StudyConfig& cfg,
                                  std::vector<ReplicateRecord>* records = nullptr);

void write_study_summary(const std::vector<SimSummary>& rows, std::ostream& out);
void write_replicate_records(const std::vector<ReplicateRecord>& rows,
                             std::ostream& out);
void write_reference_lines(const std::vector<SimSummary>& rows,
                           std::ostream& out);

}  // namespace robustde
