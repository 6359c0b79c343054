#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "robustde/dataset.hpp"
#include "robustde/estimator.hpp"

namespace robustde {

// Combined-cycle analysis weight: two thirds of the two-year weight.
double six_year_weight(double two_year_weight);

double hajek_mean(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

struct WeightedPsiResult {
    EstimateResult estimate;
    // Strata with a single PSU contribute zero variance; their count is
    // surfaced so callers can warn.
    int lonely_psu_strata = 0;
};

// Survey version of the one-step estimator: sampling weights enter every
// nuisance fit and the final average is weight-normalized. The standard
// error comes from Taylor linearization over first-stage PSU totals within
// strata (with-replacement approximation).
WeightedPsiResult estimate_psi_weighted(const Dataset& d,
                                        const EstimateOptions& opts);

enum class BootTarget { psi, lambda, difference };

std::string target_name(BootTarget t);

struct BootstrapOptions {
    int B = 500;
    std::uint64_t seed = 0;
    EstimateOptions estimate;
    std::vector<BootTarget> targets{BootTarget::psi, BootTarget::lambda,
                                    BootTarget::difference};
    double max_skip_rate = 0.05;
    int threads = 1;  // 0 = hardware count
};

struct TargetSummary {
    BootTarget target = BootTarget::psi;
    double point = 0.0;
    std::vector<double> replicates;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct BootstrapResult {
    std::vector<TargetSummary> targets;
    int B = 0;
    int skipped = 0;
    std::uint64_t seed = 0;
};

// Stratified PSU bootstrap: each replicate resamples m_h PSUs with
// replacement within stratum h and multiplies the sampling weights by the
// draw counts. Every nuisance model is refit per replicate with a freshly
// drawn fold partition (seeded from the replicate index, so runs stay
// byte-reproducible). The difference target reuses the same replicate draws
// as its components. Replicates whose positive-weight rows lose an exposure
// or focal class are skipped; exceeding max_skip_rate aborts.
BootstrapResult psu_bootstrap(const Dataset& d, const BootstrapOptions& opts);

// Percentile interval from the ceil(alpha/2 * B)-th and
// ceil((1 - alpha/2) * B)-th order statistics (1-based).
std::pair<double, double> percentile_interval(std::vector<double> replicates,
                                              double alpha);

}  // namespace robustde
