#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robustde/crossfit.hpp"
#include "robustde/dataset.hpp"
#include "robustde/glm.hpp"

namespace robustde {

struct EstimateOptions {
    int K = 5;
    std::uint64_t seed = 0;
    ClipBounds clip{};
    double alpha = 0.05;
    // Working-model override; defaults to NuisanceSpec::standard(p).
    std::optional<NuisanceSpec> nuisance;
};

struct EstimateResult {
    std::string estimand;
    double point = 0.0;
    std::optional<double> se;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
    std::size_t n = 0;
    int K = 0;
    std::uint64_t seed = 0;
    ClipBounds clip{};
    double alpha = 0.05;
    std::vector<std::string> warnings;
};

// Cross-fitted doubly robust one-step estimate of the direct effect, with the
// influence-based standard error and a Wald interval. K = 1 requests the
// full-sample plug-in mode (fit and score on the same rows); K >= 2 uses
// honest training complements.
EstimateResult estimate_psi(const Dataset& d, const EstimateOptions& opts);

// Mediation-formula comparator: interacted outcome regression combined with a
// mediator model given (A, X) (logistic for binary focal variables, linear
// otherwise), averaging predictions at A = 0 over the sample. No standard
// error is attached; intervals come from the bootstrap. Sampling weights,
// when present, enter the fits and the average.
EstimateResult estimate_lambda(const Dataset& d, const EstimateOptions& opts);

double wald_p(double point, double se);

struct UnionTestResult {
    double p_psi = 1.0;
    double p_lambda = 1.0;
    double p_max = 1.0;
    bool reject = false;
    double alpha = 0.05;
};

// Intersection-union combination: reject only when both component p-values
// fall below alpha (equivalently p_max < alpha, strictly).
UnionTestResult union_test(double p_psi, double p_lambda, double alpha);

// Percentile-inversion bootstrap p-value for the comparator under iid
// resampling: p = 2 * min(frac(lambda* <= 0), frac(lambda* >= 0)), clamped to
// [0, 1]. Replicates whose resample has a single exposure or focal class are
// skipped; more than 5% skipped aborts.
double comparator_bootstrap_p(const Dataset& d, int B, std::uint64_t seed,
                              const EstimateOptions& opts);

}  // namespace robustde
