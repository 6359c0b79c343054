#pragma once

#include <optional>
#include <utility>

#include "robustde/dataset.hpp"
#include "robustde/estimator.hpp"

namespace robustde {

// Plug-in estimate of the identification gap for a binary focal variable:
// the A:W outcome coefficient times the average difference between the
// marginal focal probability P(W=1|X) and the mediator-model probability
// P(W=1|A=0,X).
double gap_binary(const Dataset& d);

// Same quantity through the conditional decomposition
// pi(x) * gamma * {P(W=1|A=1,x) - P(W=1|A=0,x)}; agrees with the
// mixture-implied marginal route up to floating-point noise.
double gap_conditional(const Dataset& d);

// Average total-variation distance E[|P(W=1|X) - P(W=1|A=0,X)|] under the
// fitted binary working models.
double tv_binary(const Dataset& d);

// Model-based TV average for a continuous focal variable: under the linear
// Gaussian mediator model the conditional TV is
// pi(x) * (2 Phi(|gamma_A| / (2 sigma)) - 1).
double tv_linear_gaussian(const Dataset& d);

// Bound interval psi_hat +/- gamma * e_tv.
std::pair<double, double> bound(double psi_hat, double gamma, double e_tv);

struct SensitivityOptions {
    std::optional<double> gamma;  // default: |A:W| coefficient of the outcome fit
    EstimateOptions estimate;
};

struct SensitivityReport {
    EstimateResult psi;
    double gamma = 0.0;
    bool gamma_supplied = false;
    double e_tv = 0.0;
    std::optional<double> gap;  // only for binary focal variables
    double lo = 0.0;
    double hi = 0.0;
};

SensitivityReport sensitivity_report(const Dataset& d,
                                     const SensitivityOptions& opts);

}  // namespace robustde
