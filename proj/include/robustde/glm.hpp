#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "robustde/dataset.hpp"

namespace robustde {

struct ClipBounds {
    double lo = 0.01;
    double hi = 0.99;
    void validate() const;
};

double clip_prob(double p, const ClipBounds& b);

// Terms of a working model, in the fixed order: intercept, A, W, A:W,
// then the selected covariate columns.
struct DesignSpec {
    bool include_a = false;
    bool include_w = false;
    bool include_aw = false;
    std::vector<int> x_cols;

    int width() const;
    std::vector<std::string> term_names() const;
    void validate(int p) const;

    static DesignSpec outcome_full(int p);      // 1 + A + W + A:W + X
    static DesignSpec outcome_additive(int p);  // 1 + A + W + X
    static DesignSpec exposure_given_w(int p);  // 1 + W + X
    static DesignSpec exposure_marginal(int p); // 1 + X
    static DesignSpec mediator_given_a(int p);  // 1 + A + X
    static DesignSpec covariates_only(int p);   // 1 + X
};

// Working models used by the cross-fitted estimator. The outcome model is
// linear in its terms; the exposure model is logistic.
struct NuisanceSpec {
    DesignSpec outcome;
    DesignSpec exposure;
    static NuisanceSpec standard(int p);
};

Eigen::MatrixXd build_design(const Dataset& d, const DesignSpec& spec);
// Same, with the exposure column forced to `a_value` (for counterfactual
// outcome predictions).
Eigen::MatrixXd build_design_at(const Dataset& d, const DesignSpec& spec,
                                double a_value);

struct LinearFit {
    Eigen::VectorXd coef;
    double resid_var = 0.0;       // weighted SSR / (n - k)
    Eigen::MatrixXd coef_cov;     // resid_var * (X'WX)^{-1}
};

struct LogisticFit {
    Eigen::VectorXd coef;
    bool converged = false;
    bool separation = false;
    int iterations = 0;
};

// Weighted least squares through a column-pivoted QR. A rank deficiency at
// relative tolerance 1e-10 raises NumericError naming the collinear term.
LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& w = Eigen::VectorXd(),
                  const std::vector<std::string>& term_names = {});

// Weighted IRLS with deviance step-halving; converges when the largest score
// component falls below `tol`, then takes one extra guarded Newton step to
// polish the root. A coefficient walking past 1e3 in absolute value without
// convergence is flagged as separation.
LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& t,
                         const Eigen::VectorXd& w = Eigen::VectorXd(),
                         const std::vector<std::string>& term_names = {},
                         int max_iter = 100, double tol = 1e-8);

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& coef);
Eigen::VectorXd predict_prob(const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& coef);

}  // namespace robustde
