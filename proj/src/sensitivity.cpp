#include "robustde/sensitivity.hpp"

#include <cmath>

#include "robustde/errors.hpp"
#include "robustde/stats.hpp"

namespace robustde {

namespace {

double hajek_average(const Eigen::VectorXd& values, const Dataset& d) {
    if (!d.weighted()) {
        return values.sum() / static_cast<double>(values.size());
    }
    return d.weight.cwiseProduct(values).sum() / d.weight.sum();
}

Eigen::VectorXd fit_weights(const Dataset& d) {
    return d.weighted() ? d.weight : Eigen::VectorXd();
}

double interaction_coefficient(const Dataset& d) {
    const DesignSpec spec = DesignSpec::outcome_full(d.p());
    const LinearFit fit =
        fit_ols(build_design(d, spec), d.y, fit_weights(d), spec.term_names());
    return fit.coef[3];
}

void require_binary_focal(const Dataset& d, const char* what) {
    if (!is_binary_focal(d.w)) {
        throw ConfigError(std::string(what) +
                          " requires a binary focal variable");
    }
}

struct FocalModels {
    Eigen::VectorXd marginal;  // P(W=1 | X_i)
    Eigen::VectorXd at_a0;     // P(W=1 | A=0, X_i)
    Eigen::VectorXd at_a1;     // P(W=1 | A=1, X_i)
};

FocalModels fit_focal_models(const Dataset& d) {
    const int p = d.p();
    const DesignSpec marg_spec = DesignSpec::covariates_only(p);
    const DesignSpec med_spec = DesignSpec::mediator_given_a(p);
    const Eigen::VectorXd w = fit_weights(d);
    const LogisticFit marg = fit_logistic(build_design(d, marg_spec), d.w, w,
                                          marg_spec.term_names());
    const LogisticFit med = fit_logistic(build_design(d, med_spec), d.w, w,
                                         med_spec.term_names());
    FocalModels models;
    models.marginal = predict_prob(build_design(d, marg_spec), marg.coef);
    models.at_a0 = predict_prob(build_design_at(d, med_spec, 0.0), med.coef);
    models.at_a1 = predict_prob(build_design_at(d, med_spec, 1.0), med.coef);
    return models;
}

Eigen::VectorXd exposure_probability(const Dataset& d) {
    const DesignSpec spec = DesignSpec::covariates_only(d.p());
    const LogisticFit fit = fit_logistic(build_design(d, spec), d.a,
                                         fit_weights(d), spec.term_names());
    return predict_prob(build_design(d, spec), fit.coef);
}

}  // namespace

double gap_binary(const Dataset& d) {
    d.validate();
    require_binary_focal(d, "gap_binary");
    const double gamma = interaction_coefficient(d);
    const FocalModels models = fit_focal_models(d);
    const Eigen::VectorXd diff = models.marginal - models.at_a0;
    return gamma * hajek_average(diff, d);
}

double gap_conditional(const Dataset& d) {
    d.validate();
    require_binary_focal(d, "gap_conditional");
    const double gamma = interaction_coefficient(d);
    const FocalModels models = fit_focal_models(d);
    const Eigen::VectorXd pi = exposure_probability(d);
    const Eigen::VectorXd contrib =
        pi.cwiseProduct(models.at_a1 - models.at_a0);
    return gamma * hajek_average(contrib, d);
}

double tv_binary(const Dataset& d) {
    d.validate();
    require_binary_focal(d, "tv_binary");
    const FocalModels models = fit_focal_models(d);
    const Eigen::VectorXd tv = (models.marginal - models.at_a0).cwiseAbs();
    return hajek_average(tv, d);
}

double tv_linear_gaussian(const Dataset& d) {
    d.validate();
    const DesignSpec med_spec = DesignSpec::mediator_given_a(d.p());
    const LinearFit med = fit_ols(build_design(d, med_spec), d.w,
                                  fit_weights(d), med_spec.term_names());
    const double shift = std::abs(med.coef[1]);
    const double sigma = std::sqrt(med.resid_var);
    if (!(sigma > 0.0)) {
        throw NumericError("tv_linear_gaussian: mediator model has zero "
                           "residual variance");
    }
    const double tv_given_exposed = 2.0 * normal_cdf(shift / (2.0 * sigma)) - 1.0;
    const Eigen::VectorXd pi = exposure_probability(d);
    return tv_given_exposed * hajek_average(pi, d);
}

std::pair<double, double> bound(double psi_hat, double gamma, double e_tv) {
    if (!(gamma >= 0.0)) {
        throw ConfigError("bound: gamma must be nonnegative");
    }
    if (!(e_tv >= 0.0)) {
        throw ConfigError("bound: average TV must be nonnegative");
    }
    const double half_width = gamma * e_tv;
    return {psi_hat - half_width, psi_hat + half_width};
}

SensitivityReport sensitivity_report(const Dataset& d,
                                     const SensitivityOptions& opts) {
    d.validate();
    SensitivityReport report;
    report.psi = estimate_psi(d, opts.estimate);
    if (opts.gamma) {
        if (!(*opts.gamma >= 0.0)) {
            throw ConfigError("gamma must be nonnegative");
        }
        report.gamma = *opts.gamma;
        report.gamma_supplied = true;
    } else {
        report.gamma = std::abs(interaction_coefficient(d));
    }
    if (is_binary_focal(d.w)) {
        report.e_tv = tv_binary(d);
        report.gap = gap_binary(d);
    } else {
        if (!opts.gamma) {
            throw ConfigError(
                "sensitivity with a continuous focal variable needs an "
                "explicit gamma");
        }
        report.e_tv = tv_linear_gaussian(d);
    }
    const auto interval = bound(report.psi.point, report.gamma, report.e_tv);
    report.lo = interval.first;
    report.hi = interval.second;
    return report;
}

}  // namespace robustde
