#include "robustde/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "robustde/errors.hpp"
#include "robustde/rng.hpp"
#include "robustde/stats.hpp"

namespace robustde {

namespace {

void require_both_exposure_classes(const Dataset& d) {
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < d.n(); ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        if (d.weighted() && !(d.weight[r] > 0.0)) continue;
        (d.a[r] == 1.0 ? has1 : has0) = true;
    }
    if (!has0 || !has1) {
        throw DataError("sample contains a single exposure class");
    }
}

double hajek_average(const Eigen::VectorXd& values, const Dataset& d) {
    if (!d.weighted()) {
        return values.sum() / static_cast<double>(values.size());
    }
    const double total = d.weight.sum();
    return d.weight.cwiseProduct(values).sum() / total;
}

}  // namespace

EstimateResult estimate_psi(const Dataset& d, const EstimateOptions& opts) {
    d.validate();
    opts.clip.validate();
    if (d.weighted()) {
        throw ConfigError(
            "estimate_psi expects unweighted data; use the survey routine for "
            "weighted samples");
    }
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0,1)");
    }
    const std::size_t n = d.n();
    if (n < 2) {
        throw DataError("estimate_psi needs at least two rows");
    }
    if (opts.K < 1) {
        throw ConfigError("K must be at least 1");
    }
    require_both_exposure_classes(d);

    const NuisanceSpec spec =
        opts.nuisance ? *opts.nuisance : NuisanceSpec::standard(d.p());
    const FoldAssignment folds =
        opts.K == 1 ? single_fold(n) : assign_folds(n, opts.K, opts.seed);
    const NuisanceFit fits = fit_nuisances(d, folds, spec);
    const ScoreVector sv = score(d, folds, fits, spec, opts.clip);

    EstimateResult res;
    res.estimand = "psi";
    res.point = sv.phi.sum() / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < sv.phi.size(); ++i) {
        const double dphi = sv.phi[i] - res.point;
        ss += dphi * dphi;
    }
    const double se =
        std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
    const double z = inverse_normal_cdf(1.0 - opts.alpha / 2.0);
    res.se = se;
    res.ci_lo = res.point - z * se;
    res.ci_hi = res.point + z * se;
    res.n = n;
    res.K = opts.K;
    res.seed = opts.seed;
    res.clip = opts.clip;
    res.alpha = opts.alpha;
    res.warnings = fits.warnings;
    return res;
}

EstimateResult estimate_lambda(const Dataset& d, const EstimateOptions& opts) {
    d.validate();
    require_both_exposure_classes(d);
    const int p = d.p();

    const DesignSpec outcome_spec = DesignSpec::outcome_full(p);
    const DesignSpec mediator_spec = DesignSpec::mediator_given_a(p);
    Eigen::VectorXd weights;
    if (d.weighted()) {
        weights = d.weight;
    }

    const LinearFit outcome =
        fit_ols(build_design(d, outcome_spec), d.y, weights,
                outcome_spec.term_names());
    const double beta_a = outcome.coef[1];
    const double beta_aw = outcome.coef[3];

    // Mediator predictions at A = 0 for every observed covariate row.
    const Eigen::MatrixXd M0 = build_design_at(d, mediator_spec, 0.0);
    Eigen::VectorXd m0;
    if (is_binary_focal(d.w)) {
        const LogisticFit mediator =
            fit_logistic(build_design(d, mediator_spec), d.w, weights,
                         mediator_spec.term_names());
        m0 = predict_prob(M0, mediator.coef);
    } else {
        const LinearFit mediator =
            fit_ols(build_design(d, mediator_spec), d.w, weights,
                    mediator_spec.term_names());
        m0 = linear_predictor(M0, mediator.coef);
    }

    Eigen::VectorXd per_row(m0.size());
    for (Eigen::Index i = 0; i < m0.size(); ++i) {
        per_row[i] = beta_a + beta_aw * m0[i];
    }

    EstimateResult res;
    res.estimand = "lambda";
    res.point = hajek_average(per_row, d);
    res.n = d.n();
    res.K = opts.K;
    res.seed = opts.seed;
    res.clip = opts.clip;
    res.alpha = opts.alpha;
    return res;
}

double wald_p(double point, double se) {
    if (se < 0.0 || !std::isfinite(se)) {
        throw ConfigError("wald_p: standard error must be finite and >= 0");
    }
    if (se == 0.0) {
        return point == 0.0 ? 1.0 : 0.0;
    }
    return two_sided_p(point / se);
}

UnionTestResult union_test(double p_psi, double p_lambda, double alpha) {
    auto check01 = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ConfigError(std::string(what) + " must lie in [0,1]");
        }
    };
    check01(p_psi, "p_psi");
    check01(p_lambda, "p_lambda");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0,1)");
    }
    UnionTestResult res;
    res.p_psi = p_psi;
    res.p_lambda = p_lambda;
    res.p_max = std::max(p_psi, p_lambda);
    res.alpha = alpha;
    res.reject = res.p_max < alpha;
    return res;
}

double comparator_bootstrap_p(const Dataset& d, int B, std::uint64_t seed,
                              const EstimateOptions& opts) {
    d.validate();
    if (B < 1) {
        throw ConfigError("bootstrap replicate count must be positive");
    }
    const std::size_t n = d.n();
    Rng rng(seed);
    int kept = 0, at_or_below = 0, at_or_above = 0, skipped = 0;
    for (int b = 0; b < B; ++b) {
        Dataset rep;
        rep.x.resize(n, d.p());
        rep.a.resize(n);
        rep.w.resize(n);
        rep.y.resize(n);
        if (d.weighted()) rep.weight.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Index src = static_cast<Eigen::Index>(rng.below(n));
            const Eigen::Index dst = static_cast<Eigen::Index>(i);
            rep.x.row(dst) = d.x.row(src);
            rep.a[dst] = d.a[src];
            rep.w[dst] = d.w[src];
            rep.y[dst] = d.y[src];
            if (d.weighted()) rep.weight[dst] = d.weight[src];
        }
        const bool degenerate_a =
            (rep.a.array() == 0.0).all() || (rep.a.array() == 1.0).all();
        const bool degenerate_w = (rep.w.array() == rep.w[0]).all();
        if (degenerate_a || degenerate_w) {
            ++skipped;
            continue;
        }
        double lam;
        try {
            lam = estimate_lambda(rep, opts).point;
        } catch (const NumericError&) {
            ++skipped;
            continue;
        } catch (const DataError&) {
            ++skipped;
            continue;
        }
        ++kept;
        if (lam <= 0.0) ++at_or_below;
        if (lam >= 0.0) ++at_or_above;
    }
    if (skipped > 0.05 * B) {
        throw NumericError("comparator bootstrap: more than 5% of replicates "
                           "were degenerate");
    }
    if (kept == 0) {
        throw NumericError("comparator bootstrap: no usable replicates");
    }
    const double p = 2.0 * std::min(at_or_below, at_or_above) /
                     static_cast<double>(kept);
    return std::min(1.0, std::max(0.0, p));
}

}  // namespace robustde
