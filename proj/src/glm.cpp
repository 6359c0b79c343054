#include "robustde/glm.hpp"

#include <algorithm>
#include <cmath>

#include "robustde/errors.hpp"
#include "robustde/stats.hpp"

namespace robustde {

void ClipBounds::validate() const {
    if (!(0.0 < lo && lo < hi && hi < 1.0)) {
        throw ConfigError("clip bounds must satisfy 0 < lo < hi < 1");
    }
}

double clip_prob(double p, const ClipBounds& b) {
    return std::min(std::max(p, b.lo), b.hi);
}

int DesignSpec::width() const {
    return 1 + (include_a ? 1 : 0) + (include_w ? 1 : 0) +
           (include_aw ? 1 : 0) + static_cast<int>(x_cols.size());
}

std::vector<std::string> DesignSpec::term_names() const {
    std::vector<std::string> names{"(intercept)"};
    if (include_a) names.push_back("A");
    if (include_w) names.push_back("W");
    if (include_aw) names.push_back("A:W");
    for (int j : x_cols) names.push_back("x" + std::to_string(j));
    return names;
}

void DesignSpec::validate(int p) const {
    if (include_aw && !(include_a && include_w)) {
        throw ConfigError("interaction term requires both main effects");
    }
    for (int j : x_cols) {
        if (j < 0 || j >= p) {
            throw ConfigError("covariate index " + std::to_string(j) +
                              " out of range for " + std::to_string(p) +
                              " columns");
        }
    }
}

namespace {

std::vector<int> all_cols(int p) {
    std::vector<int> idx(p);
    for (int j = 0; j < p; ++j) idx[j] = j;
    return idx;
}

}  // namespace

DesignSpec DesignSpec::outcome_full(int p) {
    DesignSpec s;
    s.include_a = s.include_w = s.include_aw = true;
    s.x_cols = all_cols(p);
    return s;
}

DesignSpec DesignSpec::outcome_additive(int p) {
    DesignSpec s;
    s.include_a = s.include_w = true;
    s.x_cols = all_cols(p);
    return s;
}

DesignSpec DesignSpec::exposure_given_w(int p) {
    DesignSpec s;
    s.include_w = true;
    s.x_cols = all_cols(p);
    return s;
}

DesignSpec DesignSpec::exposure_marginal(int p) {
    DesignSpec s;
    s.x_cols = all_cols(p);
    return s;
}

DesignSpec DesignSpec::mediator_given_a(int p) {
    DesignSpec s;
    s.include_a = true;
    s.x_cols = all_cols(p);
    return s;
}

DesignSpec DesignSpec::covariates_only(int p) {
    DesignSpec s;
    s.x_cols = all_cols(p);
    return s;
}

NuisanceSpec NuisanceSpec::standard(int p) {
    NuisanceSpec s;
    s.outcome = DesignSpec::outcome_full(p);
    s.exposure = DesignSpec::exposure_given_w(p);
    return s;
}

Eigen::MatrixXd build_design(const Dataset& d, const DesignSpec& spec) {
    spec.validate(d.p());
    const Eigen::Index n = static_cast<Eigen::Index>(d.n());
    Eigen::MatrixXd X(n, spec.width());
    Eigen::Index col = 0;
    X.col(col++).setOnes();
    if (spec.include_a) X.col(col++) = d.a;
    if (spec.include_w) X.col(col++) = d.w;
    if (spec.include_aw) X.col(col++) = d.a.cwiseProduct(d.w);
    for (int j : spec.x_cols) X.col(col++) = d.x.col(j);
    return X;
}

Eigen::MatrixXd build_design_at(const Dataset& d, const DesignSpec& spec,
                                double a_value) {
    spec.validate(d.p());
    const Eigen::Index n = static_cast<Eigen::Index>(d.n());
    Eigen::MatrixXd X(n, spec.width());
    Eigen::Index col = 0;
    X.col(col++).setOnes();
    if (spec.include_a) X.col(col++).setConstant(a_value);
    if (spec.include_w) X.col(col++) = d.w;
    if (spec.include_aw) X.col(col++) = a_value * d.w;
    for (int j : spec.x_cols) X.col(col++) = d.x.col(j);
    return X;
}

namespace {

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& w, Eigen::Index n) {
    if (w.size() == 0) {
        return Eigen::VectorXd::Ones(n);
    }
    if (w.size() != n) {
        throw DataError("weight vector length mismatch in model fit");
    }
    const double total = w.sum();
    if (!(total > 0.0)) {
        throw DataError("model fit received weights summing to zero");
    }
    return w * (static_cast<double>(n) / total);
}

std::string term_label(const std::vector<std::string>& names, Eigen::Index j,
                       Eigen::Index width) {
    if (j < static_cast<Eigen::Index>(names.size())) {
        return "'" + names[j] + "'";
    }
    return "column " + std::to_string(j) + " of " + std::to_string(width);
}

void check_rank(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                const std::vector<std::string>& names, Eigen::Index width) {
    if (qr.rank() == width) {
        return;
    }
    const auto& perm = qr.colsPermutation().indices();
    const Eigen::Index offending = perm[qr.rank()];
    throw NumericError("singular design: term " +
                       term_label(names, offending, width) +
                       " is collinear with earlier terms");
}

double log1pexp(double t) {
    if (t > 35.0) return t;
    if (t < -35.0) return std::exp(t);
    return std::log1p(std::exp(t));
}

}  // namespace

LinearFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& w,
                  const std::vector<std::string>& term_names) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (y.size() != n) {
        throw DataError("fit_ols: response length mismatch");
    }
    if (n < k) {
        throw DataError("fit_ols: fewer rows than model terms");
    }
    const Eigen::VectorXd wn = normalized_weights(w, n);
    const Eigen::VectorXd sw = wn.cwiseSqrt();
    const Eigen::MatrixXd Xs = sw.asDiagonal() * X;
    const Eigen::VectorXd ys = sw.cwiseProduct(y);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    qr.setThreshold(1e-10);
    check_rank(qr, term_names, k);

    LinearFit fit;
    fit.coef = qr.solve(ys);
    const Eigen::VectorXd resid = ys - Xs * fit.coef;
    const double ssr = resid.squaredNorm();
    fit.resid_var = n > k ? ssr / static_cast<double>(n - k) : 0.0;
    const Eigen::MatrixXd xtx = Xs.transpose() * Xs;
    fit.coef_cov = fit.resid_var * xtx.ldlt().solve(
                                       Eigen::MatrixXd::Identity(k, k));
    return fit;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& t,
                         const Eigen::VectorXd& w,
                         const std::vector<std::string>& term_names,
                         int max_iter, double tol) {
    const Eigen::Index n = X.rows();
    const Eigen::Index k = X.cols();
    if (t.size() != n) {
        throw DataError("fit_logistic: response length mismatch");
    }
    bool any0 = false, any1 = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (t[i] == 0.0) {
            any0 = true;
        } else if (t[i] == 1.0) {
            any1 = true;
        } else {
            throw DataError("fit_logistic: target must be binary 0/1");
        }
    }
    if (!any0 || !any1) {
        throw DataError("fit_logistic: degenerate target (all " +
                        std::string(any1 ? "1" : "0") + ")");
    }
    const Eigen::VectorXd wn = normalized_weights(w, n);

    {
        const Eigen::MatrixXd Xs = wn.cwiseSqrt().asDiagonal() * X;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
        qr.setThreshold(1e-10);
        check_rank(qr, term_names, k);
    }

    auto deviance = [&](const Eigen::VectorXd& eta) {
        double dev = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            dev += wn[i] * (log1pexp(eta[i]) - t[i] * eta[i]);
        }
        return 2.0 * dev;
    };
    auto score_of = [&](const Eigen::VectorXd& eta) {
        Eigen::VectorXd resid(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            resid[i] = wn[i] * (t[i] - expit(eta[i]));
        }
        return Eigen::VectorXd(X.transpose() * resid);
    };
    auto newton_direction = [&](const Eigen::VectorXd& eta,
                                const Eigen::VectorXd& score) {
        Eigen::VectorXd fisher_w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = expit(eta[i]);
            fisher_w[i] = wn[i] * p * (1.0 - p);
        }
        const Eigen::MatrixXd info =
            X.transpose() * fisher_w.asDiagonal() * X;
        return Eigen::VectorXd(info.ldlt().solve(score));
    };

    LogisticFit fit;
    fit.coef = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    double dev = deviance(eta);

    for (int it = 0; it < max_iter; ++it) {
        fit.iterations = it + 1;
        const Eigen::VectorXd score = score_of(eta);
        if (score.cwiseAbs().maxCoeff() < tol) {
            fit.converged = true;
            break;
        }
        Eigen::VectorXd direction = newton_direction(eta, score);
        if (!direction.allFinite()) {
            break;
        }
        double step = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            const Eigen::VectorXd cand = fit.coef + step * direction;
            const Eigen::VectorXd cand_eta = X * cand;
            const double cand_dev = deviance(cand_eta);
            if (cand_dev <= dev + 1e-10) {
                fit.coef = cand;
                eta = cand_eta;
                dev = cand_dev;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        if (fit.coef.cwiseAbs().maxCoeff() > 1e3) {
            fit.separation = true;
            fit.converged = false;
            return fit;
        }
    }

    if (!fit.converged) {
        const Eigen::VectorXd score = score_of(eta);
        if (score.cwiseAbs().maxCoeff() < tol) {
            fit.converged = true;
        }
    }
    if (!fit.converged) {
        return fit;
    }

    const Eigen::VectorXd score = score_of(eta);
    const Eigen::VectorXd direction = newton_direction(eta, score);
    // Under perfect or quasi separation the coefficients diverge but the
    // score still vanishes numerically once the fitted probabilities
    // saturate, so a converged-looking fit must be inspected: saturated
    // linear predictors, or a Newton step that still moves a coefficient by
    // a full unit, mean there is no interior optimum. Report the
    // coefficients but mark the fit so callers can warn.
    if (eta.cwiseAbs().maxCoeff() > 25.0 || !direction.allFinite() ||
        direction.cwiseAbs().maxCoeff() > 1.0) {
        fit.separation = true;
        fit.converged = false;
        return fit;
    }

    // One more Newton step from the converged point; quadratic convergence
    // takes the score to machine level. Keep it only if it helps.
    const Eigen::VectorXd cand = fit.coef + direction;
    const Eigen::VectorXd cand_eta = X * cand;
    const Eigen::VectorXd cand_score = score_of(cand_eta);
    if (cand_score.allFinite() &&
        cand_score.cwiseAbs().maxCoeff() <= score.cwiseAbs().maxCoeff() &&
        deviance(cand_eta) <= dev + 1e-10) {
        fit.coef = cand;
    }
    return fit;
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& coef) {
    if (X.cols() != coef.size()) {
        throw DataError("linear_predictor: design width does not match fit");
    }
    return X * coef;
}

Eigen::VectorXd predict_prob(const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& coef) {
    Eigen::VectorXd eta = linear_predictor(X, coef);
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        eta[i] = expit(eta[i]);
    }
    return eta;
}

}  // namespace robustde
