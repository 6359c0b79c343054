#include "robustde/crossfit.hpp"

#include <stdexcept>

#include "robustde/errors.hpp"
#include "robustde/rng.hpp"
#include "robustde/stats.hpp"

namespace robustde {

FoldAssignment assign_folds(std::size_t n, int K, std::uint64_t seed) {
    if (K < 2) {
        throw ConfigError("assign_folds: K must be at least 2");
    }
    if (static_cast<std::size_t>(K) > n) {
        throw ConfigError("assign_folds: K must not exceed the sample size");
    }
    Rng rng(seed);
    const std::vector<std::size_t> perm = rng.permutation(n);
    FoldAssignment fa;
    fa.K = K;
    fa.fold.assign(n, 0);
    const std::size_t base = n / static_cast<std::size_t>(K);
    const std::size_t extra = n % static_cast<std::size_t>(K);
    std::size_t pos = 0;
    for (int k = 0; k < K; ++k) {
        const std::size_t len = base + (static_cast<std::size_t>(k) < extra ? 1 : 0);
        for (std::size_t j = 0; j < len; ++j) {
            fa.fold[perm[pos++]] = k;
        }
    }
    return fa;
}

FoldAssignment single_fold(std::size_t n) {
    FoldAssignment fa;
    fa.K = 1;
    fa.fold.assign(n, 0);
    return fa;
}

namespace {

std::vector<Eigen::Index> complement_rows(const FoldAssignment& folds, int k) {
    std::vector<Eigen::Index> idx;
    const std::size_t n = folds.fold.size();
    idx.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (folds.K == 1 || folds.fold[i] != k) {
            idx.push_back(static_cast<Eigen::Index>(i));
        }
    }
    return idx;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& M,
                            const std::vector<Eigen::Index>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), M.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = M.row(idx[i]);
    }
    return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v,
                       const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = v[idx[i]];
    }
    return out;
}

}  // namespace

NuisanceFit fit_nuisances(const Dataset& d, const FoldAssignment& folds,
                          const NuisanceSpec& spec) {
    if (folds.fold.size() != d.n()) {
        throw DataError("fit_nuisances: fold assignment length mismatch");
    }
    const Eigen::MatrixXd X_out = build_design(d, spec.outcome);
    const Eigen::MatrixXd X_exp = build_design(d, spec.exposure);
    const auto out_names = spec.outcome.term_names();
    const auto exp_names = spec.exposure.term_names();

    NuisanceFit nf;
    nf.outcome.reserve(folds.K);
    nf.exposure.reserve(folds.K);
    for (int k = 0; k < folds.K; ++k) {
        const auto rows = complement_rows(folds, k);
        const Eigen::VectorXd a_sub = gather(d.a, rows);
        Eigen::VectorXd w_sub;
        if (d.weighted()) {
            w_sub = gather(d.weight, rows);
        }
        bool has0 = false, has1 = false;
        for (Eigen::Index i = 0; i < a_sub.size(); ++i) {
            const bool counted = !d.weighted() || w_sub[i] > 0.0;
            if (!counted) continue;
            (a_sub[i] == 1.0 ? has1 : has0) = true;
        }
        if (!has0 || !has1) {
            throw DataError(
                "cross-fitting: training complement of fold " + std::to_string(k) +
                " contains a single exposure class; use a smaller K");
        }
        nf.outcome.push_back(
            fit_ols(gather_rows(X_out, rows), gather(d.y, rows), w_sub, out_names));
        LogisticFit ef =
            fit_logistic(gather_rows(X_exp, rows), a_sub, w_sub, exp_names);
        if (ef.separation) {
            nf.warnings.push_back("exposure model for fold " + std::to_string(k) +
                                  " shows signs of separation");
        } else if (!ef.converged) {
            nf.warnings.push_back("exposure model for fold " + std::to_string(k) +
                                  " did not converge");
        }
        nf.exposure.push_back(std::move(ef));
    }
    return nf;
}

ScoreVector score(const Dataset& d, const FoldAssignment& folds,
                  const NuisanceFit& fits, const NuisanceSpec& spec,
                  const ClipBounds& clip) {
    clip.validate();
    const std::size_t n = d.n();
    if (folds.fold.size() != n ||
        fits.outcome.size() != static_cast<std::size_t>(folds.K) ||
        fits.exposure.size() != static_cast<std::size_t>(folds.K)) {
        throw DataError("score: fold or fit dimensions do not match");
    }
    const Eigen::MatrixXd X1 = build_design_at(d, spec.outcome, 1.0);
    const Eigen::MatrixXd X0 = build_design_at(d, spec.outcome, 0.0);
    const Eigen::MatrixXd Xg = build_design(d, spec.exposure);

    ScoreVector sv;
    sv.phi.resize(n);
    sv.delta.resize(n);
    sv.g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = folds.fold[i];
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        const double q1 = X1.row(r).dot(fits.outcome[k].coef);
        const double q0 = X0.row(r).dot(fits.outcome[k].coef);
        const double g =
            clip_prob(expit(Xg.row(r).dot(fits.exposure[k].coef)), clip);
        if (!(g >= clip.lo && g <= clip.hi)) {
            throw std::logic_error("score: propensity escaped clip bounds");
        }
        const double resid1 = d.a[r] == 1.0 ? (d.y[r] - q1) / g : 0.0;
        const double resid0 = d.a[r] == 0.0 ? (d.y[r] - q0) / (1.0 - g) : 0.0;
        sv.delta[r] = q1 - q0;
        sv.g[r] = g;
        sv.phi[r] = resid1 - resid0 + (q1 - q0);
    }
    return sv;
}

}  // namespace robustde
