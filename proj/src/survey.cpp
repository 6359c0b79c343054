#include "robustde/survey.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "robustde/crossfit.hpp"
#include "robustde/errors.hpp"
#include "robustde/rng.hpp"
#include "robustde/stats.hpp"
#include "robustde/threads.hpp"

namespace robustde {

double six_year_weight(double two_year_weight) {
    if (!(two_year_weight >= 0.0) || !std::isfinite(two_year_weight)) {
        throw DataError("six_year_weight: weight must be finite and >= 0");
    }
    return two_year_weight * (2.0 / 3.0);
}

double hajek_mean(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
    if (values.size() != weights.size()) {
        throw DataError("hajek_mean: length mismatch");
    }
    if (values.size() == 0) {
        throw DataError("hajek_mean: empty input");
    }
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0)) {
            throw DataError("hajek_mean: weights must be nonnegative");
        }
    }
    const double den = weights.sum();
    if (!(den > 0.0)) {
        throw DataError("hajek_mean: weights sum to zero");
    }
    return weights.cwiseProduct(values).sum() / den;
}

namespace {

// PSU structure in first-appearance order so results do not depend on label
// sort order.
struct DesignIndex {
    std::vector<std::string> strata;
    std::vector<std::vector<std::vector<Eigen::Index>>> rows;  // [h][j] -> rows
};

DesignIndex index_design(const Dataset& d) {
    if (!d.has_design()) {
        throw ConfigError("survey routine needs stratum and psu columns");
    }
    DesignIndex idx;
    std::map<std::string, std::size_t> stratum_pos;
    std::vector<std::map<std::string, std::size_t>> psu_pos;
    for (std::size_t i = 0; i < d.n(); ++i) {
        auto [sit, snew] =
            stratum_pos.try_emplace(d.stratum[i], idx.strata.size());
        if (snew) {
            idx.strata.push_back(d.stratum[i]);
            idx.rows.emplace_back();
            psu_pos.emplace_back();
        }
        const std::size_t h = sit->second;
        auto [pit, pnew] = psu_pos[h].try_emplace(d.psu[i], idx.rows[h].size());
        if (pnew) {
            idx.rows[h].emplace_back();
        }
        idx.rows[h][pit->second].push_back(static_cast<Eigen::Index>(i));
    }
    return idx;
}

struct WeightedScores {
    Eigen::VectorXd phi;
    double point = 0.0;
    std::vector<std::string> warnings;
};

// Cross-fitted scores with the given weights in every fit, averaged by the
// weights. The fold partition comes from (n, K, seed) only.
WeightedScores weighted_scores(const Dataset& d, const EstimateOptions& opts) {
    d.validate();
    opts.clip.validate();
    if (!d.weighted()) {
        throw ConfigError("weighted estimator needs a weight column");
    }
    if (opts.K < 1) {
        throw ConfigError("K must be at least 1");
    }
    const std::size_t n = d.n();
    const NuisanceSpec spec =
        opts.nuisance ? *opts.nuisance : NuisanceSpec::standard(d.p());
    const FoldAssignment folds =
        opts.K == 1 ? single_fold(n) : assign_folds(n, opts.K, opts.seed);
    const NuisanceFit fits = fit_nuisances(d, folds, spec);
    const ScoreVector sv = score(d, folds, fits, spec, opts.clip);
    WeightedScores ws;
    ws.phi = sv.phi;
    ws.point = hajek_mean(sv.phi, d.weight);
    ws.warnings = fits.warnings;
    return ws;
}

}  // namespace

WeightedPsiResult estimate_psi_weighted(const Dataset& d,
                                        const EstimateOptions& opts) {
    const DesignIndex design = index_design(d);
    WeightedScores ws = weighted_scores(d, opts);

    // Taylor linearization of the Hajek ratio: z_i = w_i (phi_i - theta) / W.
    const double total_weight = d.weight.sum();
    Eigen::VectorXd z(d.n());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = d.weight[i] * (ws.phi[i] - ws.point) / total_weight;
    }

    double var = 0.0;
    int lonely = 0;
    for (std::size_t h = 0; h < design.rows.size(); ++h) {
        const std::size_t m_h = design.rows[h].size();
        if (m_h < 2) {
            ++lonely;
            continue;
        }
        std::vector<double> totals(m_h, 0.0);
        double stratum_sum = 0.0;
        for (std::size_t j = 0; j < m_h; ++j) {
            for (const Eigen::Index i : design.rows[h][j]) {
                totals[j] += z[i];
            }
            stratum_sum += totals[j];
        }
        const double zbar = stratum_sum / static_cast<double>(m_h);
        double ss = 0.0;
        for (std::size_t j = 0; j < m_h; ++j) {
            ss += (totals[j] - zbar) * (totals[j] - zbar);
        }
        var += static_cast<double>(m_h) / static_cast<double>(m_h - 1) * ss;
    }

    WeightedPsiResult res;
    res.lonely_psu_strata = lonely;
    res.estimate.estimand = "psi";
    res.estimate.point = ws.point;
    const double se = std::sqrt(var);
    const double zq = inverse_normal_cdf(1.0 - opts.alpha / 2.0);
    res.estimate.se = se;
    res.estimate.ci_lo = ws.point - zq * se;
    res.estimate.ci_hi = ws.point + zq * se;
    res.estimate.n = d.n();
    res.estimate.K = opts.K;
    res.estimate.seed = opts.seed;
    res.estimate.clip = opts.clip;
    res.estimate.alpha = opts.alpha;
    res.estimate.warnings = ws.warnings;
    if (lonely > 0) {
        res.estimate.warnings.push_back(
            std::to_string(lonely) +
            " stratum(s) with a single PSU contribute zero variance");
    }
    return res;
}

std::string target_name(BootTarget t) {
    switch (t) {
        case BootTarget::psi: return "psi";
        case BootTarget::lambda: return "lambda";
        case BootTarget::difference: return "difference";
    }
    throw ConfigError("unknown bootstrap target");
}

std::pair<double, double> percentile_interval(std::vector<double> replicates,
                                              double alpha) {
    if (replicates.empty()) {
        throw NumericError("percentile_interval: no replicates");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0,1)");
    }
    std::sort(replicates.begin(), replicates.end());
    const double B = static_cast<double>(replicates.size());
    auto order_stat = [&](double q) {
        std::size_t k = static_cast<std::size_t>(std::ceil(q * B));
        k = std::max<std::size_t>(1, std::min(replicates.size(), k));
        return replicates[k - 1];
    };
    return {order_stat(alpha / 2.0), order_stat(1.0 - alpha / 2.0)};
}

BootstrapResult psu_bootstrap(const Dataset& d, const BootstrapOptions& opts) {
    if (opts.B < 1) {
        throw ConfigError("bootstrap replicate count must be positive");
    }
    if (opts.targets.empty()) {
        throw ConfigError("bootstrap needs at least one target");
    }
    const DesignIndex design = index_design(d);

    bool want_psi = false, want_lambda = false;
    for (BootTarget t : opts.targets) {
        if (t == BootTarget::psi || t == BootTarget::difference) want_psi = true;
        if (t == BootTarget::lambda || t == BootTarget::difference)
            want_lambda = true;
    }

    const bool binary_focal = is_binary_focal(d.w);
    auto classes_ok = [&](const Dataset& rep) {
        bool a0 = false, a1 = false, w0 = false, w1 = false;
        for (Eigen::Index i = 0; i < rep.weight.size(); ++i) {
            if (!(rep.weight[i] > 0.0)) continue;
            (rep.a[i] == 1.0 ? a1 : a0) = true;
            if (binary_focal) {
                (rep.w[i] == 1.0 ? w1 : w0) = true;
            }
        }
        if (!a0 || !a1) return false;
        if (binary_focal && (!w0 || !w1)) return false;
        return true;
    };

    const double point_psi =
        want_psi ? weighted_scores(d, opts.estimate).point : 0.0;
    const double point_lambda =
        want_lambda ? estimate_lambda(d, opts.estimate).point : 0.0;

    struct RepOutcome {
        bool ok = false;
        double psi = 0.0, lambda = 0.0;
        std::string skip_reason;
    };
    std::vector<RepOutcome> slots(opts.B);
    parallel_for(static_cast<std::size_t>(opts.B), opts.threads,
                 [&](std::size_t b) {
        const std::uint64_t rep_seed = derive_seed(opts.seed, b);
        Rng rng(rep_seed);
        Dataset rep = d;
        for (std::size_t h = 0; h < design.rows.size(); ++h) {
            const std::size_t m_h = design.rows[h].size();
            std::vector<int> count(m_h, 0);
            for (std::size_t draw = 0; draw < m_h; ++draw) {
                ++count[static_cast<std::size_t>(rng.below(m_h))];
            }
            for (std::size_t j = 0; j < m_h; ++j) {
                for (const Eigen::Index i : design.rows[h][j]) {
                    rep.weight[i] = d.weight[i] * count[j];
                }
            }
        }
        RepOutcome& slot = slots[b];
        if (!classes_ok(rep)) {
            slot.skip_reason = "resample lost an exposure or focal class";
            return;
        }
        // Each replicate reruns the whole pipeline, fold draw included, so
        // the replicate spread reflects partition randomness as well.
        EstimateOptions rep_opts = opts.estimate;
        rep_opts.seed = derive_seed(rep_seed, 1);
        try {
            if (want_psi) {
                slot.psi = weighted_scores(rep, rep_opts).point;
            }
            if (want_lambda) {
                slot.lambda = estimate_lambda(rep, rep_opts).point;
            }
            slot.ok = true;
        } catch (const NumericError& e) {
            slot.skip_reason = e.what();
        } catch (const DataError& e) {
            slot.skip_reason = e.what();
        }
    });

    std::vector<double> reps_psi, reps_lambda, reps_diff;
    int skipped = 0;
    std::string example_reason;
    for (const RepOutcome& slot : slots) {
        if (!slot.ok) {
            ++skipped;
            if (example_reason.empty()) {
                example_reason = slot.skip_reason;
            }
            continue;
        }
        if (want_psi) reps_psi.push_back(slot.psi);
        if (want_lambda) reps_lambda.push_back(slot.lambda);
        if (want_psi && want_lambda) reps_diff.push_back(slot.psi - slot.lambda);
    }
    if (skipped > opts.max_skip_rate * opts.B) {
        throw NumericError("psu_bootstrap: " + std::to_string(skipped) + " of " +
                           std::to_string(opts.B) +
                           " replicates were degenerate (e.g. " +
                           example_reason + ")");
    }

    BootstrapResult out;
    out.B = opts.B;
    out.skipped = skipped;
    out.seed = opts.seed;
    const double alpha = opts.estimate.alpha;
    for (BootTarget t : opts.targets) {
        TargetSummary ts;
        ts.target = t;
        switch (t) {
            case BootTarget::psi:
                ts.point = point_psi;
                ts.replicates = reps_psi;
                break;
            case BootTarget::lambda:
                ts.point = point_lambda;
                ts.replicates = reps_lambda;
                break;
            case BootTarget::difference:
                ts.point = point_psi - point_lambda;
                ts.replicates = reps_diff;
                break;
        }
        const auto ci = percentile_interval(ts.replicates, alpha);
        ts.ci_lo = ci.first;
        ts.ci_hi = ci.second;
        out.targets.push_back(std::move(ts));
    }
    return out;
}

}  // namespace robustde
