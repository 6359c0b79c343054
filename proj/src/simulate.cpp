#include "robustde/simulate.hpp"

#include <cmath>
#include <ostream>

#include "robustde/errors.hpp"
#include "robustde/report.hpp"
#include "robustde/rng.hpp"
#include "robustde/stats.hpp"
#include "robustde/threads.hpp"

namespace robustde {

namespace {

// Structural coefficients shared by all three cases.
constexpr double kFocalGivenX[2] = {-0.2, 0.6};           // case 1
constexpr double kExposureGivenWX[3] = {-0.1, 0.5, 1.3};  // case 1
constexpr double kExposureGivenX[2] = {-0.1, 0.5};        // cases 2, 3
constexpr double kFocalGivenAX[3] = {-0.4, 1.4, 0.6};     // cases 2, 3

double p_focal_case1(double x) {
    return expit(kFocalGivenX[0] + kFocalGivenX[1] * x);
}

double p_exposure_case1(double w, double x) {
    return expit(kExposureGivenWX[0] + kExposureGivenWX[1] * x +
                 kExposureGivenWX[2] * w);
}

double p_exposure_case23(double x) {
    return expit(kExposureGivenX[0] + kExposureGivenX[1] * x);
}

double p_focal_case23(double a, double x) {
    return expit(kFocalGivenAX[0] + kFocalGivenAX[1] * a + kFocalGivenAX[2] * x);
}

// P(W=1 | A=0, X=x) for case 1, by Bayes over the focal variable.
double p_focal_given_unexposed_case1(double x) {
    const double pw = p_focal_case1(x);
    const double stay0_w1 = 1.0 - p_exposure_case1(1.0, x);
    const double stay0_w0 = 1.0 - p_exposure_case1(0.0, x);
    return stay0_w1 * pw / (stay0_w1 * pw + stay0_w0 * (1.0 - pw));
}

double marginal_focal_case23(double x) {
    const double pa = p_exposure_case23(x);
    return pa * p_focal_case23(1.0, x) + (1.0 - pa) * p_focal_case23(0.0, x);
}

}  // namespace

DgpSpec DgpSpec::standard(int case_id) {
    DgpSpec spec;
    spec.case_id = case_id;
    spec.aw_coef = case_id == 2 ? 0.0 : 1.0;
    spec.validate();
    return spec;
}

DgpSpec DgpSpec::null_effect(int case_id) {
    DgpSpec spec = standard(case_id);
    spec.a_coef = 0.0;
    spec.aw_coef = 0.0;
    return spec;
}

void DgpSpec::validate() const {
    if (case_id < 1 || case_id > 3) {
        throw ConfigError("DGP case must be 1, 2, or 3");
    }
}

Dataset draw(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) {
        throw ConfigError("draw: sample size must be positive");
    }
    Rng rng(seed);
    Dataset d;
    d.x.resize(n, 1);
    d.a.resize(n);
    d.w.resize(n);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        const double x = spec.fixed_x ? *spec.fixed_x : rng.normal();
        double a, w;
        if (spec.case_id == 1) {
            w = rng.bernoulli(p_focal_case1(x));
            a = rng.bernoulli(p_exposure_case1(w, x));
        } else {
            a = rng.bernoulli(p_exposure_case23(x));
            w = rng.bernoulli(p_focal_case23(a, x));
        }
        const double eps = rng.normal();
        d.x(r, 0) = x;
        d.a[r] = a;
        d.w[r] = w;
        d.y[r] = spec.intercept + spec.a_coef * a + spec.w_coef * w +
                 spec.aw_coef * a * w + spec.x_coef * x + eps;
    }
    return d;
}

TruthPair truth(const DgpSpec& spec) {
    spec.validate();
    TruthPair t;
    if (spec.aw_coef == 0.0) {
        t.psi = spec.a_coef;
        t.lambda = spec.a_coef;
        t.method = "closed-form";
        return t;
    }

    auto marginal_focal = [&](double x) {
        return spec.case_id == 1 ? p_focal_case1(x) : marginal_focal_case23(x);
    };
    auto focal_given_unexposed = [&](double x) {
        return spec.case_id == 1 ? p_focal_given_unexposed_case1(x)
                                 : p_focal_case23(0.0, x);
    };

    double mean_w, mean_w_unexposed;
    if (spec.fixed_x) {
        mean_w = marginal_focal(*spec.fixed_x);
        mean_w_unexposed = focal_given_unexposed(*spec.fixed_x);
        t.method = "closed-form";
    } else {
        mean_w = normal_expectation(marginal_focal);
        mean_w_unexposed = normal_expectation(focal_given_unexposed);
        t.method = "quadrature";
    }
    t.psi = spec.a_coef + spec.aw_coef * mean_w;
    t.lambda = spec.a_coef + spec.aw_coef * mean_w_unexposed;
    return t;
}

std::vector<SimSummary> run_study(const StudyConfig& cfg,
                                  std::vector<ReplicateRecord>* records) {
    if (cfg.reps < 2) {
        throw ConfigError("run_study: need at least two replicates");
    }
    if (!(cfg.max_failure_rate >= 0.0 && cfg.max_failure_rate <= 1.0)) {
        throw ConfigError("run_study: max failure rate must lie in [0,1]");
    }
    std::vector<SimSummary> out;
    for (int case_id : cfg.cases) {
        DgpSpec spec = DgpSpec::standard(case_id);
        const TruthPair tp = truth(spec);
        const std::uint64_t case_seed =
            derive_seed(cfg.seed, static_cast<std::uint64_t>(case_id));
        for (std::size_t n : cfg.sample_sizes) {
            const std::uint64_t cell_seed =
                derive_seed(case_seed, static_cast<std::uint64_t>(n));
            SimSummary summary;
            summary.case_id = case_id;
            summary.n = n;
            summary.psi_true = tp.psi;
            summary.lambda_true = tp.lambda;

            struct RepOutcome {
                bool ok = false;
                double psi = 0.0, se = 0.0, lo = 0.0, hi = 0.0, lambda = 0.0;
            };
            std::vector<RepOutcome> slots(cfg.reps);
            parallel_for(cfg.reps, cfg.threads, [&](std::size_t rep) {
                const std::uint64_t rep_seed =
                    derive_seed(cell_seed, static_cast<std::uint64_t>(rep));
                try {
                    const Dataset d = draw(spec, n, derive_seed(rep_seed, 0));
                    EstimateOptions opts;
                    opts.K = cfg.K;
                    opts.seed = derive_seed(rep_seed, 1);
                    opts.clip = cfg.clip;
                    opts.alpha = cfg.alpha;
                    opts.nuisance = cfg.nuisance;
                    const EstimateResult est = estimate_psi(d, opts);
                    RepOutcome& slot = slots[rep];
                    slot.psi = est.point;
                    slot.se = *est.se;
                    slot.lo = *est.ci_lo;
                    slot.hi = *est.ci_hi;
                    if (cfg.comparator) {
                        slot.lambda = estimate_lambda(d, opts).point;
                    }
                    slot.ok = true;
                } catch (const DataError&) {
                } catch (const NumericError&) {
                }
            });

            std::vector<double> psis, ses, lambdas;
            int covered = 0;
            for (int rep = 0; rep < cfg.reps; ++rep) {
                const RepOutcome& slot = slots[rep];
                if (!slot.ok) {
                    ++summary.failures;
                    continue;
                }
                psis.push_back(slot.psi);
                ses.push_back(slot.se);
                if (tp.psi >= slot.lo && tp.psi <= slot.hi) {
                    ++covered;
                }
                if (cfg.comparator) {
                    lambdas.push_back(slot.lambda);
                }
                if (records) {
                    records->push_back({case_id, n, "onestep", rep, slot.psi});
                    if (cfg.comparator) {
                        records->push_back(
                            {case_id, n, "comparator", rep, slot.lambda});
                    }
                }
            }
            if (summary.failures >
                cfg.max_failure_rate * static_cast<double>(cfg.reps)) {
                throw NumericError(
                    "simulation cell (case " + std::to_string(case_id) + ", n=" +
                    std::to_string(n) + ") had " +
                    std::to_string(summary.failures) + " failed replicates");
            }
            const int done = static_cast<int>(psis.size());
            summary.reps = done;
            summary.mean_psi = mean(psis);
            summary.bias_psi = summary.mean_psi - tp.psi;
            double mse = 0.0;
            for (double v : psis) {
                mse += (v - tp.psi) * (v - tp.psi);
            }
            summary.rmse_psi = std::sqrt(mse / done);
            summary.coverage95 = static_cast<double>(covered) / done;
            summary.mc_sd_psi = sample_sd(psis);
            summary.mean_se_psi = mean(ses);
            if (cfg.comparator) {
                summary.mean_lambda = mean(lambdas);
                summary.lambda_bias_to_psi = summary.mean_lambda - tp.psi;
                summary.mc_sd_lambda = sample_sd(lambdas);
            }
            out.push_back(summary);
        }
    }
    return out;
}

void write_study_summary(const std::vector<SimSummary>& rows,
                         std::ostream& out) {
    out << "case,n,mean_onestep,bias_onestep,rmse_onestep,coverage95,"
           "mean_comparator,comparator_bias_to_truth,mc_sd_onestep,"
           "mean_se_onestep,mc_sd_comparator,psi_true,lambda_true,reps,"
           "failures\n";
    for (const auto& r : rows) {
        out << r.case_id << ',' << r.n << ',' << format_double(r.mean_psi) << ','
            << format_double(r.bias_psi) << ',' << format_double(r.rmse_psi)
            << ',' << format_double(r.coverage95) << ','
            << format_double(r.mean_lambda) << ','
            << format_double(r.lambda_bias_to_psi) << ','
            << format_double(r.mc_sd_psi) << ','
            << format_double(r.mean_se_psi) << ','
            << format_double(r.mc_sd_lambda) << ','
            << format_double(r.psi_true) << ','
            << format_double(r.lambda_true) << ',' << r.reps << ','
            << r.failures << '\n';
    }
}

void write_replicate_records(const std::vector<ReplicateRecord>& rows,
                             std::ostream& out) {
    out << "case,n,method,replicate,estimate\n";
    for (const auto& r : rows) {
        out << r.case_id << ',' << r.n << ',' << r.method << ',' << r.rep << ','
            << format_double(r.estimate) << '\n';
    }
}

void write_reference_lines(const std::vector<SimSummary>& rows,
                           std::ostream& out) {
    out << "case,psi_true,lambda_true\n";
    int last_case = -1;
    for (const auto& r : rows) {
        if (r.case_id == last_case) {
            continue;
        }
        last_case = r.case_id;
        out << r.case_id << ',' << format_double(r.psi_true) << ','
            << format_double(r.lambda_true) << '\n';
    }
}

}  // namespace robustde
