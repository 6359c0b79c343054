#pragma once

// Shared synthetic survey designs for the survey tests and the acceptance
// runner.

#include <cstdint>
#include <string>

#include "robustde/dataset.hpp"
#include "robustde/rng.hpp"
#include "robustde/stats.hpp"

namespace robustde::testing {

struct SurveyDesignSpec {
    int strata = 3;
    int psus_per_stratum = 8;
    int cluster_size = 30;
    double cluster_sd = 0.4;
    std::uint64_t seed = 0;
};

// Stratified cluster population over the interacting crossed process, with a
// shared outcome shock per PSU and informative Poisson-style subsampling:
// each individual enters with probability expit(0.6 + 0.9 x) and carries the
// inverse as weight. The weighted estimand stays at the population value
// because the weights undo the x-dependent thinning.
inline Dataset make_informative_sample(const SurveyDesignSpec& spec) {
    Rng rng(spec.seed);
    std::vector<double> xs, as, ws, ys, omegas;
    std::vector<std::string> strata, psus;
    for (int h = 0; h < spec.strata; ++h) {
        for (int j = 0; j < spec.psus_per_stratum; ++j) {
            const double shock = spec.cluster_sd * rng.normal();
            for (int i = 0; i < spec.cluster_size; ++i) {
                const double x = rng.normal();
                const double a = rng.bernoulli(expit(-0.1 + 0.5 * x));
                const double w = rng.bernoulli(expit(-0.4 + 1.4 * a + 0.6 * x));
                const double y = 0.5 + 0.8 * a + 0.9 * w + a * w + 0.4 * x +
                                 shock + rng.normal();
                const double incl = expit(0.6 + 0.9 * x);
                const bool sampled = rng.bernoulli(incl) == 1;
                if (!sampled) continue;
                xs.push_back(x);
                as.push_back(a);
                ws.push_back(w);
                ys.push_back(y);
                omegas.push_back(1.0 / incl);
                strata.push_back("s" + std::to_string(h));
                psus.push_back("p" + std::to_string(j));
            }
        }
    }
    Dataset d;
    const std::size_t n = xs.size();
    d.x.resize(n, 1);
    d.a.resize(n);
    d.w.resize(n);
    d.y.resize(n);
    d.weight.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        d.x(r, 0) = xs[i];
        d.a[r] = as[i];
        d.w[r] = ws[i];
        d.y[r] = ys[i];
        d.weight[r] = omegas[i];
    }
    d.stratum = std::move(strata);
    d.psu = std::move(psus);
    d.validate();
    return d;
}

// Wraps a plain dataset as a trivial survey design: unit weights, one
// stratum, every row its own PSU.
inline Dataset with_singleton_design(const Dataset& base) {
    Dataset d = base;
    d.weight = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(base.n()));
    d.stratum.assign(base.n(), "s0");
    d.psu.clear();
    for (std::size_t i = 0; i < base.n(); ++i) {
        d.psu.push_back("p" + std::to_string(i));
    }
    return d;
}

}  // namespace robustde::testing
