#include <doctest.h>

#include <cmath>

#include "robustde/errors.hpp"
#include "robustde/estimator.hpp"
#include "robustde/simulate.hpp"
#include "robustde/survey.hpp"
#include "survey_fixture.hpp"

using namespace robustde;
using robustde::testing::make_informative_sample;
using robustde::testing::with_singleton_design;

namespace {

EstimateOptions opts_with_seed(std::uint64_t seed) {
    EstimateOptions opts;
    opts.K = 5;
    opts.seed = seed;
    return opts;
}

}  // namespace

TEST_CASE("six year weight is two thirds of the cycle weight") {
    CHECK(six_year_weight(3.0) == 2.0);
    CHECK(six_year_weight(0.0) == 0.0);
    CHECK_THROWS_AS(six_year_weight(-1.0), DataError);
}

TEST_CASE("hajek mean") {
    Eigen::VectorXd v(3), w(3);
    v << 1.0, 2.0, 4.0;
    w << 1.0, 1.0, 2.0;
    CHECK(hajek_mean(v, w) == doctest::Approx(11.0 / 4.0).epsilon(1e-15));
    w.setZero();
    CHECK_THROWS_AS(hajek_mean(v, w), DataError);
    Eigen::VectorXd short_w(2);
    short_w << 1.0, 1.0;
    CHECK_THROWS_AS(hajek_mean(v, short_w), DataError);
}

TEST_CASE("unit weights with singleton PSUs reproduce the iid estimator") {
    const Dataset base = draw(DgpSpec::standard(3), 400, 71);
    const Dataset surveyed = with_singleton_design(base);

    const EstimateResult plain = estimate_psi(base, opts_with_seed(72));
    const WeightedPsiResult weighted =
        estimate_psi_weighted(surveyed, opts_with_seed(72));

    CHECK(weighted.estimate.point == plain.point);  // exact, same arithmetic
    CHECK(*weighted.estimate.se == doctest::Approx(*plain.se).epsilon(1e-12));
    CHECK(weighted.lonely_psu_strata == 0);
}

TEST_CASE("rescaling every weight leaves the estimate unchanged") {
    const Dataset d = make_informative_sample({.seed = 73});
    Dataset scaled = d;
    scaled.weight *= 1000.0;

    const WeightedPsiResult a = estimate_psi_weighted(d, opts_with_seed(74));
    const WeightedPsiResult b = estimate_psi_weighted(scaled, opts_with_seed(74));
    CHECK(std::abs(a.estimate.point - b.estimate.point) < 1e-12);
    CHECK(std::abs(*a.estimate.se - *b.estimate.se) < 1e-12);
}

TEST_CASE("weighted estimate corrects informative sampling") {
    const Dataset d = make_informative_sample({.seed = 75});
    const WeightedPsiResult res = estimate_psi_weighted(d, opts_with_seed(76));
    // Population value of the interacting crossed process.
    CHECK(std::abs(res.estimate.point - 1.3528509208803756) < 0.25);
    CHECK(*res.estimate.se > 0.0);
}

TEST_CASE("lonely PSU strata warn and contribute zero variance") {
    Dataset d = make_informative_sample({.seed = 77});
    // Rename one stratum's PSUs to a single id, then split it off as its own
    // stratum with one PSU.
    for (std::size_t i = 0; i < d.n(); ++i) {
        if (d.stratum[i] == "s0") {
            d.psu[i] = "only";
        }
    }
    const WeightedPsiResult res = estimate_psi_weighted(d, opts_with_seed(78));
    CHECK(res.lonely_psu_strata == 1);
    REQUIRE_FALSE(res.estimate.warnings.empty());
    CHECK(res.estimate.warnings.back().find("single PSU") != std::string::npos);
    CHECK(std::isfinite(*res.estimate.se));
}

TEST_CASE("percentile interval uses ceil-indexed order statistics") {
    std::vector<double> reps(500);
    for (int i = 0; i < 500; ++i) {
        reps[i] = i + 1.0;  // values 1..500
    }
    const auto ci = percentile_interval(reps, 0.05);
    CHECK(ci.first == 13.0);   // ceil(0.025 * 500)
    CHECK(ci.second == 488.0); // ceil(0.975 * 500)

    std::vector<double> small(40);
    for (int i = 0; i < 40; ++i) {
        small[i] = i + 1.0;
    }
    const auto ci2 = percentile_interval(small, 0.05);
    CHECK(ci2.first == 1.0);
    CHECK(ci2.second == 39.0);

    CHECK_THROWS_AS(percentile_interval({}, 0.05), NumericError);
}

TEST_CASE("degenerate design yields a point-mass bootstrap") {
    Dataset d = draw(DgpSpec::standard(2), 120, 80);
    d.weight = Eigen::VectorXd::Ones(120);
    d.stratum.assign(120, "s0");
    d.psu.assign(120, "p0");  // one PSU: resampling cannot vary

    BootstrapOptions opts;
    opts.B = 25;
    opts.seed = 81;
    opts.estimate = opts_with_seed(82);
    // Plug-in mode removes the per-replicate fold draw, so with resampling
    // neutralized every replicate is the same number.
    opts.estimate.K = 1;
    const BootstrapResult res = psu_bootstrap(d, opts);
    REQUIRE(res.targets.size() == 3);
    for (const TargetSummary& ts : res.targets) {
        REQUIRE(ts.replicates.size() == 25);
        for (double r : ts.replicates) {
            CHECK(r == ts.replicates[0]);
        }
        CHECK(ts.ci_lo == ts.ci_hi);
        CHECK(ts.ci_lo == doctest::Approx(ts.point).epsilon(1e-12));
    }
}

TEST_CASE("bootstrap replicates are reproducible and share draws") {
    const Dataset d = make_informative_sample({.strata = 2,
                                               .psus_per_stratum = 6,
                                               .cluster_size = 20,
                                               .seed = 83});
    BootstrapOptions opts;
    opts.B = 40;
    opts.seed = 84;
    opts.estimate = opts_with_seed(85);

    const BootstrapResult a = psu_bootstrap(d, opts);
    const BootstrapResult b = psu_bootstrap(d, opts);
    REQUIRE(a.targets.size() == b.targets.size());
    for (std::size_t t = 0; t < a.targets.size(); ++t) {
        REQUIRE(a.targets[t].replicates.size() ==
                b.targets[t].replicates.size());
        for (std::size_t i = 0; i < a.targets[t].replicates.size(); ++i) {
            CHECK(a.targets[t].replicates[i] == b.targets[t].replicates[i]);
        }
    }

    // difference target = componentwise psi - lambda when nothing is skipped.
    REQUIRE(a.skipped == 0);
    const auto& psi = a.targets[0].replicates;
    const auto& lambda = a.targets[1].replicates;
    const auto& diff = a.targets[2].replicates;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        CHECK(diff[i] == doctest::Approx(psi[i] - lambda[i]).epsilon(1e-14));
    }
    CHECK(a.targets[2].point ==
          doctest::Approx(a.targets[0].point - a.targets[1].point)
              .epsilon(1e-14));
}

TEST_CASE("bootstrap is invariant to the thread count") {
    // Enough clusters per stratum that resamples keep both exposure classes
    // in every training fold; tiny designs abort on degenerate replicates.
    const Dataset d = make_informative_sample({.strata = 2,
                                               .psus_per_stratum = 8,
                                               .cluster_size = 15,
                                               .seed = 86});
    BootstrapOptions opts;
    opts.B = 20;
    opts.seed = 87;
    opts.estimate = opts_with_seed(88);
    opts.targets = {BootTarget::psi};
    const BootstrapResult serial = psu_bootstrap(d, opts);
    opts.threads = 4;
    const BootstrapResult parallel = psu_bootstrap(d, opts);
    REQUIRE(serial.targets[0].replicates.size() ==
            parallel.targets[0].replicates.size());
    for (std::size_t i = 0; i < serial.targets[0].replicates.size(); ++i) {
        CHECK(serial.targets[0].replicates[i] ==
              parallel.targets[0].replicates[i]);
    }
}

TEST_CASE("bootstrap covers the estimand on the informative design") {
    const Dataset d = make_informative_sample({.seed = 89});
    BootstrapOptions opts;
    opts.B = 60;
    opts.seed = 90;
    opts.estimate = opts_with_seed(91);
    opts.targets = {BootTarget::psi};
    const BootstrapResult res = psu_bootstrap(d, opts);
    CHECK(res.targets[0].ci_lo < res.targets[0].point);
    CHECK(res.targets[0].ci_hi > res.targets[0].point);
    CHECK(res.targets[0].ci_hi - res.targets[0].ci_lo < 2.0);
}

TEST_CASE("survey routines demand design columns") {
    const Dataset plain = draw(DgpSpec::standard(2), 100, 92);
    CHECK_THROWS_AS(estimate_psi_weighted(plain, opts_with_seed(0)),
                    ConfigError);
    BootstrapOptions opts;
    opts.estimate = opts_with_seed(0);
    CHECK_THROWS_AS(psu_bootstrap(plain, opts), ConfigError);
}
