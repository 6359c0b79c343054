#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "robustde/errors.hpp"
#include "robustde/glm.hpp"
#include "robustde/simulate.hpp"
#include "robustde/stats.hpp"

using namespace robustde;

namespace {

// The saturated two-by-two layout with cell counts 3/1/1/3.
Dataset crossed_fixture() {
    Dataset d;
    d.x.resize(8, 0);
    d.a.resize(8);
    d.w.resize(8);
    d.y.resize(8);
    const double rows[8][2] = {{0, 0}, {0, 0}, {0, 0}, {0, 1},
                               {1, 0}, {1, 1}, {1, 1}, {1, 1}};
    for (int i = 0; i < 8; ++i) {
        d.a[i] = rows[i][0];
        d.w[i] = rows[i][1];
        d.y[i] = d.a[i] * d.w[i];
    }
    return d;
}

}  // namespace

TEST_CASE("design spec widths and names") {
    const DesignSpec spec = DesignSpec::outcome_full(2);
    CHECK(spec.width() == 6);
    const auto names = spec.term_names();
    REQUIRE(names.size() == 6);
    CHECK(names[0] == "(intercept)");
    CHECK(names[1] == "A");
    CHECK(names[2] == "W");
    CHECK(names[3] == "A:W");
    CHECK(names[4] == "x0");
    CHECK(names[5] == "x1");

    DesignSpec bad;
    bad.include_aw = true;
    CHECK_THROWS_AS(bad.validate(0), ConfigError);
}

TEST_CASE("build_design_at forces the exposure column") {
    const Dataset d = crossed_fixture();
    const DesignSpec spec = DesignSpec::outcome_full(0);
    const Eigen::MatrixXd X1 = build_design_at(d, spec, 1.0);
    const Eigen::MatrixXd X0 = build_design_at(d, spec, 0.0);
    for (int i = 0; i < 8; ++i) {
        CHECK(X1(i, 1) == 1.0);
        CHECK(X1(i, 3) == d.w[i]);
        CHECK(X0(i, 1) == 0.0);
        CHECK(X0(i, 3) == 0.0);
    }
}

TEST_CASE("ols interpolates a noiseless linear outcome") {
    const std::size_t n = 64;
    Dataset d = draw(DgpSpec::standard(3), n, 20240601);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i);
        d.y[r] = 0.5 + 0.8 * d.a[r] + 0.9 * d.w[r] + 1.0 * d.a[r] * d.w[r] +
                 0.4 * d.x(r, 0);
    }
    const DesignSpec spec = DesignSpec::outcome_full(1);
    const LinearFit fit = fit_ols(build_design(d, spec), d.y, {},
                                  spec.term_names());
    CHECK(fit.coef[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.coef[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.coef[2] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(fit.coef[3] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.coef[4] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(fit.resid_var == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("ols names the collinear term") {
    Dataset d = draw(DgpSpec::standard(3), 50, 7);
    Eigen::MatrixXd x(50, 2);
    x.col(0) = d.x.col(0);
    // Exact linear dependence; the smaller-norm copy is the one the pivoted
    // decomposition leaves out, so the error names it.
    x.col(1) = 0.5 * d.x.col(0);
    d.x = x;
    const DesignSpec spec = DesignSpec::outcome_full(2);
    CHECK_THROWS_WITH_AS(
        fit_ols(build_design(d, spec), d.y, {}, spec.term_names()),
        doctest::Contains("x1"), NumericError);
}

TEST_CASE("ols weights are scale invariant and match replication") {
    const Dataset d = draw(DgpSpec::standard(1), 100, 99);
    const DesignSpec spec = DesignSpec::outcome_full(1);
    const Eigen::MatrixXd X = build_design(d, spec);

    Eigen::VectorXd w(100);
    for (int i = 0; i < 100; ++i) {
        w[i] = 1.0 + (i % 4);
    }
    const LinearFit base = fit_ols(X, d.y, w);
    const LinearFit scaled = fit_ols(X, d.y, 17.0 * w);
    for (int j = 0; j < base.coef.size(); ++j) {
        CHECK(scaled.coef[j] == doctest::Approx(base.coef[j]).epsilon(1e-13));
    }

    // Integer weights equal literal row replication.
    std::vector<int> expanded_rows;
    for (int i = 0; i < 100; ++i) {
        for (int r = 0; r < static_cast<int>(w[i]); ++r) {
            expanded_rows.push_back(i);
        }
    }
    Eigen::MatrixXd Xrep(expanded_rows.size(), X.cols());
    Eigen::VectorXd yrep(expanded_rows.size());
    for (std::size_t k = 0; k < expanded_rows.size(); ++k) {
        Xrep.row(k) = X.row(expanded_rows[k]);
        yrep[k] = d.y[expanded_rows[k]];
    }
    const LinearFit rep = fit_ols(Xrep, yrep);
    for (int j = 0; j < base.coef.size(); ++j) {
        CHECK(rep.coef[j] == doctest::Approx(base.coef[j]).epsilon(1e-10));
    }
}

TEST_CASE("ols exposure coefficient tracks the generating equation") {
    // Additive-outcome process: the A coefficient of the additive fit has
    // the generating value 0.8.
    const Dataset d = draw(DgpSpec::standard(2), 2000, 31415);
    const DesignSpec spec = DesignSpec::outcome_additive(1);
    const LinearFit fit = fit_ols(build_design(d, spec), d.y, {},
                                  spec.term_names());
    const double se = std::sqrt(fit.coef_cov(1, 1));
    CHECK(std::abs(fit.coef[1] - 0.8) < 3.0 * se);
}

TEST_CASE("logistic reproduces saturated cell proportions") {
    const Dataset d = crossed_fixture();
    DesignSpec spec;
    spec.include_w = true;
    const Eigen::MatrixXd X = build_design(d, spec);
    const LogisticFit fit = fit_logistic(X, d.a, {}, spec.term_names());
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.separation);
    const Eigen::VectorXd probs = predict_prob(X, fit.coef);
    for (int i = 0; i < 8; ++i) {
        const double target = d.w[i] == 1.0 ? 0.75 : 0.25;
        CHECK(std::abs(probs[i] - target) < 5e-14);
    }
}

TEST_CASE("logistic recovers the exposure model of the crossed process") {
    const Dataset d = draw(DgpSpec::standard(1), 2000, 271828);
    DesignSpec spec;
    spec.include_w = true;
    spec.x_cols = {0};
    const Eigen::MatrixXd X = build_design(d, spec);
    const LogisticFit fit = fit_logistic(X, d.a, {}, spec.term_names());
    REQUIRE(fit.converged);

    // Observed-information standard errors.
    Eigen::VectorXd pq(X.rows());
    const Eigen::VectorXd probs = predict_prob(X, fit.coef);
    for (int i = 0; i < X.rows(); ++i) {
        pq[i] = probs[i] * (1.0 - probs[i]);
    }
    const Eigen::MatrixXd info = X.transpose() * pq.asDiagonal() * X;
    const Eigen::MatrixXd cov =
        info.ldlt().solve(Eigen::MatrixXd::Identity(3, 3));
    CHECK(std::abs(fit.coef[1] - 1.3) < 3.0 * std::sqrt(cov(1, 1)));
    CHECK(std::abs(fit.coef[2] - 0.5) < 3.0 * std::sqrt(cov(2, 2)));
}

TEST_CASE("logistic weighted fit equals replication") {
    const Dataset d = draw(DgpSpec::standard(2), 120, 5150);
    DesignSpec spec;
    spec.include_a = true;
    spec.x_cols = {0};
    const Eigen::MatrixXd X = build_design(d, spec);
    Eigen::VectorXd w(120);
    for (int i = 0; i < 120; ++i) {
        w[i] = 1.0 + (i % 3);
    }
    const LogisticFit base = fit_logistic(X, d.w, w);

    std::vector<int> expanded;
    for (int i = 0; i < 120; ++i) {
        for (int r = 0; r < static_cast<int>(w[i]); ++r) {
            expanded.push_back(i);
        }
    }
    Eigen::MatrixXd Xrep(expanded.size(), X.cols());
    Eigen::VectorXd trep(expanded.size());
    for (std::size_t k = 0; k < expanded.size(); ++k) {
        Xrep.row(k) = X.row(expanded[k]);
        trep[k] = d.w[expanded[k]];
    }
    const LogisticFit rep = fit_logistic(Xrep, trep);
    for (int j = 0; j < base.coef.size(); ++j) {
        CHECK(rep.coef[j] == doctest::Approx(base.coef[j]).epsilon(1e-8));
    }
}

TEST_CASE("logistic flags complete separation") {
    Eigen::MatrixXd X(8, 2);
    Eigen::VectorXd t(8);
    for (int i = 0; i < 8; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i < 4 ? 0.0 : 1.0;
        t[i] = X(i, 1);
    }
    const LogisticFit fit = fit_logistic(X, t);
    CHECK(fit.separation);
    CHECK_FALSE(fit.converged);
}

TEST_CASE("logistic rejects degenerate and non-binary targets") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(5, 1);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(5);
    CHECK_THROWS_WITH_AS(fit_logistic(X, ones), doctest::Contains("degenerate"),
                         DataError);
    Eigen::VectorXd frac(5);
    frac << 0, 1, 0.5, 1, 0;
    CHECK_THROWS_AS(fit_logistic(X, frac), DataError);
}

TEST_CASE("logistic rank check names the collinear term") {
    const Dataset d = draw(DgpSpec::standard(2), 60, 8);
    DesignSpec spec;
    spec.include_a = true;
    spec.x_cols = {0, 0};  // same column twice
    CHECK_THROWS_WITH_AS(
        fit_logistic(build_design(d, spec), d.w, {}, spec.term_names()),
        doctest::Contains("collinear"), NumericError);
}

TEST_CASE("clip_prob clamps to the bounds") {
    const ClipBounds b{0.01, 0.99};
    CHECK(clip_prob(0.5, b) == 0.5);
    CHECK(clip_prob(0.0001, b) == 0.01);
    CHECK(clip_prob(0.9999, b) == 0.99);
    ClipBounds bad{0.6, 0.4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
