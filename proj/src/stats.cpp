#include "robustde/stats.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "robustde/errors.hpp"

namespace robustde {

double expit(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

namespace {

// AS241 (PPND16) coefficient sets.
constexpr double kA[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                          1.9715909503065514427e+3, 1.3731693765509461125e+4,
                          4.5921953931549871457e+4, 6.7265770927008700853e+4,
                          3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr double kB[8] = {1.0,
                          4.2313330701600911252e+1,
                          6.8718700749205790830e+2,
                          5.3941960214247511077e+3,
                          2.1213794301586595867e+4,
                          3.9307895800092710610e+4,
                          2.8729085735721942674e+4,
                          5.2264952788528545610e+3};
constexpr double kC[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                          5.76949722146069140550e0,  3.64784832476320460504e0,
                          1.27045825245236838258e0,  2.41780725177450611770e-1,
                          2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kD[8] = {1.0,
                          2.05319162663775882187e0,
                          1.67638483018380384940e0,
                          6.89767334985100004550e-1,
                          1.48103976427480074590e-1,
                          1.51986665636164571966e-2,
                          5.47593808499534494600e-4,
                          1.05075007164441684324e-9};
constexpr double kE[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                          1.78482653991729133580e0,  2.96560571828504891230e-1,
                          2.65321895265761230930e-2, 1.24266094738807843860e-3,
                          2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kF[8] = {1.0,
                          5.99832206555887937690e-1,
                          1.36929880922735805310e-1,
                          1.48753612908506148525e-2,
                          7.86869131145613259100e-4,
                          1.84631831751005468180e-5,
                          1.42151175831644588870e-7,
                          2.04426310338993978564e-15};

double ratpoly(const double (&num)[8], const double (&den)[8], double r) {
    double p = num[7];
    double q = den[7];
    for (int i = 6; i >= 0; --i) {
        p = p * r + num[i];
        q = q * r + den[i];
    }
    return p / q;
}

}  // namespace

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw NumericError("inverse_normal_cdf: p must lie strictly in (0,1)");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * ratpoly(kA, kB, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        val = ratpoly(kC, kD, r - 1.6);
    } else {
        val = ratpoly(kE, kF, r - 5.0);
    }
    return q < 0.0 ? -val : val;
}

QuadratureRule gauss_hermite(int m) {
    if (m < 1) {
        throw ConfigError("gauss_hermite: node count must be positive");
    }
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
    for (int i = 1; i < m; ++i) {
        sub[i - 1] = std::sqrt(i / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub);
    if (solver.info() != Eigen::Success) {
        throw NumericError("gauss_hermite: eigendecomposition failed");
    }
    QuadratureRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    const double sqrt_pi = std::sqrt(M_PI);
    for (int i = 0; i < m; ++i) {
        rule.nodes[i] = solver.eigenvalues()[i];
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = sqrt_pi * v0 * v0;
    }
    return rule;
}

double normal_expectation(const std::function<double(double)>& f, double tol,
                          int start_nodes, int max_nodes) {
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    const double sqrt2 = std::sqrt(2.0);
    auto evaluate = [&](int m) {
        const QuadratureRule rule = gauss_hermite(m);
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            acc += rule.weights[i] * f(sqrt2 * rule.nodes[i]);
        }
        return inv_sqrt_pi * acc;
    };
    double prev = evaluate(start_nodes);
    for (int m = 2 * start_nodes; m <= max_nodes; m *= 2) {
        const double cur = evaluate(m);
        if (std::abs(cur - prev) < tol) {
            return cur;
        }
        prev = cur;
    }
    return prev;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) {
        throw NumericError("mean: empty vector");
    }
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) {
        throw NumericError("sample_sd: need at least two values");
    }
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace robustde
