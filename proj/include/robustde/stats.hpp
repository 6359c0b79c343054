#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace robustde {

double expit(double t);

// Standard normal distribution helpers. The quantile uses Wichura's AS241
// rational approximations (accurate to ~1e-15); the CDF goes through erfc so
// the two-sided p-value keeps precision far in the tail.
double normal_cdf(double z);
double inverse_normal_cdf(double p);
double two_sided_p(double z);

// Gauss-Hermite rule with physicists' weight exp(-t^2). Nodes/weights come
// from the Golub-Welsch eigendecomposition of the Jacobi matrix.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadratureRule gauss_hermite(int m);

// E[f(X)] for X ~ N(0,1), refining the node count (64, 128, ...) until two
// consecutive rules agree to `tol` or `max_nodes` is hit.
double normal_expectation(const std::function<double(double)>& f,
                          double tol = 1e-10, int start_nodes = 64,
                          int max_nodes = 1024);

double mean(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

}  // namespace robustde
