#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "robustde/dataset.hpp"
#include "robustde/glm.hpp"

namespace robustde {

struct FoldAssignment {
    std::vector<int> fold;  // fold id per row, in 0..K-1
    int K = 0;
};

// Permutes row indices (Fisher-Yates under the given seed) and cuts the
// permutation into K contiguous blocks of size floor(n/K) or ceil(n/K).
// Requires 2 <= K <= n.
FoldAssignment assign_folds(std::size_t n, int K, std::uint64_t seed);

// Full-sample plug-in mode: one fold that is its own training complement.
FoldAssignment single_fold(std::size_t n);

struct NuisanceFit {
    std::vector<LinearFit> outcome;     // one per fold
    std::vector<LogisticFit> exposure;  // one per fold
    std::vector<std::string> warnings;
};

// Fits the outcome and exposure working models on each fold's training
// complement (the whole sample when K == 1). Sampling weights, when present,
// enter every fit. A complement missing an exposure class raises DataError
// suggesting a smaller K.
NuisanceFit fit_nuisances(const Dataset& d, const FoldAssignment& folds,
                          const NuisanceSpec& spec);

struct ScoreVector {
    Eigen::VectorXd phi;    // uncentered one-step scores
    Eigen::VectorXd delta;  // Q(1,W_i,X_i) - Q(0,W_i,X_i)
    Eigen::VectorXd g;      // clipped propensity P(A=1 | W_i, X_i)
};

// Evaluates held-out predictions and the doubly robust score for every row,
// using the fold model that did not train on that row.
ScoreVector score(const Dataset& d, const FoldAssignment& folds,
                  const NuisanceFit& fits, const NuisanceSpec& spec,
                  const ClipBounds& clip);

}  // namespace robustde
