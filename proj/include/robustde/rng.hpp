#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace robustde {

// Deterministic seed derivation (splitmix64 finalizer over the pair), so that
// nested streams like derive(derive(master, case_id), replicate) never collide
// in practice and are reproducible across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// mt19937_64 is fully specified by the standard, which keeps every draw
// byte-identical across compilers. uniform01 maps the top 53 bits into the
// open interval (0,1); normals come from quantile inversion so a single
// uniform is consumed per variate.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double normal();
    int bernoulli(double p);
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

  private:
    std::mt19937_64 engine_;
};

}  // namespace robustde
