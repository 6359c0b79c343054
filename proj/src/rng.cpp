#include "robustde/rng.hpp"

#include <numeric>

#include "robustde/errors.hpp"
#include "robustde/stats.hpp"

namespace robustde {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ull));
}

double Rng::uniform01() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return inverse_normal_cdf(uniform01()); }

int Rng::bernoulli(double p) { return uniform01() < p ? 1 : 0; }

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) {
        throw NumericError("Rng::below: n must be positive");
    }
    // Rejection sampling over the top bits keeps the draw unbiased.
    const std::uint64_t span = ~0ull - (~0ull % n);
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= span);
    return x % n;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace robustde
