#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace blocksel {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a base seed and a path of indices,
/// e.g. derive_seed(base, {point, replicate, method}).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = mix64(base);
    for (std::uint64_t p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Beta(a, b) draw via the ratio of two gamma variates.
inline double sample_beta(Rng& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

/// Pareto draw with density proportional to x^-alpha on [xmin, inf), alpha > 1.
inline double sample_power_law(Rng& rng, double xmin, double alpha) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = u(rng);
    while (v <= 0.0) v = u(rng);
    return xmin * std::pow(v, -1.0 / (alpha - 1.0));
}

}  // namespace blocksel
