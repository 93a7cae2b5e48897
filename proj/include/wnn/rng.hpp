#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace wnn {

// Deterministic random source. mt19937_64 has a standard-pinned output
// sequence, and every distribution here is implemented by hand on top of its
// raw 64-bit words, so a seed produces the same stream on every platform and
// standard library. Never use std::uniform_real_distribution or
// std::normal_distribution: their algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0,1) with 53 random bits, the full double mantissa.
    double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller. Consumes two uniforms per pair; the spare is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Poisson sample. Inverse-CDF accumulation for small means, normal
    // approximation (rounded, clipped at zero) for large ones where the exact
    // product would underflow.
    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) {
            double p = std::exp(-mean);
            double cdf = p;
            double u = uniform();
            std::uint64_t k = 0;
            while (u > cdf && k < 10000) {
                ++k;
                p *= mean / static_cast<double>(k);
                cdf += p;
            }
            return k;
        }
        double v = std::round(mean + std::sqrt(mean) * normal());
        return v < 0.0 ? 0 : static_cast<std::uint64_t>(v);
    }

    std::uint64_t index(std::uint64_t n) {
        // Rejection-free modulo is fine here: n is tiny versus 2^64, the
        // bias is below 2^-40 for any dataset size used in this project.
        return gen_() % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates, high to low.
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// splitmix64 finalizer. Used to derive independent stream seeds from a tuple
// of small integers without correlation between nearby tuples.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(a) ^ (b + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b) ^ (c + 0x9e3779b97f4a7c15ULL));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                              std::uint64_t d) {
    return mix_seed(mix_seed(a, b, c) ^ (d + 0x9e3779b97f4a7c15ULL));
}

}  // namespace wnn
