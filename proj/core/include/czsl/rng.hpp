#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace czsl {

// All randomness in the library flows through Rng instances seeded by the
// caller. Distributions are implemented here instead of <random>'s
// distribution templates because the standard leaves their draw sequences
// implementation-defined; with a fixed engine (mt19937_64) and fixed draw
// logic, runs and checkpoints reproduce across compilers.
//
// Checkpoints record the algorithm tag below next to the serialized state.
inline constexpr const char* kRngAlgorithm = "mt19937_64-boxmuller-v1";

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log() argument.
    double uniform_open() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    double uniform_range(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Unbiased integer in [0, n) by rejection.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    // Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform_open();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::string serialize_state() const;
    void restore_state(const std::string& text);

private:
    std::mt19937_64 engine_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// Independent per-purpose streams derived from one master seed, so that
// consuming draws for one purpose (e.g. reservoir slots) never perturbs
// another (e.g. batch shuffling). Required for the baseline-identity
// contract: disabling replay must not change the training draw sequence.
struct RngSet {
    Rng dataset;     // synthetic data generation
    Rng split;       // task stream construction
    Rng model_init;  // weight initialization
    Rng training;    // batch shuffling and reparameterization noise
    Rng memory;      // reservoir slot selection
    Rng generation;  // latent/feature synthesis for the classifier
    Rng classifier;  // classifier init and shuffling

    static RngSet from_seed(std::uint64_t master);
};

} // namespace czsl
