#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace banlin {

// Deterministic randomness for reproducible experiments.
//
// Splitting rule: replicate k of an experiment with master seed S draws from
// a stream seeded with splitmix64(S ^ (k+1) * 0x9E3779B97F4A7C15). Streams
// are independent for distinct k and identical across runs and platforms;
// all samplers below are hand-rolled on top of mt19937_64 so no
// implementation-defined distribution code is involved.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static RngStream replicate(std::uint64_t master_seed, std::uint64_t replicate_index) {
        return RngStream(master_seed ^ ((replicate_index + 1) * 0x9E3779B97F4A7C15ULL));
    }

    std::uint64_t next_u64() { return engine_(); }

    double uniform01() {  // [0, 1), 53-bit resolution
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    int uniform_int(int n) {  // uniform in {0, ..., n-1}
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<int>(x % bound);
    }

    int sign() { return (engine_() & 1ULL) ? 1 : -1; }

    bool bernoulli(double p) { return uniform01() < p; }

    double gaussian() {  // Marsaglia polar
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // CDF-walk categorical draw over (possibly unnormalized) nonnegative
    // weights; walks indices in order, so a tie in the uniform draw resolves
    // to the lowest index.
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("categorical: weights must have positive mass");
        double u = uniform01() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace banlin
