#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <string>

namespace got {

// splitmix64 finalizer, used to derive independent stream seeds from a master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream));
}

// Deterministic RNG. All distributions are built by inverse transform on the raw
// mt19937_64 output (whose sequence is fixed by the standard), so a seed pins the
// exact draw sequence independent of the standard library's distribution objects.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), unbiased via rejection
    uint64_t uniform_int(uint64_t n) {
        assert(n > 0);
        const uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
        const uint64_t limit = UINT64_MAX - rem;        // largest accepted value
        uint64_t x = gen_();
        while (x > limit) x = gen_();
        return x % n;
    }

    // unit-mean exponential
    double exponential() { return -std::log1p(-uniform01()); }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // index sampled from an (unnormalized tolerance aside) probability vector;
    // walks the CDF, returning the last index if rounding leaves residual mass
    int sample_discrete(std::span<const double> probs) {
        double u = uniform01();
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // exact text round-trip of the engine state
    std::string state() const {
        std::ostringstream os;
        os << gen_;
        return os.str();
    }
    void restore(const std::string& s) {
        std::istringstream is(s);
        is >> gen_;
    }

    bool operator==(const Rng& other) const { return gen_ == other.gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace got
