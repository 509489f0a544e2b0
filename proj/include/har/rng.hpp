#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace har {

// Splittable deterministic RNG built on splitmix64. All distributions are
// derived from the raw 64-bit stream, so sequences are reproducible across
// compilers and platforms (std:: distributions are not).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Derive an independent stream; siblings are distinguished by key.
    Rng split(uint64_t key) const {
        Rng child(state_ ^ (0xD1B54A32D192ED03ull * (key + 0x632BE59BD9B4E019ull)));
        child.next_u64();
        return child;
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive range [lo, hi]. Modulo bias is negligible for our range sizes.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    // Uniform index in [0, n)
    size_t index(size_t n) { return static_cast<size_t>(next_u64() % n); }

    // Box-Muller; the spare variate is discarded to keep the stream position
    // independent of call history.
    double normal(double mean = 0.0, double sigma = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

} // namespace har
