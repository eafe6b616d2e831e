#pragma once

// Splittable counter-based randomness: every drawn value is a pure function
// of (root seed, stream label, counter), so ensembles are reproducible
// independently of evaluation order or threading.

#include "pluri/rational.hpp"

#include <cstdint>
#include <string>

namespace pluri {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dull)) {}

    // Deterministic substream for sample #index of a named ensemble.
    Rng split(uint64_t stream, uint64_t index) const {
        uint64_t s = state_;
        s = splitmix64(s ^ (0xa0761d6478bd642full ^ stream * 0xc2b2ae3d27d4eb4full));
        s = splitmix64(s ^ index);
        return Rng(raw_tag{}, s);
    }
    Rng split(const std::string& label, uint64_t index) const {
        uint64_t h = 1469598103934665603ull;
        for (char c : label) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ull;
        return split(h, index);
    }

    uint64_t next() {
        state_ = splitmix64(state_);
        return state_;
    }
    // Uniform in [0, n).
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }
    long long int_in(long long lo, long long hi) {  // inclusive bounds
        return lo + static_cast<long long>(below(static_cast<uint64_t>(hi - lo + 1)));
    }
    double real01() { return (next() >> 11) * 0x1.0p-53; }
    double real_in(double lo, double hi) { return lo + (hi - lo) * real01(); }
    bool coin() { return next() & 1; }

    // Small rationals: numerator in [-m, m], denominator in [1, d].
    Rat rat(long long m = 4, long long d = 4) {
        return Rat(int_in(-m, m), int_in(1, d));
    }
    Rat rat_pos(long long m = 4, long long d = 4) {
        return Rat(int_in(1, m), int_in(1, d));
    }
    // Roughly exponentially distributed positive rational (dyadic).
    Rat rat_exp() {
        double x = -std::log(1.0 - real01());
        long long q = 1 << 10;
        long long p = static_cast<long long>(x * static_cast<double>(q));
        return Rat(p + 1, q);
    }

private:
    struct raw_tag {};
    Rng(raw_tag, uint64_t s) : state_(s) {}
    uint64_t state_;
};

}  // namespace pluri
