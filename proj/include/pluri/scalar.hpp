#pragma once

// Scalar abstraction: the graph backend runs on exact Rat, the toric backend
// on double. Generic functionals are templated on the scalar and use these
// helpers where the two types differ.

#include "pluri/rational.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <type_traits>

namespace pluri {

template <class S> inline constexpr bool is_exact_v = std::is_same_v<S, Rat>;

template <class S> S scalar_from_int(long long v) {
    if constexpr (is_exact_v<S>) return Rat(v);
    else return static_cast<double>(v);
}

template <class S> S scalar_from_ratio(long long p, long long q) {
    if constexpr (is_exact_v<S>) return Rat(p, q);
    else return static_cast<double>(p) / static_cast<double>(q);
}

inline Rat scalar_abs(const Rat& x) { return x.abs(); }
inline double scalar_abs(double x) { return std::fabs(x); }

inline std::string scalar_str(const Rat& x) { return x.to_string(); }
inline std::string scalar_str(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline size_t scalar_hash(const Rat& x) { return x.hash(); }
inline size_t scalar_hash(double x) {
    uint64_t b;
    static_assert(sizeof(b) == sizeof(x));
    std::memcpy(&b, &x, sizeof(b));
    return static_cast<size_t>(b * 0x9e3779b97f4a7c15ull);
}

}  // namespace pluri
