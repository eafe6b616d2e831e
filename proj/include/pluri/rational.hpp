#pragma once

// Exact rationals over BigInt, always reduced, denominator > 0.

#include "pluri/bigint.hpp"

#include <cmath>
#include <string>
#include <stdexcept>
#include <compare>

namespace pluri {

class Rat {
public:
    Rat() : num_(0), den_(1) {}
    Rat(long long v) : num_(v), den_(1) {}
    Rat(int v) : num_(v), den_(1) {}
    Rat(long long p, long long q) : num_(p), den_(q) { normalize(); }
    Rat(BigInt p, BigInt q) : num_(std::move(p)), den_(std::move(q)) { normalize(); }

    // Parses "p", "p/q", or a decimal like "-1.25".
    static Rat parse(const std::string& s) {
        auto slash = s.find('/');
        if (slash != std::string::npos) {
            return Rat(BigInt::from_decimal(s.substr(0, slash)),
                       BigInt::from_decimal(s.substr(slash + 1)));
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rat(BigInt::from_decimal(s), BigInt(1));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        BigInt den(1);
        for (size_t i = dot + 1; i < s.size(); ++i) den = den * BigInt(10);
        return Rat(BigInt::from_decimal(digits), den);
    }

    // Exact value of an IEEE double (must be finite).
    static Rat from_double(double x) {
        if (!std::isfinite(x)) throw std::domain_error("Rat: non-finite double");
        if (x == 0.0) return Rat();
        int e;
        double m = std::frexp(x, &e);          // x = m * 2^e, 0.5 <= |m| < 1
        long long mi = static_cast<long long>(std::ldexp(m, 53));
        e -= 53;
        BigInt num(mi), den(1);
        BigInt two(2);
        for (int i = 0; i < -e; ++i) den = den * two;
        for (int i = 0; i < e; ++i) num = num * two;
        return Rat(std::move(num), std::move(den));
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    int sign() const { return num_.sign(); }
    bool is_integer() const { return den_.is_one(); }

    friend Rat operator-(const Rat& a) { return Rat::raw(-a.num_, a.den_); }
    friend Rat operator+(const Rat& a, const Rat& b) {
        return Rat(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rat operator-(const Rat& a, const Rat& b) {
        return Rat(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rat operator*(const Rat& a, const Rat& b) {
        return Rat(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (b.is_zero()) throw std::domain_error("Rat: division by zero");
        return Rat(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rat& operator+=(const Rat& o) { *this = *this + o; return *this; }
    Rat& operator-=(const Rat& o) { *this = *this - o; return *this; }
    Rat& operator*=(const Rat& o) { *this = *this * o; return *this; }
    Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
        return (a.num_ * b.den_) <=> (b.num_ * a.den_);
    }

    Rat abs() const { return sign() < 0 ? -*this : *this; }

    double to_double() const {
        // Scale so the integer division carries full double precision.
        double n = num_.to_double(), d = den_.to_double();
        if (std::isfinite(n) && std::isfinite(d) && d != 0.0) {
            double q = n / d;
            if (std::isfinite(q) && std::fabs(q) > 1e-300) return q;
        }
        // Fallback for extreme magnitudes.
        BigInt q, r;
        BigInt::divmod(num_, den_, q, r);
        return q.to_double() + r.to_double() / den_.to_double();
    }

    // Exact rational square root, when one exists.
    bool perfect_square_sqrt(Rat& out) const {
        if (sign() < 0) return false;
        BigInt sn = BigInt::isqrt(num_), sd = BigInt::isqrt(den_);
        if (sn * sn == num_ && sd * sd == den_) {
            out = Rat::raw(sn, sd);
            return true;
        }
        return false;
    }

    std::string to_string() const {
        if (den_.is_one()) return num_.to_string();
        return num_.to_string() + "/" + den_.to_string();
    }

    size_t hash() const { return num_.hash() * 31 + den_.hash(); }

    static Rat pow_int(Rat base, long long e) {
        if (e < 0) { base = Rat(1) / base; e = -e; }
        Rat r(1);
        while (e) {
            if (e & 1) r *= base;
            base *= base;
            e >>= 1;
        }
        return r;
    }

private:
    BigInt num_, den_;

    static Rat raw(BigInt n, BigInt d) {
        Rat r;
        r.num_ = std::move(n);
        r.den_ = std::move(d);
        return r;
    }
    void normalize() {
        if (den_.is_zero()) throw std::domain_error("Rat: zero denominator");
        if (den_.negative()) { num_ = -num_; den_ = -den_; }
        if (num_.is_zero()) { den_ = BigInt(1); return; }
        BigInt g = BigInt::gcd(num_, den_);
        if (!g.is_one()) { num_ = num_ / g; den_ = den_ / g; }
    }
};

inline Rat abs(const Rat& r) { return r.abs(); }
inline double to_double(const Rat& r) { return r.to_double(); }
inline double to_double(double x) { return x; }

}  // namespace pluri
