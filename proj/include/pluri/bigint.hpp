#pragma once

// Arbitrary-precision signed integers, sign-magnitude over 32-bit limbs.
// Sized for exact linear algebra on small systems: schoolbook mul/div is
// plenty at the digit counts this library produces.

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>
#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <compare>

namespace pluri {

class BigInt {
public:
    BigInt() = default;
    BigInt(long long v) {
        if (v < 0) { neg_ = true; }
        unsigned long long m = neg_ ? (~static_cast<unsigned long long>(v) + 1ull)
                                    : static_cast<unsigned long long>(v);
        while (m) { limbs_.push_back(static_cast<uint32_t>(m)); m >>= 32; }
    }
    BigInt(int v) : BigInt(static_cast<long long>(v)) {}

    static BigInt from_decimal(const std::string& s) {
        BigInt r;
        size_t i = 0;
        bool neg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) { neg = (s[i] == '-'); ++i; }
        if (i >= s.size()) throw std::invalid_argument("BigInt: empty numeral");
        for (; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
            r.mul_small(10);
            r.add_small(static_cast<uint32_t>(s[i] - '0'));
        }
        r.neg_ = neg && !r.is_zero();
        return r;
    }

    bool is_zero() const { return limbs_.empty(); }
    bool negative() const { return neg_; }
    int sign() const { return is_zero() ? 0 : (neg_ ? -1 : 1); }
    bool is_one() const { return !neg_ && limbs_.size() == 1 && limbs_[0] == 1; }
    bool odd() const { return !limbs_.empty() && (limbs_[0] & 1u); }

    friend BigInt operator-(const BigInt& a) {
        BigInt r = a;
        if (!r.is_zero()) r.neg_ = !r.neg_;
        return r;
    }

    friend BigInt operator+(const BigInt& a, const BigInt& b) {
        if (a.neg_ == b.neg_) {
            BigInt r; r.limbs_ = add_mag(a.limbs_, b.limbs_); r.neg_ = a.neg_ && !r.is_zero();
            return r;
        }
        int c = cmp_mag(a.limbs_, b.limbs_);
        if (c == 0) return BigInt{};
        BigInt r;
        if (c > 0) { r.limbs_ = sub_mag(a.limbs_, b.limbs_); r.neg_ = a.neg_; }
        else       { r.limbs_ = sub_mag(b.limbs_, a.limbs_); r.neg_ = b.neg_; }
        if (r.is_zero()) r.neg_ = false;
        return r;
    }
    friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

    friend BigInt operator*(const BigInt& a, const BigInt& b) {
        if (a.is_zero() || b.is_zero()) return BigInt{};
        BigInt r;
        r.limbs_.assign(a.limbs_.size() + b.limbs_.size(), 0);
        for (size_t i = 0; i < a.limbs_.size(); ++i) {
            uint64_t carry = 0;
            uint64_t ai = a.limbs_[i];
            for (size_t j = 0; j < b.limbs_.size(); ++j) {
                uint64_t cur = r.limbs_[i + j] + ai * b.limbs_[j] + carry;
                r.limbs_[i + j] = static_cast<uint32_t>(cur);
                carry = cur >> 32;
            }
            size_t k = i + b.limbs_.size();
            while (carry) {
                uint64_t cur = r.limbs_[k] + carry;
                r.limbs_[k] = static_cast<uint32_t>(cur);
                carry = cur >> 32;
                ++k;
            }
        }
        r.trim();
        r.neg_ = (a.neg_ != b.neg_) && !r.is_zero();
        return r;
    }

    // Truncated quotient (rounds toward zero), matching C semantics.
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
        if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
        int c = cmp_mag(a.limbs_, b.limbs_);
        if (c < 0) { q = BigInt{}; r = a; return; }
        if (b.limbs_.size() == 1) {
            uint64_t d = b.limbs_[0], rem = 0;
            q.limbs_.assign(a.limbs_.size(), 0);
            for (size_t i = a.limbs_.size(); i-- > 0;) {
                uint64_t cur = (rem << 32) | a.limbs_[i];
                q.limbs_[i] = static_cast<uint32_t>(cur / d);
                rem = cur % d;
            }
            q.trim();
            r = BigInt{ static_cast<long long>(rem) };
        } else {
            // Knuth algorithm D.
            size_t n = b.limbs_.size(), m = a.limbs_.size() - n;
            int shift = 0;
            uint32_t top = b.limbs_[n - 1];
            while (!(top & 0x80000000u)) { top <<= 1; ++shift; }
            std::vector<uint32_t> u = shl_mag(a.limbs_, shift);
            std::vector<uint32_t> v = shl_mag(b.limbs_, shift);
            u.resize(a.limbs_.size() + 1, 0);
            std::vector<uint32_t> qd(m + 1, 0);
            const uint64_t base = 1ull << 32;
            for (size_t j = m + 1; j-- > 0;) {
                uint64_t num = (static_cast<uint64_t>(u[j + n]) << 32) | u[j + n - 1];
                uint64_t qhat = num / v[n - 1];
                uint64_t rhat = num % v[n - 1];
                while (qhat >= base ||
                       qhat * v[n - 2] > ((rhat << 32) | u[j + n - 2])) {
                    --qhat; rhat += v[n - 1];
                    if (rhat >= base) break;
                }
                // multiply-subtract
                int64_t borrow = 0; uint64_t carry = 0;
                for (size_t i = 0; i < n; ++i) {
                    uint64_t p = qhat * v[i] + carry;
                    carry = p >> 32;
                    int64_t t = static_cast<int64_t>(u[i + j]) - static_cast<int64_t>(p & 0xffffffffu) - borrow;
                    u[i + j] = static_cast<uint32_t>(t);
                    borrow = (t < 0) ? 1 : 0;
                }
                int64_t t = static_cast<int64_t>(u[j + n]) - static_cast<int64_t>(carry) - borrow;
                u[j + n] = static_cast<uint32_t>(t);
                if (t < 0) {
                    // qhat was one too large
                    --qhat;
                    uint64_t carry2 = 0;
                    for (size_t i = 0; i < n; ++i) {
                        uint64_t s = static_cast<uint64_t>(u[i + j]) + v[i] + carry2;
                        u[i + j] = static_cast<uint32_t>(s);
                        carry2 = s >> 32;
                    }
                    u[j + n] = static_cast<uint32_t>(u[j + n] + carry2);
                }
                qd[j] = static_cast<uint32_t>(qhat);
            }
            q.limbs_ = std::move(qd); q.trim();
            u.resize(n);
            r.limbs_ = shr_mag(u, shift); r.trim();
        }
        q.neg_ = (a.neg_ != b.neg_) && !q.is_zero();
        r.neg_ = a.neg_ && !r.is_zero();
    }

    friend BigInt operator/(const BigInt& a, const BigInt& b) {
        BigInt q, r; divmod(a, b, q, r); return q;
    }
    friend BigInt operator%(const BigInt& a, const BigInt& b) {
        BigInt q, r; divmod(a, b, q, r); return r;
    }

    friend bool operator==(const BigInt& a, const BigInt& b) {
        return a.neg_ == b.neg_ && a.limbs_ == b.limbs_;
    }
    friend std::strong_ordering operator<=>(const BigInt& a, const BigInt& b) {
        if (a.neg_ != b.neg_) return a.neg_ ? std::strong_ordering::less : std::strong_ordering::greater;
        int c = cmp_mag(a.limbs_, b.limbs_);
        if (a.neg_) c = -c;
        return c < 0 ? std::strong_ordering::less
             : c > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }

    static BigInt gcd(BigInt a, BigInt b) {
        a.neg_ = false; b.neg_ = false;
        while (!b.is_zero()) {
            BigInt q, r; divmod(a, b, q, r);
            a = std::move(b);
            b = std::move(r);
        }
        return a;
    }

    BigInt abs() const { BigInt r = *this; r.neg_ = false; return r; }

    // Floor of the square root of a nonnegative value.
    static BigInt isqrt(const BigInt& a) {
        if (a.negative()) throw std::domain_error("BigInt: isqrt of negative");
        if (a.is_zero() || a.is_one()) return a;
        BigInt x = a, y = (a + BigInt(1)) / BigInt(2);
        while (y < x) {
            x = y;
            y = (y + a / y) / BigInt(2);
        }
        return x;
    }

    double to_double() const {
        if (is_zero()) return 0.0;
        double m = 0.0;
        size_t n = limbs_.size();
        size_t take = std::min<size_t>(n, 3);  // 96 bits cover a double mantissa
        for (size_t i = 0; i < take; ++i)
            m = m * 4294967296.0 + static_cast<double>(limbs_[n - 1 - i]);
        double v = std::ldexp(m, static_cast<int>(32 * (n - take)));
        return neg_ ? -v : v;
    }

    std::string to_string() const {
        if (is_zero()) return "0";
        BigInt t = *this; t.neg_ = false;
        std::string digits;
        while (!t.is_zero()) {
            uint32_t rem = t.divmod_small(1000000000u);
            std::string chunk = std::to_string(rem);
            if (!t.is_zero()) chunk.insert(0, 9 - chunk.size(), '0');
            digits.insert(0, chunk);
        }
        if (neg_) digits.insert(0, 1, '-');
        return digits;
    }

    bool fits_longlong() const {
        if (limbs_.size() > 2) return false;
        unsigned long long m = mag_u64();
        return neg_ ? m <= 0x8000000000000000ull : m <= 0x7fffffffffffffffull;
    }
    long long to_longlong() const {
        unsigned long long m = mag_u64();
        return neg_ ? -static_cast<long long>(m) : static_cast<long long>(m);
    }

    size_t hash() const {
        size_t h = neg_ ? 0x9e3779b97f4a7c15ull : 0x2545f4914f6cdd1dull;
        for (uint32_t l : limbs_) h = h * 1099511628211ull ^ l;
        return h;
    }

private:
    std::vector<uint32_t> limbs_;  // little-endian, no trailing zero limb
    bool neg_ = false;

    void trim() { while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back(); if (limbs_.empty()) neg_ = false; }

    unsigned long long mag_u64() const {
        unsigned long long m = 0;
        for (size_t i = limbs_.size(); i-- > 0;) m = (m << 32) | limbs_[i];
        return m;
    }

    void mul_small(uint32_t f) {
        uint64_t carry = 0;
        for (auto& l : limbs_) {
            uint64_t cur = static_cast<uint64_t>(l) * f + carry;
            l = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry) limbs_.push_back(static_cast<uint32_t>(carry));
    }
    void add_small(uint32_t v) {
        uint64_t carry = v;
        for (size_t i = 0; carry && i < limbs_.size(); ++i) {
            uint64_t cur = limbs_[i] + carry;
            limbs_[i] = static_cast<uint32_t>(cur);
            carry = cur >> 32;
        }
        if (carry) limbs_.push_back(static_cast<uint32_t>(carry));
    }
    uint32_t divmod_small(uint32_t d) {
        uint64_t rem = 0;
        for (size_t i = limbs_.size(); i-- > 0;) {
            uint64_t cur = (rem << 32) | limbs_[i];
            limbs_[i] = static_cast<uint32_t>(cur / d);
            rem = cur % d;
        }
        trim();
        return static_cast<uint32_t>(rem);
    }

    static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
        if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
        for (size_t i = a.size(); i-- > 0;)
            if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
        return 0;
    }
    static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
        const auto& big = a.size() >= b.size() ? a : b;
        const auto& small = a.size() >= b.size() ? b : a;
        std::vector<uint32_t> r = big;
        uint64_t carry = 0;
        for (size_t i = 0; i < r.size(); ++i) {
            uint64_t cur = static_cast<uint64_t>(r[i]) + (i < small.size() ? small[i] : 0) + carry;
            r[i] = static_cast<uint32_t>(cur);
            carry = cur >> 32;
            if (!carry && i >= small.size()) break;
        }
        if (carry) r.push_back(static_cast<uint32_t>(carry));
        return r;
    }
    static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
        std::vector<uint32_t> r = a;
        int64_t borrow = 0;
        for (size_t i = 0; i < r.size(); ++i) {
            int64_t cur = static_cast<int64_t>(r[i]) - (i < b.size() ? b[i] : 0) - borrow;
            borrow = cur < 0 ? 1 : 0;
            r[i] = static_cast<uint32_t>(cur);
            if (!borrow && i >= b.size()) break;
        }
        while (!r.empty() && r.back() == 0) r.pop_back();
        return r;
    }
    static std::vector<uint32_t> shl_mag(std::vector<uint32_t> v, int s) {
        if (s == 0) return v;
        uint32_t carry = 0;
        for (auto& l : v) {
            uint32_t nc = l >> (32 - s);
            l = (l << s) | carry;
            carry = nc;
        }
        if (carry) v.push_back(carry);
        return v;
    }
    static std::vector<uint32_t> shr_mag(std::vector<uint32_t> v, int s) {
        if (s == 0) return v;
        uint32_t carry = 0;
        for (size_t i = v.size(); i-- > 0;) {
            uint32_t nc = v[i] << (32 - s);
            v[i] = (v[i] >> s) | carry;
            carry = nc;
        }
        while (!v.empty() && v.back() == 0) v.pop_back();
        return v;
    }
};

}  // namespace pluri
