#pragma once

// Small dense vectors/matrices over an arbitrary scalar, plus the exact
// solvers the backends need. Everything here is dimension <= a few dozen.

#include "pluri/scalar.hpp"

#include <vector>
#include <optional>
#include <stdexcept>
#include <span>

namespace pluri {

template <class S> using Vec = std::vector<S>;

template <class S> Vec<S> vec_zero(size_t n) { return Vec<S>(n, scalar_from_int<S>(0)); }

template <class S> Vec<S> operator+(const Vec<S>& a, const Vec<S>& b) {
    Vec<S> r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}
template <class S> Vec<S> operator-(const Vec<S>& a, const Vec<S>& b) {
    Vec<S> r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}
template <class S> Vec<S> operator*(const S& c, const Vec<S>& a) {
    Vec<S> r = a;
    for (auto& x : r) x *= c;
    return r;
}
template <class S> Vec<S> operator-(const Vec<S>& a) {
    return scalar_from_int<S>(-1) * a;
}

template <class S> S dot(const Vec<S>& a, const Vec<S>& b) {
    S r = scalar_from_int<S>(0);
    for (size_t i = 0; i < a.size(); ++i) r += a[i] * b[i];
    return r;
}
template <class S> S vec_sum(const Vec<S>& a) {
    S r = scalar_from_int<S>(0);
    for (const auto& x : a) r += x;
    return r;
}
template <class S> S vec_max(const Vec<S>& a) {
    S r = a.at(0);
    for (const auto& x : a)
        if (x > r) r = x;
    return r;
}
template <class S> S sup_abs(const Vec<S>& a) {
    S r = scalar_from_int<S>(0);
    for (const auto& x : a) {
        S v = scalar_abs(x);
        if (v > r) r = v;
    }
    return r;
}

template <class S>
class Mat {
public:
    Mat() = default;
    Mat(size_t r, size_t c) : rows_(r), cols_(c), a_(r * c, scalar_from_int<S>(0)) {}
    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    S& operator()(size_t i, size_t j) { return a_[i * cols_ + j]; }
    const S& operator()(size_t i, size_t j) const { return a_[i * cols_ + j]; }

    Vec<S> apply(const Vec<S>& x) const {
        Vec<S> y = vec_zero<S>(rows_);
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j)
                y[i] += (*this)(i, j) * x[j];
        return y;
    }

private:
    size_t rows_ = 0, cols_ = 0;
    Vec<S> a_;
};

// Gaussian elimination; returns nullopt when the system is singular or
// inconsistent. Pivoting on the first nonzero (exact) / largest (float).
template <class S>
std::optional<Vec<S>> solve_linear(Mat<S> A, Vec<S> b) {
    size_t n = A.rows();
    if (A.cols() != n || b.size() != n) throw std::invalid_argument("solve_linear: shape");
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        if constexpr (is_exact_v<S>) {
            while (piv < n && A(piv, col).is_zero()) ++piv;
            if (piv == n) return std::nullopt;
        } else {
            for (size_t r = col + 1; r < n; ++r)
                if (scalar_abs(A(r, col)) > scalar_abs(A(piv, col))) piv = r;
            if (scalar_abs(A(piv, col)) == 0.0) return std::nullopt;
        }
        if (piv != col) {
            for (size_t j = 0; j < n; ++j) std::swap(A(piv, j), A(col, j));
            std::swap(b[piv], b[col]);
        }
        for (size_t r = col + 1; r < n; ++r) {
            if constexpr (is_exact_v<S>) {
                if (A(r, col).is_zero()) continue;
            } else if (A(r, col) == 0.0) continue;
            S f = A(r, col) / A(col, col);
            for (size_t j = col; j < n; ++j) A(r, j) -= f * A(col, j);
            b[r] -= f * b[col];
        }
    }
    Vec<S> x = vec_zero<S>(n);
    for (size_t i = n; i-- > 0;) {
        S acc = b[i];
        for (size_t j = i + 1; j < n; ++j) acc -= A(i, j) * x[j];
        x[i] = acc / A(i, i);
    }
    return x;
}

// Null-space basis of an r x c matrix (exact scalars required for reliability;
// works for float on well-conditioned inputs).
template <class S>
std::vector<Vec<S>> null_space(Mat<S> A) {
    size_t r = A.rows(), c = A.cols();
    std::vector<size_t> pivot_col;
    size_t row = 0;
    for (size_t col = 0; col < c && row < r; ++col) {
        size_t piv = row;
        if constexpr (is_exact_v<S>) {
            while (piv < r && A(piv, col).is_zero()) ++piv;
            if (piv == r) continue;
        } else {
            for (size_t k = row + 1; k < r; ++k)
                if (scalar_abs(A(k, col)) > scalar_abs(A(piv, col))) piv = k;
            if (scalar_abs(A(piv, col)) <= 1e-12) continue;
        }
        if (piv != row)
            for (size_t j = 0; j < c; ++j) std::swap(A(piv, j), A(row, j));
        S inv = scalar_from_int<S>(1) / A(row, col);
        for (size_t j = 0; j < c; ++j) A(row, j) *= inv;
        for (size_t k = 0; k < r; ++k) {
            if (k == row) continue;
            S f = A(k, col);
            bool zero;
            if constexpr (is_exact_v<S>) zero = f.is_zero();
            else zero = (f == 0.0);
            if (zero) continue;
            for (size_t j = 0; j < c; ++j) A(k, j) -= f * A(row, j);
        }
        pivot_col.push_back(col);
        ++row;
    }
    std::vector<Vec<S>> basis;
    size_t pi = 0;
    for (size_t col = 0; col < c; ++col) {
        if (pi < pivot_col.size() && pivot_col[pi] == col) { ++pi; continue; }
        Vec<S> v = vec_zero<S>(c);
        v[col] = scalar_from_int<S>(1);
        for (size_t k = 0; k < pivot_col.size(); ++k) v[pivot_col[k]] = -A(k, col);
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace pluri
