#pragma once

// Exact maximization of a linear functional over {L phi <= omega} intersected
// with the energy ball {phi^T L phi <= 2 V R}, up to translation. Active-set
// enumeration over polytope faces; on each face the tangency point with the
// ellipsoid has coordinates in Q(sqrt(q)), so candidate values are quadratic
// surds and feasibility is decided exactly.
//
// This realizes dd_omega (sup over D_{omega,R} of a signed integral) on the
// graph backend.

#include "pluri/graph_model.hpp"

#include <optional>
#include <vector>

namespace pluri {

// a + b*sqrt(q), q >= 0 fixed per candidate
struct Surd {
    Rat a, b, q;

    double value() const {
        return a.to_double() + b.to_double() * std::sqrt(std::max(0.0, q.to_double()));
    }
    // exact rational value when the radical collapses
    std::optional<Rat> exact() const {
        if (b.is_zero() || q.is_zero()) return a;
        Rat root;
        if (q.perfect_square_sqrt(root)) return a + b * root;
        return std::nullopt;
    }
    // sign of (a + b sqrt(q)) - w, exact
    int cmp(const Rat& w) const {
        Rat t = a - w;
        if (b.is_zero() || q.is_zero()) return t.sign();
        if (b.sign() > 0) {
            if (t.sign() >= 0) return 1;
            // b sqrt(q) vs -t, both positive
            Rat lhs = b * b * q, rhs = t * t;
            return lhs == rhs ? 0 : (lhs > rhs ? 1 : -1);
        }
        if (t.sign() <= 0) return -1;
        Rat lhs = t * t, rhs = b * b * q;
        return lhs == rhs ? 0 : (lhs > rhs ? 1 : -1);
    }
};

namespace detail {

// Particular solution + null-space basis of A z = b (exact).
struct AffineSet {
    Vec<Rat> particular;
    std::vector<Vec<Rat>> null_basis;
};

inline std::optional<AffineSet> affine_solve(Mat<Rat> A, Vec<Rat> b) {
    size_t r = A.rows(), c = A.cols();
    std::vector<size_t> pivot_col;
    size_t row = 0;
    for (size_t col = 0; col < c && row < r; ++col) {
        size_t piv = row;
        while (piv < r && A(piv, col).is_zero()) ++piv;
        if (piv == r) continue;
        if (piv != row) {
            for (size_t j = 0; j < c; ++j) std::swap(A(piv, j), A(row, j));
            std::swap(b[piv], b[row]);
        }
        Rat inv = Rat(1) / A(row, col);
        for (size_t j = 0; j < c; ++j) A(row, j) *= inv;
        b[row] *= inv;
        for (size_t k = 0; k < r; ++k) {
            if (k == row || A(k, col).is_zero()) continue;
            Rat f = A(k, col);
            for (size_t j = 0; j < c; ++j) A(k, j) -= f * A(row, j);
            b[k] -= f * b[row];
        }
        pivot_col.push_back(col);
        ++row;
    }
    for (size_t k = row; k < r; ++k)
        if (!b[k].is_zero()) return std::nullopt;  // inconsistent
    AffineSet out;
    out.particular = vec_zero<Rat>(c);
    for (size_t k = 0; k < pivot_col.size(); ++k) out.particular[pivot_col[k]] = b[k];
    size_t pi = 0;
    for (size_t col = 0; col < c; ++col) {
        if (pi < pivot_col.size() && pivot_col[pi] == col) { ++pi; continue; }
        Vec<Rat> v = vec_zero<Rat>(c);
        v[col] = Rat(1);
        for (size_t k = 0; k < pivot_col.size(); ++k) v[pivot_col[k]] = -A(k, col);
        out.null_basis.push_back(std::move(v));
    }
    return out;
}

}  // namespace detail

struct QclpResult {
    Surd best{Rat(0), Rat(0), Rat(0)};
    bool found = false;
    Vec<Rat> witness_rational;  // maximizer when the optimum is rational
    bool witness_exact = false;
};

// max c^T phi  s.t.  L phi <= omega (rows),  phi^T L phi <= 2 V R,
// phi normalized by phi_0 = 0 (c must annihilate constants).
inline QclpResult qclp_max(const GraphModel<Rat>& m, const Vec<Rat>& omega,
                           const Vec<Rat>& c, const Rat& R) {
    const int N = m.carrier_size();
    const Mat<Rat>& L = m.laplacian();
    Rat V = vec_sum(omega);
    Rat ball = Rat(2) * V * R;

    if (N == 1) {
        QclpResult res;
        res.best = Surd{Rat(0), Rat(0), Rat(0)};
        res.found = true;
        res.witness_rational = vec_zero<Rat>(1);
        res.witness_exact = true;
        return res;
    }

    const int d = N - 1;  // coordinates z = phi_{1..N-1}, phi_0 = 0
    // A = L * E (rows x d), M = E^T L E, chat = c_{1..N-1}
    Mat<Rat> A(N, d);
    for (int v = 0; v < N; ++v)
        for (int j = 0; j < d; ++j) A(v, j) = L(v, j + 1);
    Mat<Rat> M(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) M(i, j) = L(i + 1, j + 1);
    Vec<Rat> chat(c.begin() + 1, c.end());

    auto quad = [&](const Vec<Rat>& z) {
        return dot(z, M.apply(z));
    };
    auto lift = [&](const Vec<Rat>& z) {
        Vec<Rat> phi = vec_zero<Rat>(N);
        for (int j = 0; j < d; ++j) phi[j + 1] = z[j];
        return phi;
    };

    QclpResult res;
    auto consider = [&](const Surd& val, const Vec<Rat>& zrat, bool rational_witness) {
        if (!res.found || val.value() > res.best.value() + 1e-15 ||
            (std::fabs(val.value() - res.best.value()) <= 1e-15 && rational_witness && !res.witness_exact)) {
            res.best = val;
            res.found = true;
            res.witness_exact = rational_witness;
            if (rational_witness) res.witness_rational = lift(zrat);
        }
    };

    const size_t subsets = size_t{1} << N;
    for (size_t mask = 0; mask < subsets; ++mask) {
        int sz = __builtin_popcountll(mask);
        if (sz > d) continue;
        Mat<Rat> As(sz, d);
        Vec<Rat> bs = vec_zero<Rat>(sz);
        int r = 0;
        for (int v = 0; v < N; ++v) {
            if (!(mask & (size_t{1} << v))) continue;
            for (int j = 0; j < d; ++j) As(r, j) = A(v, j);
            bs[r] = omega[v];
            ++r;
        }
        std::optional<detail::AffineSet> face;
        if (sz == 0) {
            detail::AffineSet all;
            all.particular = vec_zero<Rat>(d);
            for (int j = 0; j < d; ++j) {
                Vec<Rat> e = vec_zero<Rat>(d);
                e[j] = Rat(1);
                all.null_basis.push_back(std::move(e));
            }
            face = std::move(all);
        } else {
            face = detail::affine_solve(As, bs);
        }
        if (!face) continue;
        const Vec<Rat>& z0 = face->particular;
        const auto& D = face->null_basis;
        const int f = static_cast<int>(D.size());

        auto feasible_rows_rat = [&](const Vec<Rat>& z) {
            Vec<Rat> az = A.apply(z);
            for (int v = 0; v < N; ++v)
                if (az[v] > omega[v]) return false;
            return true;
        };

        if (f == 0) {
            if (quad(z0) <= ball && feasible_rows_rat(z0))
                consider(Surd{dot(chat, z0), Rat(0), Rat(0)}, z0, true);
            continue;
        }

        // H = D^T M D, g0 = D^T M z0, cD = D^T chat
        Mat<Rat> H(f, f);
        Vec<Rat> g0 = vec_zero<Rat>(f), cD = vec_zero<Rat>(f);
        std::vector<Vec<Rat>> MD(f);
        for (int i = 0; i < f; ++i) MD[i] = M.apply(D[i]);
        for (int i = 0; i < f; ++i) {
            for (int j = 0; j < f; ++j) H(i, j) = dot(D[i], MD[j]);
            g0[i] = dot(D[i], M.apply(z0));
            cD[i] = dot(D[i], chat);
        }
        auto hsol = solve_linear(H, -g0);
        if (!hsol) continue;  // H singular should not happen (M PD)
        const Vec<Rat>& h = *hsol;
        // center point zc = z0 + D h; radius^2 = ball - z0^T M z0 - h^T g0... careful:
        Rat constant = quad(z0);
        Rat hHh = Rat(0);
        for (int i = 0; i < f; ++i) hHh += h[i] * (-g0[i]);  // h^T H h = -h^T g0
        Rat cval = constant + Rat(2) * dot(h, g0) + hHh;      // quad at center
        Rat rho2 = ball - cval;
        if (rho2.sign() < 0) continue;

        Vec<Rat> zc = z0;
        for (int i = 0; i < f; ++i) zc = zc + h[i] * D[i];

        bool cD_zero = true;
        for (const auto& x : cD)
            if (!x.is_zero()) cD_zero = false;

        if (cD_zero) {
            if (feasible_rows_rat(zc))
                consider(Surd{dot(chat, zc), Rat(0), Rat(0)}, zc, true);
            continue;
        }

        auto hc = solve_linear(H, cD);
        if (!hc) continue;
        Rat g = dot(cD, *hc);  // c_D^T H^{-1} c_D > 0
        if (g.sign() <= 0) continue;
        // maximizer z* = zc + sqrt(rho2/g) * D H^{-1} cD; value = c^T zc + sqrt(rho2 * g)
        Rat q = rho2 * g;
        Surd val{dot(chat, zc), Rat(1), q};

        // direction vector w = D H^{-1} cD / g (so z* = zc + sqrt(q) * w / ... )
        // z*_j = zc_j + sqrt(rho2/g) * (D hc)_j = zc_j + (sqrt(q)/g) * (D hc)_j
        Vec<Rat> dir = vec_zero<Rat>(d);
        for (int i = 0; i < f; ++i) dir = dir + (*hc)[i] * D[i];
        // feasibility of remaining rows: A_v zc + (sqrt(q)/g) A_v dir <= omega_v
        bool ok = true;
        Vec<Rat> Azc = A.apply(zc), Adir = A.apply(dir);
        for (int v = 0; v < N && ok; ++v) {
            Surd row{Azc[v], Adir[v] / g, q};
            if (row.cmp(omega[v]) > 0) ok = false;
        }
        if (ok) {
            auto ex = val.exact();
            if (ex) {
                // rational witness: sqrt(q) rational
                Rat root;
                q.perfect_square_sqrt(root);
                Vec<Rat> zstar = zc;
                Rat tcoef = root / g;
                for (int j = 0; j < d; ++j) zstar[j] += tcoef * dir[j];
                consider(Surd{*ex, Rat(0), Rat(0)}, zstar, true);
            } else {
                consider(val, {}, false);
            }
        }
    }
    return res;
}

}  // namespace pluri
