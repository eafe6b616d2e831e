#pragma once

// The n=1 graph backend. Carrier = vertices of a connected weighted graph,
// dd^c = -Laplacian, forms = vertex-weight vectors, the 1-fold wedge is the
// identity (a form already is a signed measure). Every axiom holds exactly
// in rational arithmetic, which makes this the oracle backend.

#include "pluri/errors.hpp"
#include "pluri/linalg.hpp"
#include "pluri/rng.hpp"

#include <optional>
#include <span>
#include <vector>
#include <cmath>
#include <limits>

namespace pluri {

struct GraphEdge {
    int i, j;
    Rat w;
};

struct GraphTopology {
    int vertex_count = 0;
    std::vector<GraphEdge> edges;
};

inline void validate_graph(const GraphTopology& g) {
    if (g.vertex_count <= 0) throw ModelError("graph: vertex_count must be positive");
    for (const auto& e : g.edges) {
        if (e.i < 0 || e.j < 0 || e.i >= g.vertex_count || e.j >= g.vertex_count || e.i == e.j)
            throw ModelError("graph: bad edge endpoints");
        if (e.w.sign() <= 0) throw ModelError("graph: edge weights must be positive");
    }
    // connectivity (the submean property needs it)
    std::vector<int> comp(g.vertex_count, -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : g.edges) {
            int u = e.i == v ? e.j : (e.j == v ? e.i : -1);
            if (u >= 0 && comp[u] < 0) { comp[u] = 0; stack.push_back(u); }
        }
    }
    for (int v = 0; v < g.vertex_count; ++v)
        if (comp[v] < 0) throw ModelError("graph: disconnected (vertex " + std::to_string(v) + ")");
}

template <class S>
class GraphModel {
public:
    using Scalar = S;
    using Fn = Vec<S>;
    using Form = Vec<S>;
    using Meas = Vec<S>;

    explicit GraphModel(GraphTopology g) : topo_(std::move(g)) {
        validate_graph(topo_);
        nv_ = topo_.vertex_count;
        lap_ = Mat<S>(nv_, nv_);
        for (const auto& e : topo_.edges) {
            S w;
            if constexpr (is_exact_v<S>) w = e.w;
            else w = e.w.to_double();
            lap_(e.i, e.i) += w;
            lap_(e.j, e.j) += w;
            lap_(e.i, e.j) -= w;
            lap_(e.j, e.i) -= w;
        }
    }

    int dim_n() const { return 1; }
    int carrier_size() const { return nv_; }
    const GraphTopology& topology() const { return topo_; }
    const Mat<S>& laplacian() const { return lap_; }

    Fn zero_fn() const { return vec_zero<S>(nv_); }
    Form zero_form() const { return vec_zero<S>(nv_); }

    Form ddc(const Fn& phi) const { return -lap_.apply(phi); }

    Meas wedge(std::span<const Form> thetas) const {
        if (thetas.size() != 1) throw ArityError("graph wedge: expected 1 form");
        return Meas(thetas[0].begin(), thetas[0].end());
    }

    bool in_cone(const Form& th) const { return !cone_violation(th).has_value(); }
    std::optional<int> cone_violation(const Form& th) const {
        for (int v = 0; v < nv_; ++v)
            if (th[v] < scalar_from_int<S>(0)) return v;
        return std::nullopt;
    }

    S integrate(const Fn& f, const Meas& mu) const { return dot(f, mu); }
    S total(const Meas& mu) const { return vec_sum(mu); }

    // [theta] in H_BC: the total mass (dd^c is divergence-form, mass 0).
    S cohomology_class(const Form& th) const { return vec_sum(th); }

    // flat coordinates, for content hashing
    const Vec<S>& form_coords(const Form& f) const { return f; }

    // edge-list Laplacian apply (cheaper than the dense matrix on sparse graphs)
    Vec<S> lap_apply_sparse(const Vec<S>& phi) const {
        Vec<S> out = vec_zero<S>(nv_);
        for (const auto& e : topo_.edges) {
            S w;
            if constexpr (is_exact_v<S>) w = e.w;
            else w = e.w.to_double();
            S d = w * (phi[e.i] - phi[e.j]);
            out[e.i] += d;
            out[e.j] -= d;
        }
        return out;
    }

    // ||theta||_omega = max_v |theta_v| / omega_v; nullopt encodes +infinity.
    std::optional<S> omega_norm_closed(const Form& theta, const Form& omega) const {
        S best = scalar_from_int<S>(0);
        for (int v = 0; v < nv_; ++v) {
            S a = scalar_abs(theta[v]);
            if (omega[v] == scalar_from_int<S>(0)) {
                if (a != scalar_from_int<S>(0)) return std::nullopt;
                continue;
            }
            S r = a / omega[v];
            if (r > best) best = r;
        }
        return best;
    }

    // d_T(a,b) = max_v |log(b_v/a_v)|; +infinity when supports differ.
    std::optional<double> thompson_closed(const Form& a, const Form& b) const {
        double best = 0.0;
        for (int v = 0; v < nv_; ++v) {
            bool az = a[v] == scalar_from_int<S>(0), bz = b[v] == scalar_from_int<S>(0);
            if (az != bz) return std::nullopt;
            if (az) continue;
            double r = std::fabs(std::log(to_double(b[v]) / to_double(a[v])));
            if (r > best) best = r;
        }
        return best;
    }

    // ---- exact solvers -------------------------------------------------

    // Solves MA_omega(phi) = mu: L phi = omega - V mu on constants^perp,
    // normalized by int phi d(mu_omega) = 0.
    Fn ma_solve(const Form& omega, const Meas& mu) const {
        S V = vec_sum(omega);
        if (!(V > scalar_from_int<S>(0))) throw VolumeError("graph ma_solve: V_omega <= 0");
        Vec<S> b = omega - V * mu;
        if constexpr (is_exact_v<S>) {
            if (!vec_sum(b).is_zero()) throw SolverError("graph ma_solve: inconsistent rhs");
        }
        Mat<S> A = lap_;
        Vec<S> rhs = b;
        for (int j = 0; j < nv_; ++j) A(0, j) = omega[j];  // mu_omega row (unnormalized)
        rhs[0] = scalar_from_int<S>(0);
        auto x = solve_linear(A, rhs);
        if (!x) throw SolverError("graph ma_solve: singular system");
        return *x;
    }

    // psh envelope: largest phi <= f with omega - L phi >= 0.
    // Exact active-set enumeration for nv <= exact_cap, projected
    // Gauss-Seidel in float mode.
    Fn envelope(const Form& omega, const Fn& f, double tol_lcp = 1e-10,
                int max_iter = 200000, int exact_cap = 12) const {
        if (!(vec_sum(omega) > scalar_from_int<S>(0)))
            throw VolumeError("graph envelope: omega must have positive total mass");
        if constexpr (is_exact_v<S>) {
            if (nv_ <= exact_cap) return envelope_exact(omega, f);
        }
        return envelope_psor(omega, f, tol_lcp, max_iter);
    }

    // T_omega as an exact finite family of LPs: for each candidate top vertex,
    // maximize phi_v - int phi d(mu_omega) over {L phi <= omega}.
    S submean_T(const Form& omega) const {
        S V = vec_sum(omega);
        if (!(V > scalar_from_int<S>(0))) throw VolumeError("graph submean: V_omega <= 0");
        if (nv_ == 1) return scalar_from_int<S>(0);
        S best = scalar_from_int<S>(0);
        for (int vstar = 0; vstar < nv_; ++vstar) {
            Vec<S> c = vec_zero<S>(nv_);
            c[vstar] = scalar_from_int<S>(1);
            for (int u = 0; u < nv_; ++u) c[u] -= omega[u] / V;
            // vertices of {L phi <= omega, phi_0 = 0}: drop one row of L
            for (int drop = 0; drop < nv_; ++drop) {
                Mat<S> A(nv_, nv_);
                Vec<S> rhs = vec_zero<S>(nv_);
                int r = 0;
                for (int row = 0; row < nv_; ++row) {
                    if (row == drop) continue;
                    for (int j = 0; j < nv_; ++j) A(r, j) = lap_(row, j);
                    rhs[r] = omega[row];
                    ++r;
                }
                A(r, 0) = scalar_from_int<S>(1);  // phi_0 = 0
                auto x = solve_linear(A, rhs);
                if (!x) continue;
                Vec<S> lx = lap_.apply(*x);
                if (lx[drop] > omega[drop]) continue;  // infeasible vertex
                S val = dot(c, *x);
                if (val > best) best = val;
            }
        }
        return best;
    }

    // ---- sampling ------------------------------------------------------

    Fn sample_fn(Rng& rng, long long mag = 4, long long den = 4) const {
        Fn f(nv_);
        for (auto& x : f) {
            Rat r = rng.rat(mag, den);
            if constexpr (is_exact_v<S>) x = r;
            else x = r.to_double();
        }
        return f;
    }

    Form sample_cone_form(Rng& rng) const {
        Form th(nv_);
        for (auto& x : th) {
            Rat r = rng.below(6) == 0 ? Rat(0) : rng.rat_pos(6, 4);
            if constexpr (is_exact_v<S>) x = r;
            else x = r.to_double();
        }
        if (vec_sum(th) == scalar_from_int<S>(0)) th[0] = scalar_from_int<S>(1);
        return th;
    }

    Form sample_commensurable(const Form& omega, Rng& rng, long long spread = 2) const {
        Form th(nv_);
        for (int v = 0; v < nv_; ++v) {
            Rat r(rng.int_in(1, spread), rng.int_in(1, spread));
            if constexpr (is_exact_v<S>) th[v] = omega[v] * r;
            else th[v] = omega[v] * r.to_double();
        }
        return th;
    }

    // Random omega-psh function via scaling toward the cone.
    Fn sample_psh(const Form& omega, Rng& rng) const {
        Fn phi = sample_fn(rng);
        Vec<S> g = lap_.apply(phi);
        S tmax = scalar_from_int<S>(-1);
        for (int v = 0; v < nv_; ++v) {
            if (g[v] > scalar_from_int<S>(0)) {
                S t = omega[v] / g[v];
                if (tmax < scalar_from_int<S>(0) || t < tmax) tmax = t;
            }
        }
        S scale;
        Rat u(rng.int_in(0, 8), 8);
        if constexpr (is_exact_v<S>) scale = u;
        else scale = u.to_double();
        if (tmax >= scalar_from_int<S>(0)) scale *= tmax;
        return scale * phi;
    }

    Meas sample_probability(Rng& rng, bool allow_sparse = true) const {
        Meas m(nv_);
        bool sparse = allow_sparse && rng.below(4) == 0 && nv_ > 1;
        for (int v = 0; v < nv_; ++v) {
            Rat r = (sparse && rng.coin()) ? Rat(0) : rng.rat_pos(8, 4);
            if constexpr (is_exact_v<S>) m[v] = r;
            else m[v] = r.to_double();
        }
        S tot = vec_sum(m);
        if (tot == scalar_from_int<S>(0)) { m[static_cast<int>(rng.below(nv_))] = scalar_from_int<S>(1); tot = scalar_from_int<S>(1); }
        for (auto& x : m) x /= tot;
        return m;
    }

private:
    GraphTopology topo_;
    int nv_ = 0;
    Mat<S> lap_;

    Fn envelope_exact(const Form& omega, const Fn& f) const {
        // Contact set C: phi = f on C; on the complement, omega - L phi = 0.
        size_t total = size_t{1} << nv_;
        for (size_t mask = total; mask-- > 0;) {
            if (mask == 0) continue;  // empty contact set cannot carry the mass
            Mat<S> A(nv_, nv_);
            Vec<S> rhs = vec_zero<S>(nv_);
            for (int v = 0; v < nv_; ++v) {
                if (mask & (size_t{1} << v)) {
                    A(v, v) = scalar_from_int<S>(1);
                    rhs[v] = f[v];
                } else {
                    for (int j = 0; j < nv_; ++j) A(v, j) = lap_(v, j);
                    rhs[v] = omega[v];
                }
            }
            auto x = solve_linear(A, rhs);
            if (!x) continue;
            bool ok = true;
            Vec<S> lx = lap_.apply(*x);
            for (int v = 0; v < nv_ && ok; ++v) {
                if ((*x)[v] > f[v]) ok = false;
                if (omega[v] - lx[v] < scalar_from_int<S>(0)) ok = false;
            }
            if (ok) return *x;
        }
        throw SolverError("graph envelope: no complementary solution found");
    }

    Fn envelope_psor(const Form& omega, const Fn& f, double tol, int max_iter) const {
        Fn phi = f;
        for (int it = 0; it < max_iter; ++it) {
            double resid = 0.0;
            for (int v = 0; v < nv_; ++v) {
                if (to_double(lap_(v, v)) == 0.0) { phi[v] = f[v]; continue; }
                S lv = scalar_from_int<S>(0);
                for (int j = 0; j < nv_; ++j) lv += lap_(v, j) * phi[j];
                S cand = phi[v] + (omega[v] - lv) / lap_(v, v);
                S next = cand < f[v] ? cand : f[v];
                double dv = std::fabs(to_double(next) - to_double(phi[v]));
                resid = std::max(resid, dv);
                phi[v] = next;
            }
            if (resid <= tol) {
                // complementarity check
                Vec<S> lx = lap_.apply(phi);
                double defect = 0.0;
                for (int v = 0; v < nv_; ++v)
                    defect = std::max(defect,
                                      std::fabs(to_double(f[v] - phi[v]) * to_double(omega[v] - lx[v])));
                if (defect <= tol * 100) return phi;
            }
        }
        throw SolverError("graph envelope: PSOR did not converge");
    }
};

}  // namespace pluri
