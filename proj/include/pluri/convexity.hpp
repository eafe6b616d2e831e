#pragma once

// Appendix-A machinery on an abstract multilinear structure (V, pi, F, P):
// the Bregman gap delta, the comparable quantity d, and seeded ensembles
// measuring the worst constant of each inequality of the convexity theorem.

#include "pluri/graph_model.hpp"
#include "pluri/toric_model.hpp"
#include "pluri/core.hpp"

#include <functional>
#include <future>
#include <string>
#include <vector>
#include <cmath>

namespace pluri {

enum class Inequality {
    quasi_symmetry,
    quasi_triangle,
    quadratic,
    uniform_convexity,
    hold1,
    hold2,
    hold3,
};

inline const char* inequality_name(Inequality q) {
    switch (q) {
        case Inequality::quasi_symmetry: return "quasi_symmetry";
        case Inequality::quasi_triangle: return "quasi_triangle";
        case Inequality::quadratic: return "quadratic";
        case Inequality::uniform_convexity: return "uniform_convexity";
        case Inequality::hold1: return "hold1";
        case Inequality::hold2: return "hold2";
        case Inequality::hold3: return "hold3";
    }
    return "?";
}

inline std::optional<Inequality> inequality_from_name(const std::string& s) {
    for (Inequality q : {Inequality::quasi_symmetry, Inequality::quasi_triangle,
                         Inequality::quadratic, Inequality::uniform_convexity,
                         Inequality::hold1, Inequality::hold2, Inequality::hold3})
        if (s == inequality_name(q)) return q;
    return std::nullopt;
}

template <class S>
struct MultiFormStructure {
    int vector_dim = 0;
    int degree_n = 1;  // F has degree n+1
    std::string label;
    // relative tolerance for the delta/dapp cross-check (float structures on
    // consistency-mode backends need more room than algebraically exact ones)
    double route_tol = 1e-7;

    // symmetric (n+1)-linear evaluation on flat V-coordinates
    std::function<S(const std::vector<Vec<S>>&)> multi_eval;
    std::function<Vec<S>(const Vec<S>&)> projection;
    std::function<bool(const Vec<S>&)> cone;

    // sampling: a fiber element of P_theta, and a same-fiber partner
    std::function<Vec<S>(Rng&)> sample_cone;
    std::function<Vec<S>(const Vec<S>&, Rng&)> sample_fiber_mate;
    // canonical base point x_* of the fiber through the given element
    std::function<Vec<S>(const Vec<S>&)> base_in_fiber;

    S eval_power(const Vec<S>& x, int copies, const std::vector<Vec<S>>& rest) const {
        std::vector<Vec<S>> args(rest);
        for (int i = 0; i < copies; ++i) args.push_back(x);
        return multi_eval(args);
    }
    S F(const Vec<S>& x) const { return eval_power(x, degree_n + 1, {}); }
    // <F'(y), v> = (n+1) y^n . v
    S F_prime(const Vec<S>& y, const Vec<S>& v) const {
        std::vector<Vec<S>> args(static_cast<size_t>(degree_n), y);
        args.push_back(v);
        return scalar_from_int<S>(degree_n + 1) * multi_eval(args);
    }
    bool same_fiber(const Vec<S>& x, const Vec<S>& y) const {
        auto px = projection(x), py = projection(y);
        return px == py;
    }
};

// Construction-time positivity screen: x^2 x_2...x_n >= 0 for x in V_0, x_i in P.
template <class S>
void screen_posdef(const MultiFormStructure<S>& s, int samples, uint64_t seed) {
    Rng root(seed);
    for (int k = 0; k < samples; ++k) {
        Rng r = root.split("posdef", k);
        auto a = s.sample_cone(r);
        auto b = s.sample_fiber_mate(a, r);
        Vec<S> x = a - b;  // V_0 element
        std::vector<Vec<S>> rest;
        for (int i = 0; i < s.degree_n - 1; ++i) rest.push_back(s.sample_cone(r));
        S q = s.eval_power(x, 2, rest);
        bool neg;
        if constexpr (is_exact_v<S>) neg = q.sign() < 0;
        else neg = to_double(q) < -s.route_tol * std::max(1.0, std::fabs(to_double(q)));
        if (neg) throw ModelError("multiform structure: posdef screen failed");
    }
}

// delta(x,y) = F(x) - F(y) - <F'(y), x-y>, cross-checked against the
// expansion sum_j (j+1) (x-y)^2 y^j x^{n-1-j}.
template <class S>
S delta(const MultiFormStructure<S>& s, const Vec<S>& x, const Vec<S>& y) {
    if (!s.same_fiber(x, y)) throw ConeError("delta: fiber mismatch pi(x) != pi(y)");
    S r1 = s.F(x) - s.F(y) - s.F_prime(y, x - y);
    Vec<S> diff = x - y;
    S r2 = scalar_from_int<S>(0);
    for (int j = 0; j <= s.degree_n - 1; ++j) {
        std::vector<Vec<S>> rest;
        for (int i = 0; i < j; ++i) rest.push_back(y);
        for (int i = 0; i < s.degree_n - 1 - j; ++i) rest.push_back(x);
        r2 += scalar_from_int<S>(j + 1) * s.eval_power(diff, 2, rest);
    }
    if constexpr (is_exact_v<S>) {
        if (!(r1 == r2)) throw SolverError("delta: expansion disagreement (exact)");
    } else {
        double gap = std::fabs(to_double(r1) - to_double(r2));
        if (gap > s.route_tol * std::max(1.0, std::fabs(to_double(r1))))
            throw SolverError("delta: expansion disagreement");
    }
    return r1;
}

// expansion route only, for ensemble interiors (the delta op itself always
// cross-checks both routes)
template <class S>
S delta_fast(const MultiFormStructure<S>& s, const Vec<S>& x, const Vec<S>& y) {
    Vec<S> diff = x - y;
    S r = scalar_from_int<S>(0);
    for (int j = 0; j <= s.degree_n - 1; ++j) {
        std::vector<Vec<S>> rest;
        for (int i = 0; i < j; ++i) rest.push_back(y);
        for (int i = 0; i < s.degree_n - 1 - j; ++i) rest.push_back(x);
        r += scalar_from_int<S>(j + 1) * s.eval_power(diff, 2, rest);
    }
    return r;
}

template <class S>
S d_small(const MultiFormStructure<S>& s, const Vec<S>& x, const Vec<S>& y) {
    if (!s.same_fiber(x, y)) throw ConeError("d_small: fiber mismatch");
    if (!s.cone(x) || !s.cone(y)) throw ConeError("d_small: arguments must lie in P_theta");
    Vec<S> diff = x - y;
    S best = scalar_from_int<S>(0);
    bool first = true;
    for (int j = 0; j <= s.degree_n - 1; ++j) {
        std::vector<Vec<S>> rest;
        for (int i = 0; i < j; ++i) rest.push_back(y);
        for (int i = 0; i < s.degree_n - 1 - j; ++i) rest.push_back(x);
        S v = s.eval_power(diff, 2, rest);
        if (first || v > best) { best = v; first = false; }
    }
    return best;
}

struct EstimateReport {
    std::string inequality_id;
    double worst_ratio = 0.0;
    std::vector<std::vector<std::string>> witness;  // flat coords, stringified
    int ensemble_size = 0;
    int skipped = 0;
    double alpha_used = 0.0;
    std::string backend;
    int n = 1;
};

template <class S>
EstimateReport run_estimate_ensemble(const MultiFormStructure<S>& s, Inequality which,
                                     int sample_count, uint64_t seed) {
    screen_posdef(s, std::min(64, sample_count), seed ^ 0xabcd);
    const int n = s.degree_n;
    const double alpha = std::ldexp(1.0, -n);
    EstimateReport rep;
    rep.inequality_id = inequality_name(which);
    rep.ensemble_size = sample_count;
    rep.alpha_used = alpha;
    rep.backend = s.label;
    rep.n = n;

    Rng root(seed);

    struct Chunk {
        double worst = -1.0;
        long long worst_index = -1;
        std::vector<Vec<S>> witness;
        int skipped = 0;
    };

    auto run_chunk = [&](int lo, int hi) {
        Chunk chunk;
        auto record = [&](double ratio, std::vector<Vec<S>> wit, long long idx) {
            if (ratio > chunk.worst || (ratio == chunk.worst && idx < chunk.worst_index)) {
                chunk.worst = ratio;
                chunk.worst_index = idx;
                chunk.witness = std::move(wit);
            }
        };
        for (int k = lo; k < hi; ++k) {
            Rng r = root.split("estimate", k);
            auto x = s.sample_cone(r);
            auto y = s.sample_fiber_mate(x, r);
            if (k == 0) (void)delta(s, x, y);  // dual-route check once per ensemble
            switch (which) {
                case Inequality::quasi_symmetry: {
                    S a = delta_fast(s, x, y), b = delta_fast(s, y, x);
                    if (to_double(b) <= 0) { ++chunk.skipped; break; }
                    record(to_double(a) / to_double(b), {x, y}, k);
                    break;
                }
                case Inequality::quasi_triangle: {
                    auto z = s.sample_fiber_mate(x, r);
                    S num = delta_fast(s, x, z);
                    S den = delta_fast(s, x, y) + delta_fast(s, y, z);
                    if (to_double(den) <= 0) { ++chunk.skipped; break; }
                    record(to_double(num) / to_double(den), {x, y, z}, k);
                    break;
                }
                case Inequality::quadratic: {
                    long long kk = 1 + static_cast<long long>(r.below(10));
                    S t = scalar_from_ratio<S>(1, 1ll << kk);
                    S den = t * t * delta_fast(s, x, y);
                    if (to_double(den) <= 0) { ++chunk.skipped; break; }
                    Vec<S> mid = (scalar_from_int<S>(1) - t) * x + t * y;
                    record(to_double(delta_fast(s, x, mid)) / to_double(den), {x, y}, k);
                    break;
                }
                case Inequality::uniform_convexity: {
                    long long ti = 1 + static_cast<long long>(r.below(9));
                    S t = scalar_from_ratio<S>(ti, 10);
                    S gap = (scalar_from_int<S>(1) - t) * s.F(x) + t * s.F(y) -
                            s.F((scalar_from_int<S>(1) - t) * x + t * y);
                    S num = t * (scalar_from_int<S>(1) - t) * delta_fast(s, x, y);
                    if (to_double(gap) <= 0) { ++chunk.skipped; break; }
                    record(to_double(num) / to_double(gap), {x, y}, k);
                    break;
                }
                case Inequality::hold1: {
                    auto x1 = s.sample_fiber_mate(x, r);
                    auto y1 = s.sample_fiber_mate(x, r);
                    std::vector<Vec<S>> zs;
                    for (int i = 2; i <= n; ++i) zs.push_back(s.sample_fiber_mate(x, r));
                    std::vector<Vec<S>> args = zs;
                    args.push_back(x - y);
                    args.push_back(x1 - y1);
                    S lhs = scalar_abs(s.multi_eval(args));
                    double M = 0.0;
                    auto xstar = s.base_in_fiber(x);
                    std::vector<Vec<S>> members{x, y, x1, y1};
                    for (const auto& z : zs) members.push_back(z);
                    for (const auto& e : members)
                        M = std::max(M, to_double(delta_fast(s, e, xstar)));
                    double den = std::pow(to_double(delta_fast(s, x, y)), alpha) *
                                 std::pow(to_double(delta_fast(s, x1, y1)), alpha) *
                                 std::pow(M, 1 - 2 * alpha);
                    if (den <= 0) { ++chunk.skipped; break; }
                    record(to_double(lhs) / den, {x, y, x1, y1}, k);
                    break;
                }
                case Inequality::hold2: {
                    auto x1 = s.sample_fiber_mate(x, r);
                    auto y1 = s.sample_fiber_mate(x, r);
                    S lhs = scalar_abs(s.F_prime(x, x1 - y1) - s.F_prime(y, x1 - y1));
                    double M = 0.0;
                    auto xstar = s.base_in_fiber(x);
                    for (const auto& e : {x, y, x1, y1})
                        M = std::max(M, to_double(delta_fast(s, e, xstar)));
                    double den = std::sqrt(std::max(0.0, to_double(delta_fast(s, x, y)))) *
                                 std::pow(to_double(delta_fast(s, x1, y1)), alpha) *
                                 std::pow(M, 0.5 - alpha);
                    if (den <= 0) { ++chunk.skipped; break; }
                    record(to_double(lhs) / den, {x, y, x1, y1}, k);
                    break;
                }
                case Inequality::hold3: {
                    auto x1 = s.sample_fiber_mate(x, r);
                    auto y1 = s.sample_fiber_mate(x, r);
                    S lhs = scalar_abs(delta_fast(s, x, x1) - delta_fast(s, y, y1));
                    double M = 0.0;
                    auto xstar = s.base_in_fiber(x);
                    for (const auto& e : {x, y, x1, y1})
                        M = std::max(M, to_double(delta_fast(s, e, xstar)));
                    double mx = std::max(to_double(delta_fast(s, x, y)),
                                         to_double(delta_fast(s, x1, y1)));
                    double den = std::pow(mx, alpha) * std::pow(M, 1 - alpha);
                    if (den <= 0) { ++chunk.skipped; break; }
                    record(to_double(lhs) / den, {x, y, x1, y1}, k);
                    break;
                }
            }
        }
        return chunk;
    };

    // two deterministic chunks: samples are seeded by index, and the merge
    // prefers the higher ratio, then the lower sample index
    Chunk merged;
    if (sample_count >= 512) {
        int mid = sample_count / 2;
        auto fut = std::async(std::launch::async, run_chunk, mid, sample_count);
        Chunk a = run_chunk(0, mid);
        Chunk b = fut.get();
        merged = a;
        merged.skipped += b.skipped;
        if (b.worst > merged.worst ||
            (b.worst == merged.worst && b.worst_index < merged.worst_index)) {
            merged.worst = b.worst;
            merged.worst_index = b.worst_index;
            merged.witness = std::move(b.witness);
        }
    } else {
        merged = run_chunk(0, sample_count);
    }

    rep.skipped = merged.skipped;
    if (merged.worst < 0) throw SolverError("estimate ensemble: all samples degenerate");
    rep.worst_ratio = merged.worst;
    for (const auto& w : merged.witness) {
        std::vector<std::string> coords;
        for (const auto& c : w) coords.push_back(scalar_str(c));
        rep.witness.push_back(std::move(coords));
    }
    return rep;
}

// ---- concrete structures ---------------------------------------------------

// n=1 symmetric square on R^2 with projection to the first coordinate.
template <class S>
MultiFormStructure<S> structure_quadratic() {
    MultiFormStructure<S> s;
    s.vector_dim = 2;
    s.degree_n = 1;
    s.label = "quadratic";
    s.multi_eval = [](const std::vector<Vec<S>>& a) { return a[0][1] * a[1][1]; };
    s.projection = [](const Vec<S>& x) { return Vec<S>{x[0]}; };
    s.cone = [](const Vec<S>&) { return true; };
    s.sample_cone = [](Rng& r) {
        return Vec<S>{scalar_from_ratio<S>(r.int_in(-8, 8), 4),
                      scalar_from_ratio<S>(r.int_in(-8, 8), 4)};
    };
    s.sample_fiber_mate = [](const Vec<S>& x, Rng& r) {
        return Vec<S>{x[0], scalar_from_ratio<S>(r.int_in(-8, 8), 4)};
    };
    s.base_in_fiber = [](const Vec<S>& x) { return Vec<S>{x[0], scalar_from_int<S>(0)}; };
    return s;
}

// toy nonsymmetric-fiber example: F((a,b)) = b^2 + a b on R^2
template <class S>
MultiFormStructure<S> structure_toy_ab() {
    auto s = structure_quadratic<S>();
    s.label = "toy_ab";
    s.multi_eval = [](const std::vector<Vec<S>>& a) {
        const S half = scalar_from_ratio<S>(1, 2);
        return a[0][1] * a[1][1] + half * (a[0][0] * a[1][1] + a[0][1] * a[1][0]);
    };
    return s;
}

// The main instance: negative of the (unnormalized) energy pairing on a graph,
// V = Z x D with projection to Z and cone P = {(theta,phi) : theta_phi >= 0}.
inline MultiFormStructure<Rat> structure_energy_pairing(const GraphModel<Rat>& m,
                                                        Vec<Rat> omega_ref) {
    MultiFormStructure<Rat> s;
    const int N = m.carrier_size();
    s.vector_dim = 2 * N;
    s.degree_n = m.dim_n();
    s.label = "graph";

    auto theta_of = [N](const Vec<Rat>& v) { return Vec<Rat>(v.begin(), v.begin() + N); };
    auto phi_of = [N](const Vec<Rat>& v) { return Vec<Rat>(v.begin() + N, v.end()); };

    s.multi_eval = [m, N](const std::vector<Vec<Rat>>& args) {
        if (m.dim_n() == 1 && args.size() == 2) {
            // direct n=1 evaluation: -(int phi_0 (theta_1 + ddc phi_1) + int phi_1 theta_0)
            const Vec<Rat>& a = args[0];
            const Vec<Rat>& b = args[1];
            Vec<Rat> phi_b(b.begin() + N, b.end());
            Vec<Rat> lap = m.lap_apply_sparse(phi_b);
            Rat acc(0);
            for (int v = 0; v < N; ++v) {
                acc += a[N + v] * (b[v] - lap[v]);  // phi_a . (theta_b + ddc phi_b)
                acc += b[N + v] * a[v];             // phi_b . theta_a
            }
            return -acc;
        }
        std::vector<Pair<GraphModel<Rat>>> pairs;
        pairs.reserve(args.size());
        for (const auto& a : args)
            pairs.push_back({Vec<Rat>(a.begin(), a.begin() + N),
                             Vec<Rat>(a.begin() + N, a.end())});
        return -energy_pairing<GraphModel<Rat>>(m, pairs);
    };
    s.projection = theta_of;
    s.cone = [m, theta_of, phi_of](const Vec<Rat>& v) {
        return m.in_cone(theta_of(v) + m.ddc(phi_of(v)));
    };
    s.sample_cone = [m, omega_ref](Rng& r) {
        // exponential-ish positive combination of the spanning cone basis
        Vec<Rat> theta(m.carrier_size());
        for (int v = 0; v < m.carrier_size(); ++v)
            theta[v] = omega_ref[v] * r.rat_exp();
        Vec<Rat> phi = m.sample_psh(theta, r);
        Vec<Rat> out = theta;
        out.insert(out.end(), phi.begin(), phi.end());
        return out;
    };
    s.sample_fiber_mate = [m, theta_of](const Vec<Rat>& x, Rng& r) {
        Vec<Rat> theta = theta_of(x);
        Vec<Rat> phi = m.sample_psh(theta, r);
        Vec<Rat> out = theta;
        out.insert(out.end(), phi.begin(), phi.end());
        return out;
    };
    s.base_in_fiber = [N](const Vec<Rat>& x) {
        Vec<Rat> base(x.begin(), x.begin() + N);
        base.resize(2 * N, Rat(0));
        return base;
    };
    return s;
}

// n=2 instance over the toric backend: flat coordinates (Q | psi | phi).
// The wedge behind multi_eval is only asymptotically multilinear, so the
// delta cross-check runs at the backend's consistency tolerance.
// The structure holds a reference to the model; keep the model alive for the
// lifetime of the returned structure.
inline MultiFormStructure<double> structure_toric_pairing(const ToricModel& m) {
    MultiFormStructure<double> s;
    const ToricModel* mp = &m;
    const int nodes = m.carrier_size();
    s.vector_dim = 4 + 2 * nodes;
    s.degree_n = m.dim_n();
    s.label = "toric";
    s.route_tol = 0.35;  // measured delta/dapp gap ~0.12 at N=4 (consistency-mode wedge)

    auto form_of = [nodes](const Vec<double>& v) {
        ToricForm f;
        f.Q.assign(v.begin(), v.begin() + 4);
        f.psi.assign(v.begin() + 4, v.begin() + 4 + nodes);
        return f;
    };
    auto phi_of = [nodes](const Vec<double>& v) {
        return Vec<double>(v.begin() + 4 + nodes, v.end());
    };
    auto pack = [](const ToricForm& f, const Vec<double>& phi) {
        Vec<double> v = f.Q;
        v.insert(v.end(), f.psi.begin(), f.psi.end());
        v.insert(v.end(), phi.begin(), phi.end());
        return v;
    };

    s.multi_eval = [mp, form_of, phi_of](const std::vector<Vec<double>>& args) {
        std::vector<Pair<ToricModel>> pairs;
        for (const auto& a : args) pairs.push_back({form_of(a), phi_of(a)});
        return -energy_pairing<ToricModel>(*mp, pairs);
    };
    s.projection = [nodes](const Vec<double>& v) {
        return Vec<double>(v.begin(), v.begin() + 4 + nodes);
    };
    s.cone = [mp, form_of, phi_of](const Vec<double>& v) {
        return mp->in_cone(form_of(v) + mp->ddc(phi_of(v)));
    };
    s.sample_cone = [mp, pack](Rng& r) {
        ToricForm theta = mp->sample_cone_form(r);
        Vec<double> phi = mp->sample_psh(theta, r);
        return pack(theta, phi);
    };
    s.sample_fiber_mate = [mp, pack, form_of](const Vec<double>& x, Rng& r) {
        ToricForm theta = form_of(x);
        Vec<double> phi = mp->sample_psh(theta, r);
        return pack(theta, phi);
    };
    s.base_in_fiber = [nodes](const Vec<double>& x) {
        Vec<double> base(x.begin(), x.begin() + 4 + nodes);
        base.resize(4 + 2 * nodes, 0.0);
        return base;
    };
    return s;
}

}  // namespace pluri
