#pragma once

// The discrete toric backend on a periodic grid over [0,1)^n, n in {1,2}.
// Forms are pairs (Q, psi): a constant-coefficient quadratic part (symmetric
// n x n matrix, housing the cohomology class) plus a dd^c-exact node part.
// The positivity cone is discrete convexity of the lifted function
// x -> x^T Q x / 2 + psi(x).
//
// n=1: the wedge is realized by second differences of the lift, which is
// exactly linear, so every axiom holds to rounding at any resolution; the
// backend is isomorphic to a weighted cycle graph and reuses its exact LP.
//
// n=2: the wedge of cone forms is realized by subdifferential cells (built
// in exact rational arithmetic, so cell volumes tile to det Q exactly) and
// Minkowski mixed areas; general arguments go through shift polarization.
// Integration by parts then holds only in the refinement limit, measured by
// the consistency report.

#include "pluri/core.hpp"
#include "pluri/graph_model.hpp"
#include "pluri/polygon.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <cmath>
#include <optional>
#include <span>

namespace pluri {

struct ToricForm {
    std::vector<double> Q;  // n*n row-major, symmetric
    Vec<double> psi;        // one value per node

    friend ToricForm operator+(const ToricForm& a, const ToricForm& b) {
        ToricForm r = a;
        for (size_t i = 0; i < r.Q.size(); ++i) r.Q[i] += b.Q[i];
        for (size_t i = 0; i < r.psi.size(); ++i) r.psi[i] += b.psi[i];
        return r;
    }
    friend ToricForm operator-(const ToricForm& a, const ToricForm& b) {
        ToricForm r = a;
        for (size_t i = 0; i < r.Q.size(); ++i) r.Q[i] -= b.Q[i];
        for (size_t i = 0; i < r.psi.size(); ++i) r.psi[i] -= b.psi[i];
        return r;
    }
    friend ToricForm operator*(double c, const ToricForm& f) {
        ToricForm r = f;
        for (auto& q : r.Q) q *= c;
        for (auto& p : r.psi) p *= c;
        return r;
    }
};

class ToricModel {
public:
    using Scalar = double;
    using Fn = Vec<double>;
    using Meas = Vec<double>;
    using Form = ToricForm;

    ToricModel(int n, int N) : n_(n), N_(N) {
        if (n != 1 && n != 2) throw ModelError("toric: n must be 1 or 2");
        if (N < 3) throw ModelError("toric: resolution N >= 3 required");
        nodes_ = 1;
        for (int i = 0; i < n; ++i) nodes_ *= N;
        if (n_ == 1) {
            GraphTopology t;
            t.vertex_count = N_;
            for (int v = 0; v < N_; ++v) t.edges.push_back({v, (v + 1) % N_, Rat(N_)});
            cycle_ = std::make_shared<GraphModel<Rat>>(t);
        }
    }

    int dim_n() const { return n_; }
    int resolution() const { return N_; }
    int carrier_size() const { return nodes_; }

    Fn zero_fn() const { return vec_zero<double>(nodes_); }
    Form zero_form() const { return Form{std::vector<double>(n_ * n_, 0.0), zero_fn()}; }
    Form quadratic_form(double q00, double q01, double q11) const {
        if (n_ == 1) return Form{{q00}, zero_fn()};
        return Form{{q00, q01, q01, q11}, zero_fn()};
    }

    Form ddc(const Fn& phi) const {
        return Form{std::vector<double>(n_ * n_, 0.0), phi};
    }

    double integrate(const Fn& f, const Meas& mu) const {
        double s = 0;
        for (int v = 0; v < nodes_; ++v) s += f[v] * mu[v];
        return s;
    }
    double total(const Meas& mu) const {
        double s = 0;
        for (double m : mu) s += m;
        return s;
    }

    Vec<double> form_coords(const Form& f) const {
        Vec<double> out = f.Q;
        out.insert(out.end(), f.psi.begin(), f.psi.end());
        return out;
    }

    // cohomology class = the matrix part
    std::vector<double> cohomology_class(const Form& f) const { return f.Q; }

    // ---- wedge -------------------------------------------------------------

    Meas wedge(std::span<const Form> thetas) const {
        if (static_cast<int>(thetas.size()) != n_)
            throw ArityError("toric wedge: expected n forms");
        if (n_ == 1) return wedge1(thetas[0]);
        return wedge2(thetas[0], thetas[1]);
    }

    bool in_cone(const Form& th) const { return !cone_violation(th).has_value(); }

    std::optional<int> cone_violation(const Form& th) const {
        if (n_ == 1) {
            auto m = wedge1(th);
            double scale = std::max(1.0, std::fabs(th.Q[0]));
            for (int v = 0; v < nodes_; ++v)
                if (m[v] < -1e-12 * scale) return v;
            return std::nullopt;
        }
        bool qzero = th.Q[0] == 0 && th.Q[1] == 0 && th.Q[2] == 0 && th.Q[3] == 0;
        if (qzero) {
            // no quadratic part: the lift is periodic, convex only if constant
            for (int v = 1; v < nodes_; ++v)
                if (std::fabs(th.psi[v] - th.psi[0]) > 1e-12) return v;
            return std::nullopt;
        }
        // membership is scale invariant: normalize to unit trace first, which
        // keeps the cell geometry well conditioned near the cone boundary
        double trace = th.Q[0] + th.Q[3];
        double det = th.Q[0] * th.Q[3] - th.Q[1] * th.Q[2];
        if (!(trace > 0) || !(det > 1e-9 * trace * trace)) return -1;
        Form scaled = (2.0 / trace) * th;
        auto cells = build_cells(scaled, nullptr, Rat(1, 1000000000));
        if (!cells.ok) return cells.empty_at;
        return std::nullopt;
    }

    // ---- closed forms / bisection -------------------------------------------

    std::optional<double> thompson_closed(const Form& a, const Form& b) const {
        if (n_ != 1) return std::nullopt;
        auto ma_ = wedge1(a), mb_ = wedge1(b);
        double best = 0;
        for (int v = 0; v < nodes_; ++v) {
            bool az = std::fabs(ma_[v]) < 1e-14, bz = std::fabs(mb_[v]) < 1e-14;
            if (az != bz) return std::nullopt;  // treated as +infinity by caller
            if (az) continue;
            if (ma_[v] < 0 || mb_[v] < 0) return std::nullopt;
            best = std::max(best, std::fabs(std::log(mb_[v] / ma_[v])));
        }
        return best;
    }

    double thompson_bisect(const Form& a, const Form& b, int iters) const {
        auto pred = [&](double d) {
            double ep = std::exp(d), em = std::exp(-d);
            return in_cone(b - em * a) && in_cone(ep * a - b);
        };
        double hi = 1.0 / 64.0;
        int guard = 0;
        while (!pred(hi) && guard++ < 20) hi *= 2;
        if (guard >= 20) return pos_inf();
        double lo = 0;
        for (int i = 0; i < std::min(iters, 48); ++i) {
            double mid = (lo + hi) / 2;
            (pred(mid) ? hi : lo) = mid;
        }
        return hi;
    }

    std::optional<double> omega_norm_closed(const Form& theta, const Form& omega) const {
        if (n_ != 1) return std::nullopt;
        auto mt = wedge1(theta), mo = wedge1(omega);
        double best = 0;
        for (int v = 0; v < nodes_; ++v) {
            if (mo[v] <= 1e-14) {
                if (std::fabs(mt[v]) > 1e-12) return std::nullopt;
                continue;
            }
            best = std::max(best, std::fabs(mt[v]) / mo[v]);
        }
        return best;
    }

    double omega_norm_bisect(const Form& theta, const Form& omega, int iters) const {
        auto pred = [&](double c) {
            return in_cone(c * omega - theta) && in_cone(c * omega + theta);
        };
        double hi = 1.0 / 16.0;
        int guard = 0;
        while (!pred(hi) && guard++ < 24) hi *= 2;
        if (guard >= 24) throw ConeError("omega_norm: theta not omega-bounded");
        double lo = 0;
        for (int i = 0; i < std::min(iters, 48); ++i) {
            double mid = (lo + hi) / 2;
            (pred(mid) ? hi : lo) = mid;
        }
        return hi;
    }

    // ---- envelope ------------------------------------------------------------

    // Largest g <= f with (Q-lift of g) discretely convex.
    Fn envelope(const Form& theta, const Fn& f, double tol_env = 1e-10,
                int max_r = 0) const {
        Vec<double> lift(nodes_);
        for (int v = 0; v < nodes_; ++v) lift[v] = quad_at(theta.Q, v) + theta.psi[v] + f[v];
        Vec<double> env = (n_ == 1) ? envelope1(theta.Q[0], lift, tol_env)
                                    : envelope2(theta.Q, lift, tol_env, max_r);
        Fn g(nodes_);
        for (int v = 0; v < nodes_; ++v) g[v] = env[v] - quad_at(theta.Q, v) - theta.psi[v];
        return g;
    }

    // ---- potential solving -----------------------------------------------------

    struct IterSolution {
        Fn phi;
        double residual = 0.0;
        int iterations = 0;
    };

    IterSolution solve_potential_iterative(const Form& omega, const Meas& mu,
                                           const Tols& tols) const {
        if (n_ == 1) return solve_potential_cycle(omega, mu);
        return solve_potential_ascent(omega, mu, tols);
    }

    // ---- submean ---------------------------------------------------------------

    // n=1: exact LP on the isomorphic cycle graph. n=2: seeded lower estimate
    // (the discrete-convexity cone has no finite linear description).
    double submean_T(const Form& omega) const {
        if (n_ == 1) {
            auto m = wedge1(omega);
            Vec<Rat> om(nodes_);
            for (int v = 0; v < nodes_; ++v)
                om[v] = m[v] > 0 ? Rat::from_double(m[v]) : Rat(0);
            return cycle_->submean_T(om).to_double();
        }
        Rng rng(271828);
        auto momega = wedge(std::vector<Form>{omega, omega});
        double V = total(momega);
        if (V <= 0) throw VolumeError("toric submean: V <= 0");
        double best = 0;
        for (int k = 0; k < 48; ++k) {
            Rng r = rng.split("submean", k);
            auto phi = sample_psh(omega, r);
            double sup = phi[0], mean = 0;
            for (int v = 0; v < nodes_; ++v) {
                sup = std::max(sup, phi[v]);
                mean += phi[v] * momega[v] / V;
            }
            best = std::max(best, sup - mean);
        }
        return best;
    }

    // ---- sampling ---------------------------------------------------------------

    // dyadic-coarse node values keep the exact cell geometry small
    Fn sample_fn(Rng& rng, long long /*mag*/ = 4, long long /*den*/ = 4) const {
        Fn f(nodes_);
        int mode = static_cast<int>(rng.below(3));
        if (mode == 0) {
            for (auto& x : f) x = rng.int_in(-64, 64) / 64.0;
        } else {
            // smooth trig sample, quantized to 1/4096
            double a = rng.real_in(-1, 1), b = rng.real_in(-1, 1);
            int ka = 1 + static_cast<int>(rng.below(2));
            int kb = 1 + static_cast<int>(rng.below(2));
            double ph = rng.real_in(0.0, 6.283185307179586);
            for (int v = 0; v < nodes_; ++v) {
                auto [x, y] = coords(v);
                const double tau = 6.283185307179586;
                double val = a * std::cos(tau * ka * x + ph) +
                             (n_ == 2 ? b * std::sin(tau * kb * y) : 0.0);
                f[v] = std::round(val * 4096.0) / 4096.0;
            }
        }
        return f;
    }

    Form sample_cone_form(Rng& rng) const {
        Form th = zero_form();
        if (n_ == 1) {
            th.Q[0] = static_cast<double>(rng.int_in(1, 4));
        } else {
            double a = rng.int_in(2, 5), b = rng.int_in(2, 5);
            double c = rng.int_in(-2, 2) / 2.0;
            th.Q = {a, c, c, b};
        }
        Fn psi = sample_fn(rng);
        double scale = 0.25;
        for (int tries = 0; tries < 24; ++tries) {
            Form cand = th;
            for (int v = 0; v < nodes_; ++v) cand.psi[v] = scale * psi[v];
            if (in_cone(cand)) return cand;
            scale /= 2;
        }
        return th;  // pure PD quadratic is always in the cone
    }

    Fn sample_psh(const Form& omega, Rng& rng) const {
        Fn phi = sample_fn(rng);
        double scale = 0.5;
        for (int tries = 0; tries < 24; ++tries) {
            Fn cand(nodes_);
            for (int v = 0; v < nodes_; ++v) cand[v] = scale * phi[v];
            if (in_cone(omega + ddc(cand))) return cand;
            scale /= 2;
        }
        return zero_fn();
    }

    Meas sample_probability(Rng& rng, bool allow_sparse = true) const {
        Meas m(nodes_);
        bool sparse = allow_sparse && rng.below(4) == 0;
        double tot = 0;
        for (int v = 0; v < nodes_; ++v) {
            m[v] = (sparse && rng.coin()) ? 0.0 : static_cast<double>(rng.int_in(1, 16));
            tot += m[v];
        }
        if (tot == 0) { m[0] = 1; tot = 1; }
        for (auto& x : m) x /= tot;
        return m;
    }

    std::pair<double, double> coords(int v) const {
        if (n_ == 1) return {static_cast<double>(v) / N_, 0.0};
        return {static_cast<double>(v / N_) / N_, static_cast<double>(v % N_) / N_};
    }

    // consistency-mode integration-by-parts residual at this resolution
    double intpart_residual(const Form& Theta, const Fn& phi, const Fn& psi) const {
        std::vector<Form> a1, a2;
        a1.push_back(ddc(psi));
        a2.push_back(ddc(phi));
        for (int i = 0; i < n_ - 1; ++i) { a1.push_back(Theta); a2.push_back(Theta); }
        double lhs = integrate(phi, wedge(a1));
        double rhs = integrate(psi, wedge(a2));
        return std::fabs(lhs - rhs);
    }

private:
    struct CellSet;

    int n_, N_, nodes_;
    std::shared_ptr<GraphModel<Rat>> cycle_;           // n=1 exact twin
    mutable std::shared_ptr<CellSet> ref_cells_;       // cached cells of (I, 0)
    mutable std::mutex cache_mu_;
    mutable std::unordered_map<size_t, std::shared_ptr<CellSet>> cell_cache_;
    mutable std::unordered_map<size_t, Meas> wedge_cache_;

    size_t hash_form(const Form& f) const {
        size_t h = 1469598103934665603ull;
        for (double q : f.Q) h = (h ^ scalar_hash(q)) * 1099511628211ull;
        for (double p : f.psi) h = (h ^ scalar_hash(p)) * 1099511628211ull;
        return h;
    }

    double quad_at(const std::vector<double>& Q, int v) const {
        auto [x, y] = coords(v);
        if (n_ == 1) return 0.5 * Q[0] * x * x;
        return 0.5 * (Q[0] * x * x + 2 * Q[1] * x * y + Q[3] * y * y);
    }

    // ---- n = 1 ------------------------------------------------------------------

    // mass_v = q/N + N * (second difference of the periodic part), computed in
    // exact rationals so the masses tile to exactly q before the final rounding.
    Meas wedge1(const Form& th) const {
        Rat q = Rat::from_double(th.Q[0]);
        Vec<Rat> p(nodes_);
        for (int v = 0; v < nodes_; ++v) p[v] = Rat::from_double(th.psi[v]);
        Meas m(nodes_);
        Rat qN = q / Rat(N_);
        for (int v = 0; v < nodes_; ++v) {
            Rat d1 = p[(v + 1) % nodes_] - p[v];
            Rat d0 = p[v] - p[(v + nodes_ - 1) % nodes_];
            m[v] = (qN + Rat(N_) * (d1 - d0)).to_double();
        }
        return m;
    }

    Vec<double> envelope1(double q, const Vec<double>& lift, double tol) const {
        // lower convex hull of the equivariant extension over K periods,
        // extended until the middle period stabilizes
        auto run = [&](int K) {
            int lo = -K * N_, hi = (K + 1) * N_;
            std::vector<std::pair<double, double>> pts;
            for (int i = lo; i < hi; ++i) {
                double x = static_cast<double>(i) / N_;
                int v = ((i % N_) + N_) % N_;
                double xv = static_cast<double>(v) / N_;
                pts.push_back({x, lift[v] + 0.5 * q * (x * x - xv * xv)});
            }
            // monotone lower hull
            std::vector<std::pair<double, double>> h;
            for (const auto& p : pts) {
                while (h.size() >= 2) {
                    auto& a = h[h.size() - 2];
                    auto& b = h[h.size() - 1];
                    if ((b.second - a.second) * (p.first - a.first) >=
                        (p.second - a.second) * (b.first - a.first))
                        h.pop_back();
                    else
                        break;
                }
                h.push_back(p);
            }
            // evaluate hull at the middle period nodes
            Vec<double> env(nodes_);
            size_t seg = 0;
            for (int v = 0; v < nodes_; ++v) {
                double x = static_cast<double>(v) / N_;
                while (seg + 1 < h.size() && h[seg + 1].first < x - 1e-15) ++seg;
                if (seg + 1 >= h.size()) { env[v] = h.back().second; continue; }
                double t = (x - h[seg].first) / (h[seg + 1].first - h[seg].first);
                env[v] = h[seg].second + t * (h[seg + 1].second - h[seg].second);
            }
            return env;
        };
        Vec<double> env = run(2);
        for (int K = 4; K <= 16; K *= 2) {
            Vec<double> env2 = run(K);
            double diff = 0;
            for (int v = 0; v < nodes_; ++v) diff = std::max(diff, std::fabs(env2[v] - env[v]));
            env = std::move(env2);
            if (diff <= tol) return env;
        }
        throw SolverError("toric envelope (n=1): hull did not stabilize");
    }

    IterSolution solve_potential_cycle(const Form& omega, const Meas& mu) const {
        auto m = wedge1(omega);
        double V = total(m);
        if (V <= 0) throw VolumeError("toric solve: V <= 0");
        Vec<Rat> om(nodes_), rhs(nodes_);
        for (int v = 0; v < nodes_; ++v) {
            om[v] = Rat::from_double(m[v]);
            rhs[v] = Rat::from_double(mu[v]);
        }
        auto phi = cycle_->ma_solve(om, rhs);
        IterSolution out;
        out.phi.resize(nodes_);
        for (int v = 0; v < nodes_; ++v) out.phi[v] = phi[v].to_double();
        out.iterations = 1;
        out.residual = 0.0;
        return out;
    }

    // ---- n = 2 ------------------------------------------------------------------

    struct CellSet {
        std::vector<ConvexPoly> cells;
        bool ok = true;
        int empty_at = -1;
    };
    // (definition completes the forward declaration above)

    struct RatLift {
        std::array<Rat, 4> Q;
        Vec<Rat> p;  // periodic part at nodes
        std::array<double, 4> Qd;
        Vec<double> pd;
        int N;
        // lift at integer lattice point (i,j)
        Rat at(long long i, long long j) const {
            Rat x(i, N), y(j, N);
            Rat quad = (Q[0] * x * x + Rat(2) * Q[1] * x * y + Q[3] * y * y) / Rat(2);
            int ii = static_cast<int>(((i % N) + N) % N);
            int jj = static_cast<int>(((j % N) + N) % N);
            return quad + p[ii * N + jj];
        }
        double at_d(long long i, long long j) const {
            double x = static_cast<double>(i) / N, y = static_cast<double>(j) / N;
            int ii = static_cast<int>(((i % N) + N) % N);
            int jj = static_cast<int>(((j % N) + N) % N);
            return 0.5 * (Qd[0] * x * x + 2 * Qd[1] * x * y + Qd[3] * y * y) + pd[ii * N + jj];
        }
    };

    RatLift make_lift(const Form& th, const Fn* extra = nullptr) const {
        RatLift L;
        L.N = N_;
        L.Q = {Rat::from_double(th.Q[0]), Rat::from_double(th.Q[1]),
               Rat::from_double(th.Q[2]), Rat::from_double(th.Q[3])};
        L.Qd = {th.Q[0], th.Q[1], th.Q[2], th.Q[3]};
        L.p.resize(nodes_);
        L.pd.resize(nodes_);
        for (int v = 0; v < nodes_; ++v) {
            L.pd[v] = th.psi[v] + (extra ? (*extra)[v] : 0.0);
            L.p[v] = Rat::from_double(L.pd[v]);
        }
        return L;
    }

    // Subdifferential cell at node v: {s : s . (x_w - x_v) <= u_w - u_v}.
    // Local window plus a ring scan out to the quadratic-growth radius.
    ConvexPoly cell_at(const RatLift& L, int v, const Rat& slack) const {
        long long i = v / N_, j = v % N_;
        Rat uv = L.at(i, j) - slack;
        // initial box from the four axis neighbors
        Rat hx = Rat(N_) * (L.at(i + 1, j) - uv);
        Rat lx = Rat(-N_) * (L.at(i - 1, j) - uv);
        Rat hy = Rat(N_) * (L.at(i, j + 1) - uv);
        Rat ly = Rat(-N_) * (L.at(i, j - 1) - uv);
        if (lx > hx || ly > hy) return {};
        ConvexPoly cell;
        cell.v = {{lx, ly}, {hx, ly}, {hx, hy}, {lx, hy}};
        // canonical for degenerate boxes
        if (lx == hx || ly == hy) cell = convex_hull(cell.v);

        double uvd = uv.to_double();
        // double-precision screen: clip exactly only where the constraint is
        // near-active relative to the current cell
        auto screen_and_clip = [&](int di, int dj) {
            double c = L.at_d(i + di, j + dj) - uvd;
            double ax = static_cast<double>(di) / N_, ay = static_cast<double>(dj) / N_;
            double worst = -1e300;
            for (const auto& p : cell.v)
                worst = std::max(worst, p.x.to_double() * ax + p.y.to_double() * ay);
            if (worst <= c - 1e-9 * (1 + std::fabs(c) + std::fabs(worst))) return;
            cell = clip_halfplane(cell, Rat(di, N_), Rat(dj, N_),
                                  L.at(i + di, j + dj) - uv);
        };

        const int W = 3;
        for (int di = -W; di <= W && !cell.empty(); ++di)
            for (int dj = -W; dj <= W; ++dj) {
                if (di == 0 && dj == 0) continue;
                if (std::abs(di) <= 1 && dj == 0) continue;
                if (di == 0 && std::abs(dj) <= 1) continue;
                screen_and_clip(di, dj);
                if (cell.empty()) return cell;
            }
        if (cell.empty()) return cell;

        // ring certification: beyond the radius where the quadratic part of
        // the lift dominates, far constraints are slack
        double qxx = L.Q[0].to_double(), qxy = L.Q[1].to_double(), qyy = L.Q[3].to_double();
        double trace = qxx + qyy, det = qxx * qyy - qxy * qxy;
        double lmin = (trace > 0 && det > 0) ? det / trace : 0.0;
        if (lmin <= 0) throw ConeError("toric cells: quadratic part not positive definite");
        double osc = 0, pmin = 1e300, pmax = -1e300;
        for (const auto& pr : L.p) {
            double d = pr.to_double();
            pmin = std::min(pmin, d);
            pmax = std::max(pmax, d);
        }
        osc = pmax - pmin;
        auto [xv, yv] = coords(v);
        double cx = qxx * xv + qxy * yv, cy = qxy * xv + qyy * yv;  // Q x_v
        double dp = 0;
        for (const auto& p : cell.v) {
            double ddx = p.x.to_double() - cx, ddy = p.y.to_double() - cy;
            dp = std::max(dp, std::hypot(ddx, ddy));
        }
        dp = dp * 1.1 + 1e-9;
        double R0 = (std::sqrt(2.0) * dp + std::sqrt(2.0 * dp * dp + 4.0 * lmin * osc)) / lmin;
        int ring_hi = static_cast<int>(std::ceil(R0 * N_)) + 1;
        // near-degenerate quadratic parts would ask for astronomically wide
        // scans; the oracle floors those out, so a generous cap is safe
        ring_hi = std::min(ring_hi, std::max(3 * N_, 48));

        for (int ring = W + 1; ring <= ring_hi && !cell.empty(); ++ring) {
            for (int di = -ring; di <= ring; ++di) {
                for (int dj = -ring; dj <= ring; ++dj) {
                    if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
                    screen_and_clip(di, dj);
                    if (cell.empty()) return cell;
                }
            }
        }
        return cell;
    }

    // slack > 0 turns this into the tolerance cone oracle (cells only grow);
    // empty cells are recorded but do not abort: cells of any lift tile the
    // dual torus, non-extreme nodes simply carry zero mass.
    CellSet build_cells(const Form& th, const Fn* extra = nullptr,
                        const Rat& slack = Rat(0)) const {
        RatLift L = make_lift(th, extra);
        CellSet out;
        out.cells.resize(nodes_);
        for (int v = 0; v < nodes_; ++v) {
            out.cells[v] = cell_at(L, v, slack);
            if (out.cells[v].empty() && out.ok) {
                out.ok = false;
                out.empty_at = v;
            }
        }
        return out;
    }

    // smallest power-of-two multiple of the reference form pushing th into the
    // cone, seeded by a direct curvature estimate (axis/diagonal second
    // differences of the lift) and verified on the exact cells
    double cone_shift(const Form& th) const {
        Form ref = quadratic_form(1, 0, 1);
        auto convex_cells = [&](const Form& f) {
            if (!positive_definite(f.Q)) return false;
            return build_cells_cached(f)->ok;
        };
        if (convex_cells(th)) return 0.0;
        double need = 1e-300;
        auto at = [&](int i, int j) {
            double x = static_cast<double>(i) / N_, y = static_cast<double>(j) / N_;
            int ii = ((i % N_) + N_) % N_, jj = ((j % N_) + N_) % N_;
            return 0.5 * (th.Q[0] * x * x + 2 * th.Q[1] * x * y + th.Q[3] * y * y) +
                   th.psi[ii * N_ + jj];
        };
        for (int i = 0; i < N_; ++i)
            for (int j = 0; j < N_; ++j) {
                double c = at(i, j);
                for (auto [di, dj] : {std::pair{1, 0}, {0, 1}, {1, 1}, {1, -1}}) {
                    double sd = at(i + di, j + dj) - 2 * c + at(i - di, j - dj);
                    double quad = 0.5 * (di * di + dj * dj) / (N_ * static_cast<double>(N_));
                    if (sd < 0) need = std::max(need, -sd / quad);
                }
                need = std::max(need, -std::min({th.Q[0], th.Q[3],
                                                 th.Q[0] + th.Q[3] - 2 * std::fabs(th.Q[1])}));
            }
        double t = 1;
        while (t < need) t *= 2;
        for (; t <= (1 << 22); t *= 2) {
            if (convex_cells(th + t * ref)) return t;
        }
        throw ConeError("toric wedge: cannot shift form into the cone");
    }

    static bool positive_definite(const std::vector<double>& Q) {
        return Q[0] > 0 && Q[0] * Q[3] - Q[1] * Q[2] > 0;
    }

    Meas mixed_measure(const CellSet& A, const CellSet& B) const {
        Meas m(nodes_);
        bool diagonal = &A == &B;
        for (int v = 0; v < nodes_; ++v)
            m[v] = diagonal ? A.cells[v].area().to_double()
                            : mixed_area(A.cells[v], B.cells[v]).to_double();
        return m;
    }

    std::shared_ptr<CellSet> build_cells_cached(const Form& th) const {
        size_t h = hash_form(th);
        {
            std::lock_guard<std::mutex> lock(cache_mu_);
            auto it = cell_cache_.find(h);
            if (it != cell_cache_.end()) return it->second;
        }
        auto cells = std::make_shared<CellSet>(build_cells(th));
        std::lock_guard<std::mutex> lock(cache_mu_);
        if (cell_cache_.size() > 256) cell_cache_.clear();
        cell_cache_.emplace(h, cells);
        return cells;
    }

    Meas wedge2(const Form& f1, const Form& f2) const {
        size_t h1 = hash_form(f1), h2 = hash_form(f2);
        size_t key = h1 <= h2 ? h1 * 1000003 ^ h2 : h2 * 1000003 ^ h1;
        {
            std::lock_guard<std::mutex> lock(cache_mu_);
            auto it = wedge_cache_.find(key);
            if (it != wedge_cache_.end()) return it->second;
        }
        Meas result = wedge2_uncached(f1, f2);
        std::lock_guard<std::mutex> lock(cache_mu_);
        if (wedge_cache_.size() > 512) wedge_cache_.clear();
        wedge_cache_.emplace(key, result);
        return result;
    }

    Meas wedge2_uncached(const Form& f1, const Form& f2) const {
        double t1 = cone_shift(f1), t2 = cone_shift(f2);
        Form ref = quadratic_form(1, 0, 1);
        Form a = t1 ? f1 + t1 * ref : f1;
        Form b = t2 ? f2 + t2 * ref : f2;
        auto A = build_cells_cached(a);
        bool same = (f1.Q == f2.Q && f1.psi == f2.psi);
        auto B = same && t1 == t2 ? A : build_cells_cached(b);
        Meas out = mixed_measure(*A, *B);
        if (t1 || t2) {
            std::shared_ptr<CellSet> refc;
            {
                std::lock_guard<std::mutex> lock(cache_mu_);
                refc = ref_cells_;
            }
            if (!refc) {
                refc = std::make_shared<CellSet>(build_cells(ref));
                std::lock_guard<std::mutex> lock(cache_mu_);
                ref_cells_ = refc;
            }
            const CellSet& C = *refc;
            if (t1) {
                auto corr = mixed_measure(C, *B);
                for (int v = 0; v < nodes_; ++v) out[v] -= t1 * corr[v];
            }
            if (t2) {
                auto corr = mixed_measure(*A, C);
                for (int v = 0; v < nodes_; ++v) out[v] += -t2 * corr[v];
            }
            if (t1 && t2) {
                auto corr = mixed_measure(C, C);
                for (int v = 0; v < nodes_; ++v) out[v] += t1 * t2 * corr[v];
            }
        }
        return out;
    }

    // iterated local convex-hull projection, stencil radius extended until stable
    Vec<double> envelope2(const std::vector<double>& Q, const Vec<double>& lift,
                          double tol, int max_r) const {
        if (max_r == 0) max_r = std::max(3, N_ / 2);
        // periodic part as iteration variable
        Vec<double> p(nodes_);
        for (int v = 0; v < nodes_; ++v) p[v] = lift[v] - quad_halfxx(Q, v);

        auto value_at = [&](const Vec<double>& pp, long long i, long long j) {
            int ii = static_cast<int>(((i % N_) + N_) % N_);
            int jj = static_cast<int>(((j % N_) + N_) % N_);
            double x = static_cast<double>(i) / N_, y = static_cast<double>(j) / N_;
            return 0.5 * (Q[0] * x * x + 2 * Q[1] * x * y + Q[3] * y * y) + pp[ii * N_ + jj];
        };

        struct Rule {
            std::vector<std::pair<std::pair<int, int>, double>> terms;  // (offset, weight)
        };
        auto rules_for = [&](int r) {
            std::vector<Rule> rules;
            // opposite pairs along every direction in the window
            for (int di = -r; di <= r; ++di)
                for (int dj = -r; dj <= r; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (di < 0 || (di == 0 && dj < 0)) continue;  // canonical half
                    for (int am = 1; am * std::max(std::abs(di), std::abs(dj)) <= r; ++am)
                        for (int bm = 1; bm * std::max(std::abs(di), std::abs(dj)) <= r; ++bm) {
                            double wa = static_cast<double>(bm) / (am + bm);
                            Rule rule;
                            rule.terms.push_back({{am * di, am * dj}, wa});
                            rule.terms.push_back({{-bm * di, -bm * dj}, 1.0 - wa});
                            rules.push_back(std::move(rule));
                        }
                }
            // triangles with the node strictly inside (pairs do not give full
            // 2d convexity)
            std::vector<std::pair<int, int>> offs;
            for (int di = -r; di <= r; ++di)
                for (int dj = -r; dj <= r; ++dj)
                    if (di || dj) offs.push_back({di, dj});
            for (size_t a = 0; a < offs.size(); ++a)
                for (size_t b = a + 1; b < offs.size(); ++b)
                    for (size_t c = b + 1; c < offs.size(); ++c) {
                        double x1 = offs[a].first, y1 = offs[a].second;
                        double x2 = offs[b].first, y2 = offs[b].second;
                        double x3 = offs[c].first, y3 = offs[c].second;
                        double det = (x1 - x3) * (y2 - y3) - (x2 - x3) * (y1 - y3);
                        if (std::fabs(det) < 1e-12) continue;
                        double l1 = (-x3 * (y2 - y3) - (-y3) * (x2 - x3)) / det;
                        double l2 = (-y3 * (x1 - x3) - (-x3) * (y1 - y3)) / det;
                        double l3 = 1.0 - l1 - l2;
                        if (l1 <= 1e-9 || l2 <= 1e-9 || l3 <= 1e-9) continue;
                        Rule rule;
                        rule.terms.push_back({offs[a], l1});
                        rule.terms.push_back({offs[b], l2});
                        rule.terms.push_back({offs[c], l3});
                        rules.push_back(std::move(rule));
                    }
            return rules;
        };

        int r = 1;
        while (true) {
            auto rules = rules_for(r);
            for (int sweep = 0; sweep < 40 * N_; ++sweep) {
                double change = 0;
                for (int v = 0; v < nodes_; ++v) {
                    long long i = v / N_, j = v % N_;
                    double quadv = quad_halfxx(Q, v);
                    double best = p[v];
                    for (const auto& rule : rules) {
                        double cand = -quadv;
                        for (const auto& [off, w] : rule.terms)
                            cand += w * value_at(p, i + off.first, j + off.second);
                        best = std::min(best, cand);
                    }
                    change = std::max(change, p[v] - best);
                    p[v] = best;
                }
                if (change <= tol) break;
                if (sweep == 40 * N_ - 1)
                    throw SolverError("toric envelope (n=2): projection did not converge");
            }
            if (r >= max_r) break;
            // extend the stencil and test stability
            auto rules2 = rules_for(r + 1);
            bool stable = true;
            for (int v = 0; v < nodes_ && stable; ++v) {
                long long i = v / N_, j = v % N_;
                double quadv = quad_halfxx(Q, v);
                for (const auto& rule : rules2) {
                    double cand = -quadv;
                    for (const auto& [off, w] : rule.terms)
                        cand += w * value_at(p, i + off.first, j + off.second);
                    if (cand < p[v] - tol) { stable = false; break; }
                }
            }
            if (stable) break;
            ++r;
        }
        Vec<double> env(nodes_);
        for (int v = 0; v < nodes_; ++v) env[v] = p[v] + quad_halfxx(Q, v);
        return env;
    }

    double quad_halfxx(const std::vector<double>& Q, int v) const {
        auto [x, y] = coords(v);
        return 0.5 * (Q[0] * x * x + 2 * Q[1] * x * y + Q[3] * y * y);
    }

    IterSolution solve_potential_ascent(const Form& omega, const Meas& mu,
                                        const Tols& tols) const {
        std::vector<Form> pow2{omega, omega};
        double V = total(wedge(pow2));
        if (V <= 0) throw VolumeError("toric solve: V <= 0");
        auto ma_of = [&](const Fn& phi) {
            std::vector<Form> args{omega + ddc(phi), omega + ddc(phi)};
            Meas m = wedge(args);
            for (auto& x : m) x /= V;
            return m;
        };
        auto objective = [&](const Fn& phi) {
            return e_energy(*this, omega, phi) - integrate(phi, mu);
        };
        Fn phi = zero_fn();
        double G = objective(phi);
        double step = 0.5;
        int it = 0;
        double tv = 1e300;
        const int cap = 160;
        for (; it < cap; ++it) {
            Meas cur = ma_of(phi);
            tv = 0;
            for (int v = 0; v < nodes_; ++v) tv += std::fabs(cur[v] - mu[v]);
            tv /= 2;
            if (tv <= std::max(tols.ma, 1e-10)) break;
            Fn trial(nodes_);
            bool improved = false;
            for (int half = 0; half < 18 && !improved; ++half) {
                for (int v = 0; v < nodes_; ++v)
                    trial[v] = phi[v] + step * (cur[v] - mu[v]);
                Fn proj = envelope(omega, trial, tols.env);
                double Gp = objective(proj);
                if (Gp > G + 1e-14) {
                    phi = std::move(proj);
                    G = Gp;
                    improved = true;
                    step *= 1.5;
                } else {
                    step /= 2;
                }
            }
            if (!improved) break;
        }
        IterSolution out;
        out.phi = std::move(phi);
        out.iterations = it;
        out.residual = tv;
        return out;
    }
};

}  // namespace pluri
