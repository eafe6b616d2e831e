#pragma once

// Backend-generic functionals: energy pairing, Monge-Ampere operator and
// energy, Dirichlet functional, Thompson distance, omega-norms, submean
// constant, axiom verification. A backend ("model") provides
//
//   Scalar, Fn, Form, Meas
//   dim_n(), carrier_size()
//   ddc(Fn) -> Form
//   wedge(span<const Form>) -> Meas          (signed, n arguments)
//   in_cone(Form) / cone_violation(Form)
//   integrate(Fn, Meas) -> Scalar, total(Meas) -> Scalar
//   zero_fn(), zero_form()
//
// plus optional closed forms (omega_norm_closed, thompson_closed) and
// exact solvers used by the higher layers.

#include "pluri/errors.hpp"
#include "pluri/linalg.hpp"
#include "pluri/rng.hpp"

#include <span>
#include <string>
#include <vector>
#include <cmath>
#include <limits>

namespace pluri {

struct Tols {
    double identity = 1e-9;   // float-mode identity checks
    double lcp = 1e-10;       // envelope complementarity
    double env = 1e-10;       // toric envelope fixpoint
    double fd = 1e-6;         // finite-difference deviation
    double dual = 1e-8;       // duality residual for iterative solvers
    double ma = 1e-8;         // TV distance MA(phi*) vs mu
    int bisect_iters = 80;    // Thompson / omega-norm bisection
};

template <class M>
struct Pair {
    typename M::Form theta;
    typename M::Fn phi;
};

template <class M>
typename M::Scalar energy_pairing(const M& m, std::span<const Pair<M>> pairs) {
    using S = typename M::Scalar;
    const int n = m.dim_n();
    if (static_cast<int>(pairs.size()) != n + 1)
        throw ArityError("energy_pairing: expected n+1 pairs");
    S total = scalar_from_int<S>(0);
    // Eq-by-eq expansion, evaluated left to right.
    for (int i = 0; i <= n; ++i) {
        std::vector<typename M::Form> args;
        args.reserve(n);
        for (int j = 0; j < i; ++j) args.push_back(pairs[j].theta);
        for (int j = i + 1; j <= n; ++j) args.push_back(pairs[j].theta + m.ddc(pairs[j].phi));
        total += m.integrate(pairs[i].phi, m.wedge(args));
    }
    return total;
}

// Intersection number [theta_1] ... [theta_n] = total mass of the wedge.
template <class M>
typename M::Scalar class_product(const M& m, std::span<const typename M::Form> forms) {
    return m.total(m.wedge(forms));
}

template <class M>
typename M::Scalar volume(const M& m, const typename M::Form& omega) {
    std::vector<typename M::Form> v(static_cast<size_t>(m.dim_n()), omega);
    return class_product<M>(m, v);
}

template <class M>
typename M::Scalar power_pairing(const M& m, const typename M::Form& omega,
                                 const typename M::Fn& phi) {
    std::vector<Pair<M>> pairs(static_cast<size_t>(m.dim_n()) + 1, Pair<M>{omega, phi});
    return energy_pairing<M>(m, pairs);
}

// E_omega(phi) = (omega,phi)^{n+1} / ((n+1) V_omega), defined on all of D.
template <class M>
typename M::Scalar e_energy(const M& m, const typename M::Form& omega,
                            const typename M::Fn& phi) {
    using S = typename M::Scalar;
    S V = volume(m, omega);
    if (!(V > scalar_from_int<S>(0))) throw VolumeError("e_energy: V_omega <= 0");
    return power_pairing(m, omega, phi) / (scalar_from_int<S>(m.dim_n() + 1) * V);
}

template <class M>
typename M::Meas mu_omega(const M& m, const typename M::Form& omega) {
    using S = typename M::Scalar;
    std::vector<typename M::Form> v(static_cast<size_t>(m.dim_n()), omega);
    auto w = m.wedge(v);
    S V = m.total(w);
    if (!(V > scalar_from_int<S>(0))) throw VolumeError("mu_omega: V_omega <= 0");
    for (auto& x : w) x /= V;
    return w;
}

template <class M>
typename M::Meas ma(const M& m, const typename M::Form& omega, const typename M::Fn& phi) {
    using S = typename M::Scalar;
    auto om_phi = omega + m.ddc(phi);
    if (auto w = m.cone_violation(om_phi))
        throw ConeError("ma: phi is not omega-psh", *w);
    return mu_omega(m, om_phi);
}

// Dirichlet functional, computed through both routes of its definition; the
// two must agree (exactly in exact mode).
template <class M>
typename M::Scalar dirichlet_j(const M& m, const typename M::Form& omega,
                               const typename M::Fn& phi, const typename M::Fn& psi,
                               const Tols& tols = {}) {
    using S = typename M::Scalar;
    const int n = m.dim_n();
    S V = volume(m, omega);
    if (!(V > scalar_from_int<S>(0))) throw VolumeError("dirichlet_j: V_omega <= 0");

    // route 1: E(phi) - E(psi) + int (psi - phi) MA(phi)
    S r1 = e_energy(m, omega, phi) - e_energy(m, omega, psi) +
           m.integrate(psi - phi, ma(m, omega, phi));

    // route 2: V^{-1} sum_j (j+1)/(n+1) int (phi-psi) dd^c(psi-phi) ^ om_phi^j ^ om_psi^{n-1-j}
    auto om_phi = omega + m.ddc(phi);
    auto om_psi = omega + m.ddc(psi);
    auto ddc_diff = m.ddc(psi - phi);
    S r2 = scalar_from_int<S>(0);
    for (int j = 0; j <= n - 1; ++j) {
        std::vector<typename M::Form> args;
        args.push_back(ddc_diff);
        for (int k = 0; k < j; ++k) args.push_back(om_phi);
        for (int k = 0; k < n - 1 - j; ++k) args.push_back(om_psi);
        S term = m.integrate(phi - psi, m.wedge(args));
        r2 += scalar_from_ratio<S>(j + 1, n + 1) * term;
    }
    r2 /= V;

    if constexpr (is_exact_v<S>) {
        if (!(r1 == r2)) throw SolverError("dirichlet_j: route disagreement (exact)");
    } else {
        double gap = std::fabs(to_double(r1) - to_double(r2));
        double scale = std::max(1.0, std::fabs(to_double(r1)));
        if (gap > tols.identity * scale)
            throw SolverError("dirichlet_j: route disagreement " + std::to_string(gap));
    }
    return r1;
}

template <class M>
typename M::Scalar j_functional(const M& m, const typename M::Form& omega,
                                const typename M::Fn& phi) {
    // J_omega(phi) = J_omega(0, phi) = int phi d mu_omega - E_omega(phi)
    return m.integrate(phi, mu_omega(m, omega)) - e_energy(m, omega, phi);
}

inline double pos_inf() { return std::numeric_limits<double>::infinity(); }

// Thompson distance; closed form when the backend has one, bisection on the
// cone oracle otherwise.
template <class M>
double thompson_distance(const M& m, const typename M::Form& a, const typename M::Form& b,
                         const Tols& tols = {}) {
    if (!m.in_cone(a) || !m.in_cone(b))
        throw ConeError("thompson: both forms must lie in Z_+");
    if (auto cf = m.thompson_closed(a, b)) return *cf;
    if constexpr (requires { m.thompson_bisect(a, b, tols.bisect_iters); }) {
        return m.thompson_bisect(a, b, tols.bisect_iters);
    }
    return pos_inf();
}

// ||theta||_omega; nullopt encodes +infinity.
template <class M>
std::optional<typename M::Scalar> omega_norm(const M& m, const typename M::Form& theta,
                                             const typename M::Form& omega,
                                             const Tols& tols = {}) {
    if (!m.in_cone(omega)) throw ConeError("omega_norm: omega must lie in Z_+");
    if (auto cf = m.omega_norm_closed(theta, omega)) return cf;
    if constexpr (requires { m.omega_norm_bisect(theta, omega, tols.bisect_iters); }) {
        return m.omega_norm_bisect(theta, omega, tols.bisect_iters);
    }
    return std::nullopt;
}

template <class M>
typename M::Scalar submean_constant(const M& m, const typename M::Form& omega) {
    return m.submean_T(omega);
}

// ---- axiom verification -----------------------------------------------

struct AxiomViolation {
    std::string identity;
    int sample;
    std::string detail;
};

struct AxiomReport {
    int samples = 0;
    std::vector<AxiomViolation> violations;
    bool ok() const { return violations.empty(); }
};

template <class M>
AxiomReport verify_axioms(const M& m, int sample_count, uint64_t seed,
                          const Tols& tols = {}) {
    using S = typename M::Scalar;
    if (m.carrier_size() <= 0) throw ModelError("verify_axioms: degenerate model");
    AxiomReport rep;
    rep.samples = sample_count;
    Rng root(seed);
    const int n = m.dim_n();

    auto close = [&](const S& a, const S& b) {
        if constexpr (is_exact_v<S>) return a == b;
        else {
            double s = std::max({1.0, std::fabs(to_double(a)), std::fabs(to_double(b))});
            return std::fabs(to_double(a) - to_double(b)) <= tols.identity * s;
        }
    };

    {   // degenerate wedge screen: wedge of a spanning positive sample must be nonzero
        Rng r = root.split("degenerate", 0);
        bool nonzero = false;
        for (int k = 0; k < 8 && !nonzero; ++k) {
            std::vector<typename M::Form> args;
            for (int i = 0; i < n; ++i) args.push_back(m.sample_cone_form(r));
            if (!(m.total(m.wedge(args)) == scalar_from_int<S>(0))) nonzero = true;
        }
        if (!nonzero) throw ModelError("verify_axioms: wedge is identically zero on samples");
    }

    for (int k = 0; k < sample_count; ++k) {
        Rng r = root.split("axioms", static_cast<uint64_t>(k));
        auto phi = m.sample_fn(r);
        auto psi = m.sample_fn(r);
        std::vector<typename M::Form> Theta;
        for (int i = 0; i < n - 1; ++i) Theta.push_back(m.sample_cone_form(r));

        // dd^c vanishes on constants
        {
            auto c = m.zero_fn();
            for (auto& x : c) x = phi[0];
            auto z = m.ddc(c);
            auto args = Theta;
            args.push_back(z);
            S mass = m.total(m.wedge(std::span<const typename M::Form>(args)));
            S probe = m.integrate(psi, m.wedge(std::span<const typename M::Form>(args)));
            if (!close(mass, scalar_from_int<S>(0)) || !close(probe, scalar_from_int<S>(0)))
                rep.violations.push_back({"ddc_constant", k, "dd^c of a constant is not zero"});
        }

        // positivity of the wedge on cone forms
        {
            std::vector<typename M::Form> args;
            for (int i = 0; i < n; ++i) args.push_back(m.sample_cone_form(r));
            auto w = m.wedge(std::span<const typename M::Form>(args));
            for (size_t v = 0; v < w.size(); ++v) {
                bool neg;
                if constexpr (is_exact_v<S>) neg = w[v].sign() < 0;
                else neg = to_double(w[v]) < -tols.identity;
                if (neg) {
                    rep.violations.push_back({"wedge_positivity", k,
                                              "negative mass at point " + std::to_string(v)});
                    break;
                }
            }
        }

        // integration by parts
        {
            std::vector<typename M::Form> a1 = Theta, a2 = Theta;
            a1.insert(a1.begin(), m.ddc(psi));
            a2.insert(a2.begin(), m.ddc(phi));
            S lhs = m.integrate(phi, m.wedge(std::span<const typename M::Form>(a1)));
            S rhs = m.integrate(psi, m.wedge(std::span<const typename M::Form>(a2)));
            if (!close(lhs, rhs))
                rep.violations.push_back({"integration_by_parts", k,
                                          scalar_str(lhs) + " vs " + scalar_str(rhs)});
        }

        // seminegativity
        {
            std::vector<typename M::Form> args = Theta;
            args.insert(args.begin(), m.ddc(phi));
            S q = m.integrate(phi, m.wedge(std::span<const typename M::Form>(args)));
            bool bad;
            if constexpr (is_exact_v<S>) bad = q.sign() > 0;
            else bad = to_double(q) > tols.identity;
            if (bad)
                rep.violations.push_back({"seminegativity", k, "quadratic form = " + scalar_str(q)});
        }
    }
    return rep;
}

}  // namespace pluri
