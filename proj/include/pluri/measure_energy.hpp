#pragma once

// Energies of measures, maximizing sequences, the Dirichlet quasi-metric
// d_omega, the metric dd_omega, the extended energy (envelope route) and
// orthogonality bookkeeping. Everything is generic over the backend; the
// potential solve dispatches to the exact graph inverse when available and
// to the iterative cone-ascent otherwise.

#include "pluri/core.hpp"
#include "pluri/qclp.hpp"

#include <tuple>

namespace pluri {

template <class M>
struct EnergySolution {
    typename M::Meas mu;
    typename M::Fn phi_star;        // normalized by int phi d(mu_omega) = 0
    typename M::Scalar j_value;     // J_omega(mu), certified lower bound
    double residual = 0.0;          // duality gap bound (0 on exact backends)
    int iterations = 0;
};

// Solve for a potential with MA_omega(phi) = mu.
template <class M>
EnergySolution<M> solve_potential(const M& m, const typename M::Form& omega,
                                  const typename M::Meas& mu, const Tols& tols = {}) {
    using S = typename M::Scalar;
    EnergySolution<M> sol;
    sol.mu = mu;
    if constexpr (requires { m.ma_solve(omega, mu); }) {
        sol.phi_star = m.ma_solve(omega, mu);
        sol.iterations = 1;
        sol.residual = 0.0;
    } else {
        auto it = m.solve_potential_iterative(omega, mu, tols);
        sol.phi_star = it.phi;
        sol.iterations = it.iterations;
        sol.residual = it.residual;
        // normalize int phi d(mu_omega) = 0
        S shift = m.integrate(sol.phi_star, mu_omega(m, omega));
        for (auto& x : sol.phi_star) x -= shift;
    }
    sol.j_value = e_energy(m, omega, sol.phi_star) - m.integrate(sol.phi_star, mu);
    return sol;
}

template <class M>
EnergySolution<M> j_energy(const M& m, const typename M::Form& omega,
                           const typename M::Meas& mu, const Tols& tols = {}) {
    return solve_potential(m, omega, mu, tols);
}

// J_omega(mu, psi) = J_omega(mu) + int psi dmu - E_omega(psi)
template <class M>
typename M::Scalar j_energy_relative(const M& m, const typename M::Form& omega,
                                     const typename M::Meas& mu, const typename M::Fn& psi,
                                     const Tols& tols = {}) {
    auto sol = j_energy(m, omega, mu, tols);
    return sol.j_value + m.integrate(psi, mu) - e_energy(m, omega, psi);
}

// d_omega(mu, nu) = J_omega(phi_mu, phi_nu) for solved potentials.
template <class M>
typename M::Scalar quasi_metric(const M& m, const typename M::Form& omega,
                                const typename M::Meas& mu, const typename M::Meas& nu,
                                const Tols& tols = {}) {
    auto a = solve_potential(m, omega, mu, tols);
    auto b = solve_potential(m, omega, nu, tols);
    return dirichlet_j(m, omega, a.phi_star, b.phi_star, tols);
}

// dd_omega(mu, nu) = sup over D_{omega,1} of |int phi (mu - nu)|.
struct DdValue {
    double value = 0.0;
    bool exact = false;
    Rat exact_value;
};

inline DdValue dd_metric(const GraphModel<Rat>& m, const Vec<Rat>& omega,
                         const Vec<Rat>& mu, const Vec<Rat>& nu, const Rat& R = Rat(1)) {
    Vec<Rat> c = mu - nu;
    auto plus = qclp_max(m, omega, c, R);
    auto minus = qclp_max(m, omega, -c, R);
    const auto& win = plus.best.value() >= minus.best.value() ? plus : minus;
    DdValue out;
    out.value = win.best.value();
    if (auto ex = win.best.exact()) {
        out.exact = true;
        out.exact_value = *ex;
    }
    return out;
}

// sup over D_{omega,R} of int phi d(mu_omega - mu); Lemma "has finite energy".
inline DdValue sup_pairing_sublevel(const GraphModel<Rat>& m, const Vec<Rat>& omega,
                                    const Vec<Rat>& mu, const Rat& R) {
    Vec<Rat> c = mu_omega(m, omega) - mu;
    auto r = qclp_max(m, omega, c, R);
    DdValue out;
    out.value = r.best.value();
    if (auto ex = r.best.exact()) {
        out.exact = true;
        out.exact_value = *ex;
    }
    return out;
}

// Extended energy: sup of E_omega over psh minorants of f, attained by the
// envelope on finite backends.
template <class M>
typename M::Scalar e_tilde(const M& m, const typename M::Form& omega,
                           const typename M::Fn& f, const Tols& tols = {}) {
    auto env = m.envelope(omega, f, tols.lcp);
    return e_energy(m, omega, env);
}

template <class M>
typename M::Scalar orthogonality_defect(const M& m, const typename M::Form& omega,
                                        const typename M::Fn& f, const Tols& tols = {}) {
    auto env = m.envelope(omega, f, tols.lcp);
    return m.integrate(f - env, ma(m, omega, env));
}

// Maximizing sequence for mu: scaled approach to the exact potential, final
// iterate exact. Returns (psi_i, MA(psi_i), J(mu, psi_i)) with J nonincreasing.
template <class M>
std::vector<std::tuple<typename M::Fn, typename M::Meas, typename M::Scalar>>
maximizing_sequence(const M& m, const typename M::Form& omega,
                    const typename M::Meas& mu, int k, const Tols& tols = {}) {
    using S = typename M::Scalar;
    if (k < 1) throw ArityError("maximizing_sequence: k >= 1 required");
    auto sol = solve_potential(m, omega, mu, tols);
    std::vector<std::tuple<typename M::Fn, typename M::Meas, S>> out;
    for (int j = 1; j <= k; ++j) {
        S s = j == k ? scalar_from_int<S>(1)
                     : scalar_from_int<S>(1) - scalar_from_ratio<S>(1, 1ll << j);
        auto psi = s * sol.phi_star;
        auto img = ma(m, omega, psi);
        S jrel = sol.j_value + m.integrate(psi, mu) - e_energy(m, omega, psi);
        out.emplace_back(std::move(psi), std::move(img), jrel);
    }
    return out;
}

// J^+ bookkeeping: J + T_omega for both potentials and measures.
template <class M>
typename M::Scalar j_plus_fn(const M& m, const typename M::Form& omega,
                             const typename M::Fn& phi) {
    return j_functional(m, omega, phi) + m.submean_T(omega);
}
template <class M>
typename M::Scalar j_plus_measure(const M& m, const typename M::Form& omega,
                                  const typename M::Meas& mu, const Tols& tols = {}) {
    return j_energy(m, omega, mu, tols).j_value + m.submean_T(omega);
}

}  // namespace pluri
