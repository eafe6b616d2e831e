#pragma once

// Directional derivatives of the Monge-Ampere energy in the form variable,
// the twisted energy J_omega^theta on measures, and the finite-difference
// verification of differentiability.

#include "pluri/measure_energy.hpp"

#include <map>
#include <mutex>
#include <unordered_map>

namespace pluri {

// E_omega^theta(phi) = V^{-1} (theta,0) . (omega,phi)^n
template <class M>
typename M::Scalar e_energy_twisted(const M& m, const typename M::Form& omega,
                                    const typename M::Form& theta, const typename M::Fn& phi) {
    using S = typename M::Scalar;
    const int n = m.dim_n();
    S V = volume(m, omega);
    if (!(V > scalar_from_int<S>(0))) throw VolumeError("e_energy_twisted: V_omega <= 0");
    std::vector<Pair<M>> pairs;
    pairs.push_back({theta, m.zero_fn()});
    for (int i = 0; i < n; ++i) pairs.push_back({omega, phi});
    return energy_pairing<M>(m, pairs) / V;
}

// V_omega^theta = n [theta].[omega]^{n-1} / V_omega
template <class M>
typename M::Scalar v_theta(const M& m, const typename M::Form& omega,
                           const typename M::Form& theta) {
    using S = typename M::Scalar;
    const int n = m.dim_n();
    S V = volume(m, omega);
    std::vector<typename M::Form> forms;
    forms.push_back(theta);
    for (int i = 0; i < n - 1; ++i) forms.push_back(omega);
    return scalar_from_int<S>(n) * class_product<M>(m, forms) / V;
}

// nabla_theta E_omega(phi) = E^theta(phi) - V^theta E(phi); translation invariant.
template <class M>
typename M::Scalar nabla_e(const M& m, const typename M::Form& omega,
                           const typename M::Form& theta, const typename M::Fn& phi) {
    return e_energy_twisted(m, omega, theta, phi) -
           v_theta(m, omega, theta) * e_energy(m, omega, phi);
}

// Independent route for exact backends: expand E_{omega + t theta}(phi) as a
// ratio of polynomials in t via multilinearity and differentiate at 0.
template <class M>
typename M::Scalar nabla_e_symbolic(const M& m, const typename M::Form& omega,
                                    const typename M::Form& theta, const typename M::Fn& phi) {
    using S = typename M::Scalar;
    const int n = m.dim_n();
    // P(t) = sum_k C(n+1,k) t^k (theta,0)^k (omega,phi)^{n+1-k}
    auto mixed_pairing = [&](int k) {
        std::vector<Pair<M>> pairs;
        for (int i = 0; i < k; ++i) pairs.push_back({theta, m.zero_fn()});
        for (int i = k; i <= n; ++i) pairs.push_back({omega, phi});
        return energy_pairing<M>(m, pairs);
    };
    auto mixed_class = [&](int k) {
        std::vector<typename M::Form> forms;
        for (int i = 0; i < k; ++i) forms.push_back(theta);
        for (int i = k; i < n; ++i) forms.push_back(omega);
        return class_product<M>(m, forms);
    };
    S P0 = mixed_pairing(0);
    S P1 = scalar_from_int<S>(n + 1) * mixed_pairing(1);
    S V0 = mixed_class(0);
    S V1 = scalar_from_int<S>(n) * mixed_class(1);
    // d/dt [ P / ((n+1) Vol) ] at 0 = (P1 V0 - P0 V1) / ((n+1) V0^2)
    return (P1 * V0 - P0 * V1) / (scalar_from_int<S>(n + 1) * V0 * V0);
}

// ---- potential cache -----------------------------------------------------

template <class M>
class PotentialCache {
public:
    using Key = size_t;

    static Key key_of(const M& m, const typename M::Form& omega, const typename M::Meas& mu) {
        size_t h = 0x811c9dc5;
        for (const auto& x : m.form_coords(omega)) h = h * 1099511628211ull ^ scalar_hash(x);
        h ^= 0x9e3779b9;
        for (const auto& x : mu) h = h * 1099511628211ull ^ scalar_hash(x);
        return h;
    }

    EnergySolution<M> get_or_solve(const M& m, const typename M::Form& omega,
                                   const typename M::Meas& mu, const Tols& tols) {
        Key k = key_of(m, omega, mu);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = map_.find(k);
            if (it != map_.end()) return it->second;
        }
        auto sol = solve_potential(m, omega, mu, tols);
        std::lock_guard<std::mutex> lock(mu_);
        return map_.emplace(k, std::move(sol)).first->second;
    }

private:
    std::mutex mu_;
    std::unordered_map<Key, EnergySolution<M>> map_;
};

// ---- twisted energy of a measure ------------------------------------------

template <class M>
struct TwistedEvaluation {
    typename M::Form omega, theta;
    typename M::Meas mu;
    typename M::Scalar value;
    typename M::Fn potential_used;
    typename M::Scalar vtheta;
};

template <class M>
TwistedEvaluation<M> j_twisted(const M& m, const typename M::Form& omega,
                               const typename M::Form& theta, const typename M::Meas& mu,
                               PotentialCache<M>* cache = nullptr, const Tols& tols = {}) {
    auto sol = cache ? cache->get_or_solve(m, omega, mu, tols)
                     : solve_potential(m, omega, mu, tols);
    TwistedEvaluation<M> out{omega, theta, mu,
                             nabla_e(m, omega, theta, sol.phi_star),
                             sol.phi_star, v_theta(m, omega, theta)};
    return out;
}

// ---- finite-difference differentiability check ----------------------------

struct FdReport {
    std::vector<std::pair<double, double>> slopes;  // (t, difference quotient)
    double extrapolated = 0.0;
    double twisted_value = 0.0;
    double deviation = 0.0;
    int skipped = 0;
};

template <class M>
FdReport fd_derivative_check(const M& m, const typename M::Form& omega,
                             const typename M::Form& theta, const typename M::Meas& mu,
                             const std::vector<double>& steps, const Tols& tols = {}) {
    using S = typename M::Scalar;
    FdReport rep;
    S J0 = j_energy(m, omega, mu, tols).j_value;
    for (double t : steps) {
        S ts;
        if constexpr (is_exact_v<S>) ts = Rat::from_double(t);
        else ts = t;
        auto om_t = omega + ts * theta;
        bool ok = true;
        try {
            if (!(volume(m, om_t) > scalar_from_int<S>(0))) ok = false;
        } catch (...) { ok = false; }
        if (!ok) { ++rep.skipped; continue; }
        S Jt = j_energy(m, om_t, mu, tols).j_value;
        rep.slopes.emplace_back(t, to_double((Jt - J0) / ts));
    }
    if (rep.slopes.empty()) {
        rep.twisted_value = to_double(j_twisted<M>(m, omega, theta, mu, nullptr, tols).value);
        rep.deviation = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    // Neville extrapolation of the quotients to t -> 0.
    std::vector<double> p;
    std::vector<double> ts;
    for (auto [t, q] : rep.slopes) { ts.push_back(t); p.push_back(q); }
    size_t k = p.size();
    for (size_t level = 1; level < k; ++level)
        for (size_t i = 0; i + level < k; ++i)
            p[i] = (ts[i + level] * p[i] - ts[i] * p[i + 1]) / (ts[i + level] - ts[i]);
    rep.extrapolated = p[0];
    rep.twisted_value = to_double(j_twisted<M>(m, omega, theta, mu, nullptr, tols).value);
    rep.deviation = std::fabs(rep.extrapolated - rep.twisted_value);
    return rep;
}

}  // namespace pluri
