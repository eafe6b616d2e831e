#pragma once

// Entropy, free energy, Mabuchi functional via the Chen-Tian expression, and
// slope-based coercivity threshold surrogates with continuity scans.
//
// The literal growth-at-infinity threshold is +infinity on a finite backend
// (J_omega is bounded), so the implemented quantity is the sublevel-restricted
// slope sigma_hat with an explicit j_min cutoff. Identities that the paper
// states for sigma transfer verbatim to sigma_hat and are tested exactly.

#include "pluri/twisted.hpp"

#include <functional>
#include <limits>

namespace pluri {

// Relative entropy sum mu_v log(mu_v / rho_v); 0 log 0 = 0. The reference
// must be a strictly positive probability vector.
template <class M>
double entropy(const M& m, const typename M::Meas& mu, const typename M::Meas& rho) {
    using S = typename M::Scalar;
    if (static_cast<int>(rho.size()) != m.carrier_size() ||
        static_cast<int>(mu.size()) != m.carrier_size())
        throw ArityError("entropy: size mismatch");
    for (const auto& r : rho)
        if (!(r > scalar_from_int<S>(0)))
            throw ModelError("entropy: reference measure must be strictly positive");
    double acc = 0.0;
    for (size_t v = 0; v < mu.size(); ++v) {
        double mv = to_double(mu[v]);
        if (mv < 0) throw ModelError("entropy: negative mass");
        if (mv == 0.0) continue;
        acc += mv * std::log(mv / to_double(rho[v]));
    }
    return acc;
}

// Split representation: the twisted part stays in backend arithmetic so that
// the Chen-Tian identity can be asserted exactly on the rational backend.
template <class M>
struct FreeEnergyValue {
    double entropy_mu = 0.0;
    double entropy_base = 0.0;           // Ent_rho(mu_omega)
    typename M::Scalar twisted;          // J_omega^{theta_rho}(mu)
    bool finite = true;
    double total() const {
        return finite ? entropy_mu - entropy_base + to_double(twisted)
                      : std::numeric_limits<double>::infinity();
    }
};

template <class M>
FreeEnergyValue<M> free_energy(const M& m, const typename M::Form& omega,
                               const typename M::Meas& mu, const typename M::Meas& rho,
                               const typename M::Form& theta_rho,
                               PotentialCache<M>* cache = nullptr, const Tols& tols = {}) {
    FreeEnergyValue<M> out;
    out.entropy_base = entropy(m, mu_omega(m, omega), rho);
    out.entropy_mu = entropy(m, mu, rho);
    out.twisted = j_twisted(m, omega, theta_rho, mu, cache, tols).value;
    return out;
}

template <class M>
struct MabuchiValue {
    double entropy_ma = 0.0;
    double entropy_base = 0.0;
    typename M::Scalar nabla;            // nabla_{theta_rho} E_omega(phi)
    double total() const { return entropy_ma - entropy_base + to_double(nabla); }
};

// Chen-Tian form of the K-energy: Ent(MA(phi)) - Ent(mu_omega) + nabla E.
template <class M>
MabuchiValue<M> mabuchi(const M& m, const typename M::Form& omega, const typename M::Fn& phi,
                        const typename M::Meas& rho, const typename M::Form& theta_rho) {
    MabuchiValue<M> out;
    out.entropy_ma = entropy(m, ma(m, omega, phi), rho);
    out.entropy_base = entropy(m, mu_omega(m, omega), rho);
    out.nabla = nabla_e(m, omega, theta_rho, phi);
    return out;
}

// ---- functionals on measures ----------------------------------------------

template <class M>
struct FValue {
    bool finite = true;
    bool exact = false;
    Rat r;            // set when exact
    double d = 0.0;   // always set when finite
    double value() const {
        return finite ? d : std::numeric_limits<double>::infinity();
    }
};

template <class M>
class FunctionalOnMeasures {
public:
    using Meas = typename M::Meas;
    using Form = typename M::Form;
    enum class Kind { Entropy, JSelf, UserTable, FreeEnergy };

    static FunctionalOnMeasures make_entropy(Meas rho) {
        FunctionalOnMeasures f;
        f.kind_ = Kind::Entropy;
        f.rho_ = std::move(rho);
        return f;
    }
    static FunctionalOnMeasures make_j_self() {
        FunctionalOnMeasures f;
        f.kind_ = Kind::JSelf;
        return f;
    }
    static FunctionalOnMeasures make_user_table(std::vector<std::pair<Meas, Rat>> table) {
        FunctionalOnMeasures f;
        f.kind_ = Kind::UserTable;
        f.table_ = std::move(table);
        return f;
    }
    static FunctionalOnMeasures make_free_energy(Meas rho, Form theta_rho) {
        FunctionalOnMeasures f;
        f.kind_ = Kind::FreeEnergy;
        f.rho_ = std::move(rho);
        f.theta_rho_ = std::move(theta_rho);
        return f;
    }

    Kind kind() const { return kind_; }

    FValue<M> evaluate(const M& m, const Form& omega, const Meas& mu,
                       PotentialCache<M>* cache = nullptr, const Tols& tols = {}) const {
        using S = typename M::Scalar;
        FValue<M> out;
        switch (kind_) {
            case Kind::Entropy: {
                for (size_t v = 0; v < mu.size(); ++v)
                    if (to_double(mu[v]) > 0 && to_double(rho_[v]) == 0.0) {
                        out.finite = false;
                        return out;
                    }
                out.d = entropy(m, mu, rho_);
                return out;
            }
            case Kind::JSelf: {
                S j = j_energy(m, omega, mu, tols).j_value;
                out.d = to_double(j);
                if constexpr (is_exact_v<S>) { out.exact = true; out.r = j; }
                return out;
            }
            case Kind::UserTable: {
                for (const auto& [nu, val] : table_)
                    if (nu == mu) {
                        out.exact = true;
                        out.r = val;
                        out.d = val.to_double();
                        return out;
                    }
                out.finite = false;
                return out;
            }
            case Kind::FreeEnergy: {
                auto fe = free_energy(m, omega, mu, rho_, theta_rho_, cache, tols);
                out.d = fe.total();
                out.finite = fe.finite;
                return out;
            }
        }
        return out;
    }

private:
    Kind kind_ = Kind::JSelf;
    Meas rho_;
    Form theta_rho_;
    std::vector<std::pair<Meas, Rat>> table_;
};

// ---- sampling and thresholds -----------------------------------------------

struct SamplerSpec {
    int count = 64;
    uint64_t seed = 7;
};

// Stratified measure family: MA images of psh samples, sparse vertex-supported
// measures, and mixtures. Depends only on (model, reference form, seed).
template <class M>
std::vector<typename M::Meas> sample_measures(const M& m, const typename M::Form& omega_ref,
                                              const SamplerSpec& spec) {
    using S = typename M::Scalar;
    std::vector<typename M::Meas> out;
    Rng root(spec.seed);
    for (int i = 0; i < spec.count; ++i) {
        Rng r = root.split("threshold-sampler", static_cast<uint64_t>(i));
        int stratum = i % 3;
        if (stratum == 0) {
            out.push_back(ma(m, omega_ref, m.sample_psh(omega_ref, r)));
        } else if (stratum == 1) {
            auto mu = vec_zero<S>(m.carrier_size());
            int k = 1 + static_cast<int>(r.below(2));
            for (int j = 0; j < k; ++j)
                mu[static_cast<int>(r.below(m.carrier_size()))] += scalar_from_int<S>(1);
            S tot = vec_sum(mu);
            for (auto& x : mu) x /= tot;
            out.push_back(std::move(mu));
        } else {
            auto a = m.sample_probability(r);
            auto b = mu_omega(m, omega_ref);
            out.push_back(scalar_from_ratio<S>(1, 2) * (a + b));
        }
    }
    return out;
}

template <class M>
struct ThresholdEstimate {
    typename M::Form omega, theta;
    double sigma_hat = 0.0;
    bool exact = false;
    Rat sigma_hat_exact;
    double j_min = 0.0;
    int sample_size = 0;
    int used = 0;
    int skipped_inf = 0;
    int witness_index = -1;
    typename M::Meas argmin_witness;
};

// sigma_hat = min over sampled mu with J(mu) >= j_min of
//   (F(mu) - F(mu_omega) + J^theta(mu)) / J(mu).
// j_min <= 0 requests the default cutoff: a tenth of the largest sampled J.
template <class M>
ThresholdEstimate<M> slope_threshold(const M& m, const typename M::Form& omega,
                                     const typename M::Form& theta,
                                     const FunctionalOnMeasures<M>& F,
                                     const SamplerSpec& spec, double j_min,
                                     PotentialCache<M>* cache = nullptr,
                                     const Tols& tols = {}) {
    using S = typename M::Scalar;
    auto measures = sample_measures(m, omega, spec);
    ThresholdEstimate<M> est;
    est.omega = omega;
    est.theta = theta;
    est.sample_size = static_cast<int>(measures.size());

    std::vector<S> jvals(measures.size());
    S jmax = scalar_from_int<S>(0);
    for (size_t i = 0; i < measures.size(); ++i) {
        jvals[i] = j_energy(m, omega, measures[i], tols).j_value;
        if (jvals[i] > jmax) jmax = jvals[i];
    }
    S cutoff;
    if (j_min > 0) {
        if constexpr (is_exact_v<S>) cutoff = Rat::from_double(j_min);
        else cutoff = j_min;
    } else {
        cutoff = jmax / scalar_from_int<S>(10);
    }
    est.j_min = to_double(cutoff);

    auto F0 = F.evaluate(m, omega, mu_omega(m, omega), cache, tols);
    if (!F0.finite) throw SolverError("slope_threshold: F(mu_omega) infinite");

    bool have = false;
    bool exact_min = is_exact_v<S> && F0.exact;
    Rat best_r;
    double best_d = 0.0;
    for (size_t i = 0; i < measures.size(); ++i) {
        if (!(jvals[i] >= cutoff) || jvals[i] == scalar_from_int<S>(0)) continue;
        auto Fi = F.evaluate(m, omega, measures[i], cache, tols);
        if (!Fi.finite) { ++est.skipped_inf; continue; }
        S jt = j_twisted(m, omega, theta, measures[i], cache, tols).value;
        ++est.used;
        if constexpr (is_exact_v<S>) {
            if (exact_min && Fi.exact) {
                Rat num = Fi.r - F0.r + jt;
                Rat ratio = num / jvals[i];
                if (!have || ratio < best_r) {
                    best_r = ratio;
                    est.witness_index = static_cast<int>(i);
                }
                have = true;
                continue;
            }
            exact_min = false;
        }
        double num = Fi.d - F0.d + to_double(jt);
        double ratio = num / to_double(jvals[i]);
        if (!have || ratio < best_d) {
            best_d = ratio;
            est.witness_index = static_cast<int>(i);
        }
        have = true;
    }
    if (!have) throw SolverError("slope_threshold: no sample above j_min");
    if (exact_min) {
        est.exact = true;
        est.sigma_hat_exact = best_r;
        est.sigma_hat = best_r.to_double();
    } else {
        est.sigma_hat = best_d;
    }
    est.argmin_witness = measures[est.witness_index];
    return est;
}

// Same slope, anchored at d_omega(. , nu) instead of J = d_omega(. , mu_omega).
template <class M>
ThresholdEstimate<M> slope_threshold_anchored(const M& m, const typename M::Form& omega,
                                              const typename M::Form& theta,
                                              const FunctionalOnMeasures<M>& F,
                                              const SamplerSpec& spec, double j_min,
                                              const typename M::Meas& nu,
                                              PotentialCache<M>* cache = nullptr,
                                              const Tols& tols = {}) {
    using S = typename M::Scalar;
    auto measures = sample_measures(m, omega, spec);
    ThresholdEstimate<M> est;
    est.omega = omega;
    est.theta = theta;
    est.sample_size = static_cast<int>(measures.size());
    est.j_min = j_min;

    auto F0 = F.evaluate(m, omega, mu_omega(m, omega), cache, tols);
    bool have = false;
    double best = 0.0;
    for (size_t i = 0; i < measures.size(); ++i) {
        S d = quasi_metric(m, omega, measures[i], nu, tols);
        if (!(to_double(d) >= j_min) || to_double(d) == 0.0) continue;
        auto Fi = F.evaluate(m, omega, measures[i], cache, tols);
        if (!Fi.finite) { ++est.skipped_inf; continue; }
        S jt = j_twisted(m, omega, theta, measures[i], cache, tols).value;
        double ratio = (Fi.d - F0.d + to_double(jt)) / to_double(d);
        if (!have || ratio < best) {
            best = ratio;
            est.witness_index = static_cast<int>(i);
        }
        have = true;
        ++est.used;
    }
    if (!have) throw SolverError("slope_threshold_anchored: no sample above cutoff");
    est.sigma_hat = best;
    est.argmin_witness = measures[est.witness_index];
    return est;
}

template <class M>
struct ScanRow {
    int k;
    double delta_T;        // Thompson step to the next form (0 for the last row)
    ThresholdEstimate<M> estimate;
};

template <class M>
std::vector<ScanRow<M>> threshold_continuity_scan(const M& m,
                                                  const std::vector<typename M::Form>& path,
                                                  const typename M::Form& theta,
                                                  const FunctionalOnMeasures<M>& F,
                                                  const SamplerSpec& spec, double j_min,
                                                  const Tols& tols = {}) {
    if (path.empty()) throw ArityError("threshold scan: empty path");
    std::vector<ScanRow<M>> rows;
    for (size_t k = 0; k < path.size(); ++k) {
        double delta = 0.0;
        if (k + 1 < path.size()) {
            delta = thompson_distance(m, path[k], path[k + 1], tols);
            if (!(delta <= 1.0) || std::isinf(delta))
                throw ModelError("threshold scan: path step " + std::to_string(k) +
                                 " not commensurable with d_T <= 1");
        }
        PotentialCache<M> cache;
        auto est = slope_threshold(m, path[k], theta, F, spec, j_min, &cache, tols);
        rows.push_back({static_cast<int>(k), delta, std::move(est)});
    }
    return rows;
}

}  // namespace pluri
