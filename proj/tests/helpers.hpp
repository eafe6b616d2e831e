#pragma once

#include "pluri/core.hpp"
#include "pluri/graph_model.hpp"

#include <initializer_list>

namespace pluri::testutil {

using GM = GraphModel<Rat>;

inline GM make_g2() {
    GraphTopology t;
    t.vertex_count = 2;
    t.edges.push_back({0, 1, Rat(1)});
    return GM(t);
}

inline Vec<Rat> rv(std::initializer_list<Rat> xs) { return Vec<Rat>(xs); }

// Random connected graph: spanning tree plus a few extra edges.
inline GM random_graph(Rng& rng, int max_vertices = 8) {
    int nv = static_cast<int>(2 + rng.below(static_cast<uint64_t>(max_vertices - 1)));
    GraphTopology t;
    t.vertex_count = nv;
    for (int v = 1; v < nv; ++v)
        t.edges.push_back({static_cast<int>(rng.below(v)), v, rng.rat_pos(4, 3)});
    for (int extra = 0; extra < nv / 2; ++extra) {
        int i = static_cast<int>(rng.below(nv)), j = static_cast<int>(rng.below(nv));
        if (i != j) t.edges.push_back({i, j, rng.rat_pos(4, 3)});
    }
    return GM(t);
}

// omega in Z_+ with positive class and no zero weights (commensurable work).
inline Vec<Rat> random_omega(const GM& m, Rng& rng) {
    Vec<Rat> w(m.carrier_size());
    for (auto& x : w) x = rng.rat_pos(4, 3);
    return w;
}

inline Vec<Rat> shift_all(Vec<Rat> v, const Rat& c) {
    for (auto& x : v) x += c;
    return v;
}

// Nonpositive omega-psh sample.
inline Vec<Rat> sample_psh_nonpos(const GM& m, const Vec<Rat>& omega, Rng& rng) {
    Vec<Rat> phi = m.sample_psh(omega, rng);
    Rat mx = vec_max(phi);
    return shift_all(std::move(phi), -mx);
}

}  // namespace pluri::testutil
