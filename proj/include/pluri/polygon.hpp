#pragma once

// Exact convex polygon arithmetic over rational coordinates: half-plane
// clipping, convex hulls, Minkowski sums, shoelace areas. Subdifferential
// cells of discrete convex lifts are built from these, which is what makes
// the cell volumes tile exactly.

#include "pluri/rational.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace pluri {

struct V2 {
    Rat x, y;
    friend V2 operator+(const V2& a, const V2& b) { return {a.x + b.x, a.y + b.y}; }
    friend V2 operator-(const V2& a, const V2& b) { return {a.x - b.x, a.y - b.y}; }
    friend bool operator==(const V2& a, const V2& b) { return a.x == b.x && a.y == b.y; }
};

inline Rat cross(const V2& o, const V2& a, const V2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Convex polygon, CCW vertex order, no duplicate vertices. May degenerate to
// a segment (2 vertices), a point (1), or be empty.
struct ConvexPoly {
    std::vector<V2> v;

    bool empty() const { return v.empty(); }

    // twice the signed area (nonnegative for CCW order)
    Rat area2() const {
        if (v.size() < 3) return Rat(0);
        Rat s(0);
        for (size_t i = 0; i < v.size(); ++i) {
            const V2& a = v[i];
            const V2& b = v[(i + 1) % v.size()];
            s += a.x * b.y - b.x * a.y;
        }
        return s;
    }
    Rat area() const { return area2() / Rat(2); }
};

// Monotone-chain convex hull of a rational point set.
inline ConvexPoly convex_hull(std::vector<V2> pts) {
    std::sort(pts.begin(), pts.end(), [](const V2& a, const V2& b) {
        if (!(a.x == b.x)) return a.x < b.x;
        return a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    ConvexPoly out;
    if (pts.size() <= 2) {
        out.v = pts;
        return out;
    }
    std::vector<V2> h(2 * pts.size());
    size_t k = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]).sign() <= 0) --k;
        h[k++] = pts[i];
    }
    size_t lower = k + 1;
    for (size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]).sign() <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    out.v = std::move(h);
    return out;
}

// Intersect with the half-plane {p : a x + b y <= c}.
inline ConvexPoly clip_halfplane(const ConvexPoly& poly, const Rat& a, const Rat& b,
                                 const Rat& c) {
    ConvexPoly out;
    size_t n = poly.v.size();
    if (n == 0) return out;
    auto side = [&](const V2& p) { return (a * p.x + b * p.y - c).sign(); };
    if (n == 1) {
        if (side(poly.v[0]) <= 0) out.v = poly.v;
        return out;
    }
    if (n == 2) {
        int s0 = side(poly.v[0]), s1 = side(poly.v[1]);
        if (s0 <= 0) out.v.push_back(poly.v[0]);
        if (s0 * s1 < 0) {
            Rat da = a * poly.v[0].x + b * poly.v[0].y - c;
            Rat db = a * poly.v[1].x + b * poly.v[1].y - c;
            Rat t = da / (da - db);
            out.v.push_back({poly.v[0].x + t * (poly.v[1].x - poly.v[0].x),
                             poly.v[0].y + t * (poly.v[1].y - poly.v[0].y)});
        }
        if (s1 <= 0) out.v.push_back(poly.v[1]);
        return out;
    }
    for (size_t i = 0; i < n; ++i) {
        const V2& cur = poly.v[i];
        const V2& nxt = poly.v[(i + 1) % n];
        int sc = side(cur), sn = side(nxt);
        if (sc <= 0) out.v.push_back(cur);
        if ((sc < 0 && sn > 0) || (sc > 0 && sn < 0)) {
            Rat da = a * cur.x + b * cur.y - c;
            Rat db = a * nxt.x + b * nxt.y - c;
            Rat t = da / (da - db);
            out.v.push_back({cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)});
        }
    }
    // dedupe touching vertices, then canonicalize (clipping can leave
    // collinear chains or a fully degenerate segment)
    std::vector<V2> clean;
    for (const auto& p : out.v)
        if (clean.empty() || !(clean.back() == p)) clean.push_back(p);
    if (clean.size() > 1 && clean.front() == clean.back()) clean.pop_back();
    if (clean.size() >= 3) return convex_hull(std::move(clean));
    out.v = std::move(clean);
    return out;
}

// Minkowski sum via hull of pairwise vertex sums (robust for degenerate cells).
inline ConvexPoly minkowski_sum(const ConvexPoly& p, const ConvexPoly& q) {
    ConvexPoly out;
    if (p.empty() || q.empty()) return out;
    std::vector<V2> sums;
    sums.reserve(p.v.size() * q.v.size());
    for (const auto& a : p.v)
        for (const auto& b : q.v) sums.push_back(a + b);
    return convex_hull(std::move(sums));
}

// Mixed area via polarization: A(P,Q) = (A(P+Q) - A(P) - A(Q)) / 2.
inline Rat mixed_area(const ConvexPoly& p, const ConvexPoly& q) {
    if (p.empty() || q.empty()) return Rat(0);
    return (minkowski_sum(p, q).area() - p.area() - q.area()) / Rat(2);
}

}  // namespace pluri
