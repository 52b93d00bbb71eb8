#ifndef NJGEOM_POLYTOPE_HPP
#define NJGEOM_POLYTOPE_HPP

#include "njgeom/cone.hpp"
#include "njgeom/matrix.hpp"
#include "njgeom/njcore.hpp"
#include "njgeom/scalar.hpp"
#include "njgeom/simplex.hpp"

#include <bit>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace njgeom {

/// Subset of the vertices of a polytope, bit k for vertex k.
using VertexSet = std::uint64_t;

/// The points -A e_i together with their distinct extreme points.
struct PointConfiguration {
    int n = 0;
    /// -A e_i for every pair index i.
    std::vector<IntVector> points;
    /// Distinct extreme points of conv(points).
    std::vector<IntVector> vertices;
    /// vertex_of[i]: the vertex equal to points[i], or -1 if points[i] is not extreme.
    std::vector<int> vertex_of;

    std::size_t ambient_dimension() const { return pair_count(n); }
};

/// Hyperplane (normal, x) >= offset supporting P along a facet.
struct Facet {
    IntVector normal;
    std::int64_t offset = 0;
    VertexSet vertices = 0;
};

struct FacetIncidence {
    std::size_t dimension = 0;
    std::vector<Facet> facets;
};

/// Face counts f_{-1}, f_0, ..., f_d.
using FVector = std::vector<std::size_t>;

namespace detail {

inline std::vector<Rational> to_rational(const IntVector& v) {
    std::vector<Rational> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rational(static_cast<long>(v[i]));
    return out;
}

inline bool is_convex_combination(const IntVector& p, const std::vector<const IntVector*>& others) {
    if (others.empty()) return false;
    std::vector<std::vector<Rational>> cols;
    for (const auto* o : others) {
        auto c = to_rational(*o);
        c.push_back(1);
        cols.push_back(std::move(c));
    }
    auto target = to_rational(p);
    target.push_back(1);
    return nonnegative_combination(cols, target).has_value();
}

/// Exact coordinates of the vertices in an affine basis of their hull.
struct AffineFrame {
    std::vector<Rational> origin;
    /// Columns spanning the hull directions, each a difference of two vertices.
    std::vector<std::vector<Rational>> basis;
    std::vector<std::vector<Rational>> coords;
};

inline AffineFrame affine_frame(const std::vector<IntVector>& vertices) {
    AffineFrame f;
    f.origin = to_rational(vertices.front());
    const std::size_t m = f.origin.size();
    std::vector<std::vector<Rational>> diffs;
    for (const auto& v : vertices) {
        auto d = to_rational(v);
        for (std::size_t k = 0; k < m; ++k) d[k] -= f.origin[k];
        diffs.push_back(std::move(d));
    }
    for (const auto& d : diffs) {
        auto trial = f.basis;
        trial.push_back(d);
        if (rank(from_rows(trial, m)) == trial.size()) f.basis = std::move(trial);
    }
    const auto b = from_rows(f.basis, m).transposed();
    for (const auto& d : diffs) {
        auto z = solve(b, d);
        if (!z) throw std::logic_error("affine_frame: vertex outside its own hull");
        f.coords.push_back(std::move(*z));
    }
    return f;
}

/// Affine rank of a vertex subset, i.e. face dimension + 1 (0 for the empty set).
inline std::size_t affine_rank(const AffineFrame& f, VertexSet s) {
    std::vector<std::vector<Rational>> rows;
    const std::size_t d = f.basis.size();
    for (std::size_t k = 0; k < f.coords.size(); ++k) {
        if (!(s >> k & 1)) continue;
        auto r = f.coords[k];
        r.push_back(1);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) return 0;
    return rank(from_rows(rows, d + 1));
}

}  // namespace detail

/// P_n = conv{-A e_i}. Coincident points (n = 4) are identified and non-extreme points
/// discarded before vertices are counted.
inline PointConfiguration build_p(int n) {
    if (n < 4) throw std::invalid_argument("build_p: need n >= 4");
    if (n > 8) throw std::invalid_argument("build_p: n > 8 is out of reach for exact enumeration");
    PointConfiguration p;
    p.n = n;
    const auto a = q_operator(n);
    const std::size_t m = pair_count(n);
    for (std::size_t i = 0; i < m; ++i) {
        IntVector col(m);
        for (std::size_t k = 0; k < m; ++k) col[k] = -a(k, i);
        p.points.push_back(std::move(col));
    }
    std::vector<IntVector> distinct;
    std::vector<int> class_of(m);
    for (std::size_t i = 0; i < m; ++i) {
        int found = -1;
        for (std::size_t k = 0; k < distinct.size(); ++k)
            if (distinct[k] == p.points[i]) found = static_cast<int>(k);
        if (found < 0) {
            found = static_cast<int>(distinct.size());
            distinct.push_back(p.points[i]);
        }
        class_of[i] = found;
    }
    std::vector<int> vertex_index(distinct.size(), -1);
    for (std::size_t k = 0; k < distinct.size(); ++k) {
        std::vector<const IntVector*> others;
        for (std::size_t j = 0; j < distinct.size(); ++j)
            if (j != k) others.push_back(&distinct[j]);
        if (!detail::is_convex_combination(distinct[k], others)) {
            vertex_index[k] = static_cast<int>(p.vertices.size());
            p.vertices.push_back(distinct[k]);
        }
    }
    for (std::size_t i = 0; i < m; ++i) p.vertex_of.push_back(vertex_index[static_cast<std::size_t>(class_of[i])]);
    return p;
}

inline std::size_t affine_dimension(const PointConfiguration& p) {
    return detail::affine_frame(p.vertices).basis.size();
}

/// Enumerates facets by fitting hyperplanes through affinely independent d-subsets of the
/// vertices inside the affine hull and keeping those with every vertex on one side.
inline FacetIncidence facet_enumeration(const PointConfiguration& p) {
    const auto frame = detail::affine_frame(p.vertices);
    const std::size_t d = frame.basis.size();
    const std::size_t nv = p.vertices.size();
    if (nv > 64) throw std::invalid_argument("facet_enumeration: more than 64 vertices");
    if (d == 0) throw std::invalid_argument("facet_enumeration: configuration is a single point");
    FacetIncidence out;
    out.dimension = d;
    std::set<VertexSet> seen;
    const std::size_t m = p.ambient_dimension();
    const auto bt = from_rows(frame.basis, m);  // d x m
    const auto gram = bt * bt.transposed();

    std::vector<std::size_t> chosen;
    std::vector<std::vector<Rational>> rows;  // (z, 1) of chosen vertices

    auto fit = [&]() {
        // hyperplane (c, z) + c0 = 0 through the chosen points
        const auto ns = nullspace(from_rows(rows, d + 1));
        if (ns.size() != 1) return;
        const auto& h = ns.front();
        VertexSet on = 0;
        int side = 0;
        for (std::size_t k = 0; k < nv; ++k) {
            Rational v = h[d];
            for (std::size_t j = 0; j < d; ++j) v += h[j] * frame.coords[k][j];
            const int s = sgn(v);
            if (s == 0) {
                on |= VertexSet{1} << k;
            } else if (side == 0) {
                side = s;
            } else if (s != side) {
                return;
            }
        }
        if (!seen.insert(on).second) return;
        // lift c to R^m: g = B^T (B B^T)^{-1} c satisfies (g, x - origin) = (c, z)
        std::vector<Rational> c(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(d));
        Rational c0 = h[d];
        if (side < 0) {
            for (auto& x : c) x = -x;
            c0 = -c0;
        }
        const auto y = solve(gram, c);
        if (!y) throw std::logic_error("facet_enumeration: singular Gram matrix");
        std::vector<Rational> g(m, 0);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t k = 0; k < m; ++k) g[k] += bt(r, k) * (*y)[r];
        // (g, x) >= (g, origin) - c0 on P
        Rational offset = -c0;
        for (std::size_t k = 0; k < m; ++k) offset += g[k] * frame.origin[k];
        auto full = g;
        full.push_back(offset);
        const auto ints = to_primitive_integer(full);
        Facet f;
        f.normal.assign(ints.begin(), ints.end() - 1);
        f.offset = ints.back();
        f.vertices = on;
        out.facets.push_back(std::move(f));
    };

    auto dfs = [&](auto&& self, std::size_t start) -> void {
        if (chosen.size() == d) {
            fit();
            return;
        }
        for (std::size_t k = start; k + (d - chosen.size()) <= nv; ++k) {
            auto r = frame.coords[k];
            r.push_back(1);
            rows.push_back(std::move(r));
            if (rank(from_rows(rows, d + 1)) == rows.size()) {
                chosen.push_back(k);
                self(self, k + 1);
                chosen.pop_back();
            }
            rows.pop_back();
        }
    };
    dfs(dfs, 0);
    if (out.facets.empty()) throw std::runtime_error("facet_enumeration: no supporting hyperplane found");
    std::sort(out.facets.begin(), out.facets.end(), [](const Facet& a, const Facet& b) { return a.vertices < b.vertices; });
    return out;
}

/// Number of facets containing vertex v.
inline std::size_t facets_through(const FacetIncidence& inc, std::size_t v) {
    std::size_t k = 0;
    for (const auto& f : inc.facets) k += f.vertices >> v & 1;
    return k;
}

/// All faces as intersections of facet vertex sets, counted by dimension.
inline FVector f_vector(const PointConfiguration& p, const FacetIncidence& inc) {
    const auto frame = detail::affine_frame(p.vertices);
    const std::size_t d = inc.dimension;
    const VertexSet all = p.vertices.size() == 64 ? ~VertexSet{0} : (VertexSet{1} << p.vertices.size()) - 1;
    std::set<VertexSet> faces;
    std::vector<VertexSet> frontier;
    for (const auto& f : inc.facets)
        if (faces.insert(f.vertices).second) frontier.push_back(f.vertices);
    while (!frontier.empty()) {
        std::vector<VertexSet> next;
        for (VertexSet s : frontier)
            for (const auto& f : inc.facets) {
                const VertexSet t = s & f.vertices;
                if (faces.insert(t).second) next.push_back(t);
            }
        frontier = std::move(next);
    }
    faces.insert(all);
    faces.insert(0);
    FVector fv(d + 2, 0);
    for (VertexSet s : faces) {
        const std::size_t r = detail::affine_rank(frame, s);
        ++fv[r];
    }
    return fv;
}

/// Alternating sum f_0 - f_1 + ... (without f_{-1}); 1 for every convex polytope with
/// the top face included.
inline long euler_characteristic(const FVector& fv) {
    long s = 0;
    for (std::size_t k = 1; k < fv.size(); ++k) s += (k % 2 == 1 ? 1 : -1) * static_cast<long>(fv[k]);
    return s;
}

struct Table1Row {
    std::size_t vertices = 0;
    std::size_t dimension = 0;
    std::size_t facets_through_vertex = 0;
    std::size_t facets = 0;
};

inline Table1Row table1_row(const PointConfiguration& p, const FacetIncidence& inc) {
    Table1Row r;
    r.vertices = p.vertices.size();
    r.dimension = inc.dimension;
    r.facets = inc.facets.size();
    r.facets_through_vertex = facets_through(inc, 0);
    for (std::size_t v = 1; v < p.vertices.size(); ++v)
        if (facets_through(inc, v) != r.facets_through_vertex)
            throw std::logic_error("table1_row: facets through vertex differ between vertices");
    return r;
}

struct NormalConeReport {
    bool agree = true;
    std::size_t facets_through_vertex = 0;
    std::size_t samples = 0;
    std::string message;
    std::vector<double> witness;
};

/// Checks that the first-step cone cd_i is the normal cone of P_n at -A e_i: the outward
/// normal of every facet through the vertex must lie on the boundary of cd_i, the normals
/// of the remaining facets outside it, and for random x, membership in cd_i must coincide
/// with -A e_i maximizing (p, x) over all points.
template <class Rng>
NormalConeReport normal_cone_check(const PointConfiguration& p, const FacetIncidence& inc, std::size_t i,
                                   std::size_t samples, Rng& rng) {
    NormalConeReport rep;
    const int n = p.n;
    const std::size_t m = p.ambient_dimension();
    const auto cone = first_step_cone(i, n);
    const int v = p.vertex_of.at(i);
    if (v < 0) {
        rep.agree = false;
        rep.message = "point is not a vertex";
        return rep;
    }
    auto fail = [&](std::string msg, std::vector<double> w) {
        if (rep.agree) {
            rep.agree = false;
            rep.message = std::move(msg);
            rep.witness = std::move(w);
        }
    };
    for (const auto& f : inc.facets) {
        std::vector<Rational> outward(m);
        std::vector<double> as_double(m);
        for (std::size_t k = 0; k < m; ++k) {
            outward[k] = -Rational(static_cast<long>(f.normal[k]));
            as_double[k] = -static_cast<double>(f.normal[k]);
        }
        const bool through = f.vertices >> v & 1;
        rep.facets_through_vertex += through;
        const auto verdict = membership(cone, outward);
        if (through && verdict != Membership::boundary) fail("facet normal through vertex not on boundary of cd_i", as_double);
        if (!through && verdict != Membership::outside) fail("normal of a facet missing the vertex lies in cd_i", as_double);
    }
    std::normal_distribution<double> gauss;
    for (std::size_t s = 0; s < samples; ++s) {
        std::vector<double> x(m);
        for (auto& e : x) e = gauss(rng);
        double best = -1e300, mine = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double val = dot(p.points[j], x);
            best = std::max(best, val);
            if (j == i) mine = val;
        }
        const bool maximizer = mine >= best - 1e-9;
        const bool member = membership(cone, x) != Membership::outside;
        if (maximizer != member) fail("sample disagrees between normal cone and cd_i", x);
        ++rep.samples;
    }
    return rep;
}

/// One facet per line: "normal entries | offset | vertex indices".
inline void write_incidence(std::ostream& os, const PointConfiguration& p, const FacetIncidence& inc) {
    os << "# n=" << p.n << " vertices=" << p.vertices.size() << " dimension=" << inc.dimension
       << " facets=" << inc.facets.size() << "\n";
    os << "# facet: (normal, x) >= offset; vertex k is the k-th distinct point -A e_i\n";
    for (const auto& f : inc.facets) {
        for (std::size_t k = 0; k < f.normal.size(); ++k) os << (k ? " " : "") << f.normal[k];
        os << " | " << f.offset << " |";
        for (std::size_t k = 0; k < p.vertices.size(); ++k)
            if (f.vertices >> k & 1) os << " " << k;
        os << "\n";
    }
}

}  // namespace njgeom

#endif  // NJGEOM_POLYTOPE_HPP
