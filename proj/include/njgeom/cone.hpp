#ifndef NJGEOM_CONE_HPP
#define NJGEOM_CONE_HPP

#include "njgeom/distvec.hpp"
#include "njgeom/njcore.hpp"
#include "njgeom/simplex.hpp"
#include "njgeom/topology.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace njgeom {

/// Closed half-space {x : (normal, x) >= 0} with a coprime integer normal.
struct HalfSpace {
    IntVector normal;
    /// Where the inequality came from, e.g. "h[9,1]" or "s1:r0-r2".
    std::string origin;
};

enum class Membership { interior, boundary, outside };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::interior: return "interior";
        case Membership::boundary: return "boundary";
        case Membership::outside: return "outside";
    }
    return "?";
}

/// Polyhedral cone of inputs for which NJ can follow `trace`, in the coordinates of the
/// original n taxa.
struct NJCone {
    int n = 0;
    std::vector<HalfSpace> halfspaces;
    CherryTrace trace;
    std::optional<TreeTopology> topology;
    bool irredundant = false;

    std::size_t dimension() const { return pair_count(n); }

    /// Sorted normals; equal keys mean equal half-space sets.
    std::vector<IntVector> key() const {
        std::vector<IntVector> k;
        for (const auto& h : halfspaces) k.push_back(h.normal);
        std::sort(k.begin(), k.end());
        return k;
    }
};

namespace detail {

/// Appends a half-space unless its normal vanishes or is already present.
inline void add_halfspace(std::vector<HalfSpace>& out, const std::vector<Rational>& normal, std::string origin) {
    IntVector h = to_primitive_integer(normal);
    if (is_zero(h)) return;
    for (const auto& e : out)
        if (e.normal == h) return;
    out.push_back({std::move(h), std::move(origin)});
}

}  // namespace detail

/// h_ij = -A(e_i - e_j); (h_ij, d) >= 0 iff q_i <= q_j.
inline HalfSpace halfspace_normal(std::size_t i, std::size_t j, int n) {
    const std::size_t m = pair_count(n);
    if (i >= m || j >= m) throw std::out_of_range("halfspace_normal: pair index out of range");
    if (i == j) throw std::invalid_argument("halfspace_normal: i and j must differ");
    const auto a = q_operator(n);
    IntVector h(m);
    for (std::size_t k = 0; k < m; ++k) h[k] = a(k, j) - a(k, i);
    return {to_primitive_integer(std::move(h)), "h[" + std::to_string(i) + "," + std::to_string(j) + "]"};
}

/// cd_i: inputs whose first-step Q-criterion is minimal at pair i. For n = 4 the zero and
/// repeated normals coming from complementary pairs are dropped.
inline NJCone first_step_cone(std::size_t i, int n) {
    NJCone c;
    c.n = n;
    for (std::size_t j = 0; j < pair_count(n); ++j) {
        if (j == i) continue;
        auto h = halfspace_normal(i, j, n);
        if (is_zero(h.normal)) continue;
        bool dup = false;
        for (const auto& e : c.halfspaces) dup = dup || e.normal == h.normal;
        if (!dup) c.halfspaces.push_back(std::move(h));
    }
    return c;
}

/// Point on the hyperplane of h_ij: 2 at pairs i and j, 4 elsewhere. For n >= 6 it lies
/// strictly inside every other half-space of cd_i. For n = 5 this fails when i and j share
/// a taxon: the one pair disjoint from both then ties with i as well.
inline std::vector<Rational> two_four_witness(std::size_t i, std::size_t j, int n) {
    std::vector<Rational> d(pair_count(n), 4);
    d.at(i) = 2;
    d.at(j) = 2;
    return d;
}

/// Like two_four_witness but with 5 at pairs sharing no taxon with i or j, which lifts the
/// extra tie and certifies h_ij as a facet of cd_i for every n >= 5.
inline std::vector<Rational> facet_witness(std::size_t i, std::size_t j, int n) {
    auto d = two_four_witness(i, j, n);
    const auto [a, b] = index_to_pair(i, n);
    const auto [c, e] = index_to_pair(j, n);
    const LeafSet used = leaf(a) | leaf(b) | leaf(c) | leaf(e);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const auto [x, y] = index_to_pair(k, n);
        if (((leaf(x) | leaf(y)) & used) == 0) d[k] = 5;
    }
    return d;
}

/// Builds the cone of a complete trace. At each step with k active nodes and cumulative
/// map L, the rows of M = -A^(k) L are the Q-values (negated) as functions of the original
/// input; the picked pair p must beat every other pair j, giving normals M_p - M_j.
/// Zero and repeated normals are dropped.
inline NJCone cone_from_trace(const CherryTrace& trace) {
    NJCone c;
    c.n = trace.n;
    c.trace = canonical(trace);
    const auto maps = trace_linear_maps(c.trace);
    const std::size_t m = pair_count(trace.n);
    for (std::size_t s = 0; s < maps.steps.size(); ++s) {
        const auto& step = maps.steps[s];
        const int k = static_cast<int>(step.nodes.size());
        const auto a = matrix_cast<Rational>(q_operator(k));
        const auto q = a * maps.maps[s];
        const std::size_t p = step.pair_index();
        for (std::size_t j = 0; j < pair_count(k); ++j) {
            if (j == p) continue;
            std::vector<Rational> h(m);
            for (std::size_t col = 0; col < m; ++col) h[col] = q(j, col) - q(p, col);
            const std::string origin = s == 0 ? "h[" + std::to_string(p) + "," + std::to_string(j) + "]"
                                              : "s" + std::to_string(s) + ":r" + std::to_string(p) + "-r" +
                                                    std::to_string(j);
            detail::add_halfspace(c.halfspaces, h, origin);
        }
    }
    c.topology = topology_of(c.trace);
    return c;
}

/// Classifies d against the cone. Exact scalars are classified exactly; floating inputs
/// treat |(h,d)| <= tol as zero.
template <class T>
Membership membership(const NJCone& cone, const std::vector<T>& d, double tol = 1e-9) {
    if (d.size() != cone.dimension()) throw std::invalid_argument("membership: dimension mismatch");
    bool on_boundary = false;
    for (const auto& h : cone.halfspaces) {
        const int s = sign_with_tolerance(dot(h.normal, d), tol);
        if (s < 0) return Membership::outside;
        if (s == 0) on_boundary = true;
    }
    return on_boundary ? Membership::boundary : Membership::interior;
}

template <class T>
Membership membership(const NJCone& cone, const DissimilarityVector<T>& d, double tol = 1e-9) {
    return membership(cone, d.entries(), tol);
}

class EmptyConeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// True iff h is a nonnegative combination of `others`, i.e. (h,x) >= 0 is implied.
inline bool implied_by(const IntVector& h, const std::vector<const IntVector*>& others) {
    std::vector<std::vector<Rational>> cols;
    cols.reserve(others.size());
    for (const auto* o : others) {
        std::vector<Rational> c(o->size());
        for (std::size_t i = 0; i < o->size(); ++i) c[i] = Rational(static_cast<long>((*o)[i]));
        cols.push_back(std::move(c));
    }
    std::vector<Rational> target(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) target[i] = Rational(static_cast<long>(h[i]));
    if (cols.empty()) return is_zero(h);
    return nonnegative_combination(cols, target).has_value();
}

/// Removes redundant half-spaces one at a time. Half-space k is dropped when the remaining
/// constraints already force (h_k, x) >= 0, which by Farkas' lemma holds iff h_k is a
/// nonnegative combination of them (decided by exact LP).
inline NJCone irredundant(const NJCone& cone) {
    // A full-dimensional cone has an interior point; with h and -h both implied the cone is
    // contained in a hyperplane. Detect that explicitly.
    NJCone out = cone;
    std::vector<bool> keep(cone.halfspaces.size(), true);
    for (std::size_t k = 0; k < cone.halfspaces.size(); ++k) {
        std::vector<const IntVector*> others;
        for (std::size_t j = 0; j < cone.halfspaces.size(); ++j)
            if (j != k && keep[j]) others.push_back(&cone.halfspaces[j].normal);
        IntVector neg = cone.halfspaces[k].normal;
        for (auto& x : neg) x = -x;
        if (!others.empty() && implied_by(neg, others)) {
            throw EmptyConeError("irredundant: cone has empty interior (" + cone.halfspaces[k].origin +
                                 " is forced to equality)");
        }
        if (implied_by(cone.halfspaces[k].normal, others)) keep[k] = false;
    }
    out.halfspaces.clear();
    for (std::size_t k = 0; k < cone.halfspaces.size(); ++k)
        if (keep[k]) out.halfspaces.push_back(cone.halfspaces[k]);
    out.irredundant = true;
    return out;
}

/// Image of the cone under relabeling: sigma maps the cone {x : (h,x) >= 0} to
/// {y : (sigma h, y) >= 0}.
inline NJCone permuted(const NJCone& cone, const Permutation& sigma) {
    NJCone out;
    out.n = cone.n;
    out.irredundant = cone.irredundant;
    for (const auto& h : cone.halfspaces) out.halfspaces.push_back({permute_entries(sigma, h.normal), h.origin});
    if (!cone.trace.picks.empty()) out.trace = permuted(cone.trace, sigma);
    if (cone.topology) out.topology = cone.topology->permuted(sigma);
    return out;
}

}  // namespace njgeom

#endif  // NJGEOM_CONE_HPP
