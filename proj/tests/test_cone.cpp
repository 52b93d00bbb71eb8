#include "njgeom/cone.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace njgeom;

namespace {

CherryTrace trace_34_2() { return parse_trace("3+4 2+3.4", 5); }

// (h, d) from the Q-values: (h_ij, d) = q_j - q_i.
Rational q_gap(std::size_t i, std::size_t j, const std::vector<Rational>& d, int n) {
    const auto q = q_criterion(DissimilarityVector<Rational>(n, d));
    return q[j] - q[i];
}

// Listed in lexicographic pair order d01, d02, ..., d24, d34.
DissimilarityVector<Rational> ray_vector() {
    const int v[10] = {-1, 1, 1, -1, -1, 1, 1, -1, 1, -1};
    DissimilarityVector<Rational> d(5);
    int k = 0;
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) d(a, b) = v[k++];
    return d;
}

}  // namespace

TEST(HalfSpace, NormalMatchesQGap) {
    auto g = njtest::rng(20);
    for (int n = 4; n <= 7; ++n) {
        const auto d = njtest::random_rational(n, g);
        for (std::size_t i = 0; i < pair_count(n); ++i)
            for (std::size_t j = 0; j < pair_count(n); ++j) {
                if (i == j) continue;
                const auto h = halfspace_normal(i, j, n);
                // the normal is a positive multiple of -A(e_i - e_j)
                EXPECT_EQ(sgn(dot(h.normal, d.entries())), sgn(q_gap(i, j, d.entries(), n)));
                EXPECT_EQ(halfspace_normal(j, i, n).normal, [&] {
                    auto neg = h.normal;
                    for (auto& x : neg) x = -x;
                    return neg;
                }());
            }
    }
}

TEST(HalfSpace, ShiftVectorsAreOrthogonal) {
    for (int n = 4; n <= 7; ++n) {
        for (std::size_t i = 0; i < pair_count(n); ++i)
            for (std::size_t j = 0; j < pair_count(n); ++j) {
                if (i == j) continue;
                const auto h = halfspace_normal(i, j, n);
                for (int a = 0; a < n; ++a) EXPECT_EQ(dot(h.normal, shift_vector(a, n).entries()), 0);
            }
    }
}

TEST(Cone34_2, ElevenInequalitiesReduceToNineFacets) {
    const auto c = cone_from_trace(trace_34_2());
    ASSERT_EQ(c.halfspaces.size(), 11u);
    const std::size_t p = pair_to_index(4, 3, 5);
    EXPECT_EQ(p, 9u);
    for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(c.halfspaces[j].origin, "h[9," + std::to_string(j) + "]");
    const auto r = irredundant(c);
    ASSERT_EQ(r.halfspaces.size(), 9u);
    std::set<std::string> kept;
    for (const auto& h : r.halfspaces) kept.insert(h.origin);
    EXPECT_EQ(kept.count("h[9,1]"), 0u);
    EXPECT_EQ(kept.count("h[9,2]"), 0u);
    EXPECT_EQ(r.topology, TreeTopology(5, {leaf(3) | leaf(4), leaf(0) | leaf(1)}));
}

TEST(Cone34_2, RedundantPairIsImpliedByTheRest) {
    const auto c = cone_from_trace(trace_34_2());
    for (std::size_t k : {1u, 2u}) {
        std::vector<const IntVector*> rest;
        for (std::size_t j = 0; j < c.halfspaces.size(); ++j)
            if (j != 1 && j != 2) rest.push_back(&c.halfspaces[j].normal);
        EXPECT_TRUE(implied_by(c.halfspaces[k].normal, rest));
    }
    // removing either of the nine facets enlarges the cone
    const auto r = irredundant(c);
    for (std::size_t k = 0; k < r.halfspaces.size(); ++k) {
        std::vector<const IntVector*> rest;
        for (std::size_t j = 0; j < r.halfspaces.size(); ++j)
            if (j != k) rest.push_back(&r.halfspaces[j].normal);
        EXPECT_FALSE(implied_by(r.halfspaces[k].normal, rest)) << r.halfspaces[k].origin;
    }
}

TEST(FirstStepCone, AllHalfspacesAreFacets) {
    for (int n = 5; n <= 6; ++n)
        for (std::size_t i = 0; i < pair_count(n); ++i) {
            const auto c = first_step_cone(i, n);
            EXPECT_EQ(irredundant(c).halfspaces.size(), pair_count(n) - 1);
        }
}

TEST(FirstStepCone, FourTaxaHaveOnlyTwoFacets) {
    // complementary pairs share Q-values, so five comparisons collapse to two
    for (std::size_t i = 0; i < 6; ++i) {
        const auto c = first_step_cone(i, 4);
        EXPECT_EQ(c.halfspaces.size(), 2u);
        EXPECT_EQ(irredundant(c).halfspaces.size(), 2u);
    }
}

TEST(FirstStepCone, TwoFourWitnessHoldsFromSixTaxa) {
    for (int n = 6; n <= 7; ++n) {
        const std::size_t m = pair_count(n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                const auto d = two_four_witness(i, j, n);
                EXPECT_EQ(q_gap(i, j, d, n), 0);
                for (std::size_t k = 0; k < m; ++k)
                    if (k != i && k != j) EXPECT_GT(q_gap(i, k, d, n), 0) << n << ":" << i << "," << j << "," << k;
            }
    }
}

TEST(FirstStepCone, TwoFourWitnessTiesThirdPairForFiveTaxa) {
    int failures = 0;
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            if (i == j) continue;
            const auto d = two_four_witness(i, j, 5);
            const auto [a, b] = index_to_pair(i, 5);
            const auto [c, e] = index_to_pair(j, 5);
            const bool share = a == c || a == e || b == c || b == e;
            bool ok = q_gap(i, j, d, 5) == 0;
            for (std::size_t k = 0; k < 10; ++k)
                if (k != i && k != j) ok = ok && q_gap(i, k, d, 5) > 0;
            EXPECT_EQ(ok, !share);
            failures += !ok;
        }
    EXPECT_EQ(failures, 60);
}

TEST(FirstStepCone, FacetWitnessCertifiesEveryPair) {
    for (int n = 5; n <= 7; ++n) {
        const std::size_t m = pair_count(n);
        for (std::size_t i = 0; i < m; ++i) {
            const auto cone = first_step_cone(i, n);
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                const auto d = facet_witness(i, j, n);
                EXPECT_EQ(membership(cone, d), Membership::boundary);
                int zeros = 0;
                for (const auto& h : cone.halfspaces) zeros += sgn(dot(h.normal, d)) == 0;
                EXPECT_EQ(zeros, 1);
            }
        }
    }
}

TEST(FirstStepCone, RayVectorIsOnFiveBoundaries) {
    const auto ray = ray_vector().entries();
    const std::set<std::size_t> tied{pair_to_index(0, 1, 5), pair_to_index(1, 2, 5), pair_to_index(2, 3, 5),
                                     pair_to_index(3, 4, 5), pair_to_index(0, 4, 5)};
    for (std::size_t i = 0; i < 10; ++i) {
        const auto verdict = membership(first_step_cone(i, 5), ray);
        EXPECT_EQ(verdict, tied.count(i) ? Membership::boundary : Membership::outside) << i;
    }
}

TEST(Membership, AgreesWithClassifierOnRandomVectors) {
    auto g = njtest::rng(21);
    std::vector<NJCone> cones;
    std::set<CherryTrace> seen;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto d = njtest::random_gaussian(5, g);
        const auto t = nj_unique_trace(d);
        ASSERT_TRUE(t.has_value());
        seen.insert(*t);
    }
    EXPECT_EQ(seen.size(), 30u);
    for (const auto& t : seen) cones.push_back(cone_from_trace(t));
    for (int trial = 0; trial < 2000; ++trial) {
        const auto d = njtest::random_gaussian(5, g);
        const auto t = nj_unique_trace(d);
        ASSERT_TRUE(t.has_value());
        int inside = 0;
        for (const auto& c : cones) {
            const auto v = membership(c, d);
            EXPECT_NE(v, Membership::boundary);
            if (v == Membership::interior) {
                ++inside;
                EXPECT_EQ(c.trace, *t);
            }
        }
        EXPECT_EQ(inside, 1);
    }
}

TEST(Cone, DuplicateNormalsAreDropped) {
    std::vector<HalfSpace> hs;
    detail::add_halfspace(hs, {Rational(1, 2), 1, 0}, "a");
    detail::add_halfspace(hs, {1, 2, 0}, "b");
    detail::add_halfspace(hs, {0, 0, 0}, "c");
    detail::add_halfspace(hs, {-1, -2, 0}, "d");
    ASSERT_EQ(hs.size(), 2u);
    EXPECT_EQ(hs[0].normal, (IntVector{1, 2, 0}));
    EXPECT_EQ(hs[1].normal, (IntVector{-1, -2, 0}));
}

TEST(Cone, RelabelingIsEquivariant) {
    auto g = njtest::rng(22);
    const auto c = cone_from_trace(trace_34_2());
    for (int trial = 0; trial < 30; ++trial) {
        const auto s = njtest::random_permutation(5, g);
        const auto image = permuted(c, s);
        const auto direct = cone_from_trace(permuted(c.trace, s));
        EXPECT_EQ(image.trace, direct.trace);
        EXPECT_EQ(irredundant(image).key(), irredundant(direct).key());
        const auto d = njtest::random_gaussian(5, g);
        EXPECT_EQ(membership(c, d), membership(image, apply_permutation(s, d)));
    }
}

TEST(Cone, SixTaxaFacetCountsByType) {
    const std::pair<const char*, std::size_t> cases[] = {{"4+5 3+4.5 0+1", 23}, {"4+5 2+3 0+1", 22}, {"4+5 2+3 0+2.3", 22}};
    for (const auto& [text, facets] : cases) {
        const auto c = cone_from_trace(parse_trace(text, 6));
        EXPECT_EQ(c.halfspaces.size(), 25u) << text;
        EXPECT_EQ(irredundant(c).halfspaces.size(), facets) << text;
    }
}
