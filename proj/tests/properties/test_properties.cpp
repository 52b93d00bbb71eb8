// Randomized properties of NJ, its cones and the cone projection. Each suite draws its own
// seeded inputs, so the binary can run on its own or under ctest.

#include "njgeom/census.hpp"
#include "njgeom/projection.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace njgeom;

namespace {

const ConeCensus& cached(int n) {
    static std::map<int, ConeCensus> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, census(n)).first;
    return it->second;
}

double norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

std::vector<double> gaussian(std::size_t m, std::mt19937_64& g, double scale = 1.0) {
    std::normal_distribution<double> z(0.0, scale);
    std::vector<double> v(m);
    for (auto& x : v) x = z(g);
    return v;
}

}  // namespace

TEST(ShiftInvariance, NjOutputUnchanged) {
    auto g = njtest::rng(101);
    std::uniform_int_distribution<long> coef(-9, 9);
    for (int n = 4; n <= 8; ++n)
        for (int s = 0; s < 200; ++s) {
            const auto d = njtest::random_rational(n, g);
            auto shifted = d;
            for (int a = 0; a < n; ++a) {
                auto sh = shift_vector<Rational>(a, n);
                sh *= Rational(coef(g));
                shifted += sh;
            }
            EXPECT_EQ(nj_run(d), nj_run(shifted)) << n;
        }
}

TEST(ShiftInvariance, ShiftsLieInEveryConeLineality) {
    for (int n : {5, 6})
        for (const auto& e : cached(n).entries)
            for (int a = 0; a < n; ++a) {
                const auto s = shift_vector<Rational>(a, n);
                for (const auto& h : e.cone.halfspaces) EXPECT_EQ(dot(h.normal, s.entries()), 0);
            }
}

TEST(PermutationEquivariance, NjCommutesWithRelabeling) {
    auto g = njtest::rng(102);
    for (int n = 4; n <= 8; ++n)
        for (int s = 0; s < 200; ++s) {
            const auto d = njtest::random_rational(n, g);
            const auto sigma = njtest::random_permutation(n, g);
            std::set<TreeTopology> moved;
            for (const auto& t : topologies(nj_run(d))) moved.insert(t.permuted(sigma));
            const auto direct = topologies(nj_run(apply_permutation(sigma, d)));
            EXPECT_EQ(std::set<TreeTopology>(direct.begin(), direct.end()), moved) << n;
        }
}

TEST(PermutationEquivariance, CensusIsClosedUnderRelabeling) {
    auto g = njtest::rng(103);
    for (int n : {5, 6}) {
        const auto& c = cached(n);
        std::set<std::vector<IntVector>> keys;
        for (const auto& e : c.entries) keys.insert(e.cone.key());
        for (int s = 0; s < 20; ++s) {
            const auto sigma = njtest::random_permutation(n, g);
            for (const auto& e : c.entries) {
                const auto p = permuted(e.cone, sigma);
                EXPECT_TRUE(keys.count(p.key()));
                const auto it = c.by_trace.find(permuted(e.cone.trace, sigma));
                ASSERT_NE(it, c.by_trace.end());
                EXPECT_EQ(c.entries[it->second].cone.key(), p.key());
            }
        }
    }
}

TEST(PermutationEquivariance, MembershipAndDistance) {
    auto g = njtest::rng(104);
    const auto& c = cached(5);
    for (int s = 0; s < 200; ++s) {
        const auto d = njtest::random_gaussian(5, g);
        const auto sigma = njtest::random_permutation(5, g);
        const auto pd = apply_permutation(sigma, d);
        const auto& cone = c.entries[static_cast<std::size_t>(s) % c.entries.size()].cone;
        const auto pc = permuted(cone, sigma);
        EXPECT_EQ(membership(cone, d.entries()), membership(pc, pd.entries()));
        EXPECT_NEAR(nearest_point(cone, d.entries()).distance, nearest_point(pc, pd.entries()).distance, 1e-9);
    }
}

TEST(Projection, Idempotent) {
    auto g = njtest::rng(105);
    for (int n : {5, 6}) {
        const auto& c = cached(n);
        for (int s = 0; s < 400; ++s) {
            const auto& cone = c.entries[static_cast<std::size_t>(s) % c.entries.size()].cone;
            const auto v = gaussian(cone.dimension(), g);
            const auto p = nearest_point(cone, v);
            const auto pp = nearest_point(cone, p.point);
            EXPECT_LT(norm_diff(p.point, pp.point), 1e-9);
            EXPECT_LT(pp.distance, 1e-9);
            EXPECT_NE(membership(cone, p.point, 1e-9), Membership::outside);
        }
    }
}

TEST(Projection, NonExpansive) {
    auto g = njtest::rng(106);
    for (int n : {5, 6}) {
        const auto& c = cached(n);
        for (int s = 0; s < 400; ++s) {
            const auto& cone = c.entries[static_cast<std::size_t>(s * 7) % c.entries.size()].cone;
            const auto u = gaussian(cone.dimension(), g);
            auto v = u;
            const auto step = gaussian(cone.dimension(), g, s % 2 ? 0.05 : 2.0);
            for (std::size_t k = 0; k < v.size(); ++k) v[k] += step[k];
            const auto pu = nearest_point(cone, u), pv = nearest_point(cone, v);
            EXPECT_LE(norm_diff(pu.point, pv.point), norm_diff(u, v) + 1e-9);
            // distance to a convex set is 1-Lipschitz
            EXPECT_LE(std::abs(pu.distance - pv.distance), norm_diff(u, v) + 1e-9);
        }
    }
}

class MembershipAgreement : public ::testing::TestWithParam<int> {};

// For every sample: the cone of NJ's own trace contains it in its interior and no other cone
// of the census does.
TEST_P(MembershipAgreement, AgreesWithClassifier) {
    const int n = GetParam();
    const auto& c = cached(n);
    auto g = njtest::rng(200 + static_cast<std::uint64_t>(n));
    constexpr int samples = 100000;
    int agree = 0, ties = 0;
    for (int s = 0; s < samples; ++s) {
        const auto d = njtest::random_gaussian(n, g);
        const auto t = nj_unique_trace(d);
        if (!t) {
            ++ties;
            continue;
        }
        const std::size_t own = c.by_trace.at(canonical(*t));
        int interior = 0;
        bool own_interior = false;
        for (std::size_t k = 0; k < c.entries.size(); ++k) {
            const auto m = membership(c.entries[k].cone, d.entries());
            interior += m == Membership::interior;
            if (k == own) own_interior = m == Membership::interior;
        }
        agree += own_interior && interior == 1;
    }
    EXPECT_EQ(agree + ties, samples);
    EXPECT_EQ(ties, 0);
}

INSTANTIATE_TEST_SUITE_P(Census, MembershipAgreement, ::testing::Values(5, 6));
