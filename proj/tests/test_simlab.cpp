#include "njgeom/simlab.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace njgeom;

namespace {

const ConeCensus& five() {
    static const ConeCensus c = census(5);
    return c;
}

TreeModel zero_model() { return {"zero", {0, 0, 0, 0, 0}, 0, 0}; }

std::size_t mismatches(const Sequence& x, const Sequence& y) {
    std::size_t k = 0;
    for (std::size_t s = 0; s < x.size(); ++s) k += x[s] != y[s];
    return k;
}

}  // namespace

TEST(TreeMetric, InteriorEdgeIndicators) {
    TreeModel m = zero_model();
    m.alpha = 0.7;
    m.beta = 0.2;
    const auto d = tree_metric(m);
    for (int a = 1; a < 5; ++a)
        for (int b = 0; b < a; ++b) {
            const bool cross01 = (a < 2) != (b < 2);
            const bool cross34 = (a > 2) != (b > 2);
            EXPECT_DOUBLE_EQ(d(a, b), 0.7 * cross01 + 0.2 * cross34) << a << b;
        }
}

TEST(TreeMetric, ModelsRecoveredByNj) {
    for (const auto& m : {model_t1(), model_t2()}) {
        const auto out = topologies(nj_run(tree_metric(m)));
        ASSERT_EQ(out.size(), 1u) << m.name;
        EXPECT_EQ(out[0], m.topology());
        EXPECT_EQ(to_newick(out[0]), "((0,1),2,(3,4));");
    }
}

TEST(TreeMetric, StarTreeIsDegenerate) {
    TreeModel m = model_t1();
    m.alpha = m.beta = 0;
    const auto d = convert<Rational>(tree_metric(m));
    EXPECT_GT(topologies(nj_run(d)).size(), 1u);
    EXPECT_THROW(validate(m, true), std::invalid_argument);
}

TEST(Simulate, ZeroLengthsGiveIdenticalSequences) {
    ExperimentConfig c;
    c.sites = 2000;
    auto g = njtest::rng(1);
    const auto aln = simulate_alignment(zero_model(), c, g);
    for (int a = 1; a < 5; ++a) EXPECT_EQ(aln[static_cast<std::size_t>(a)], aln[0]);
}

TEST(Simulate, JcMismatchMatchesExpectation) {
    ExperimentConfig c;
    c.sites = 100000;
    auto g = njtest::rng(2);
    const auto m = model_t2();
    const auto aln = simulate_alignment(m, c, g);
    const auto d = tree_metric(m);
    const double n = static_cast<double>(c.sites);
    for (int a = 1; a < 5; ++a)
        for (int b = 0; b < a; ++b) {
            const double expect = 0.75 * (1 - std::exp(-4 * d(a, b) / 3));
            const double seen = static_cast<double>(mismatches(aln[static_cast<std::size_t>(a)], aln[static_cast<std::size_t>(b)])) / n;
            EXPECT_NEAR(seen, expect, 3 * std::sqrt(expect * (1 - expect) / n)) << a << b;
        }
}

TEST(Simulate, RootStatesUniform) {
    ExperimentConfig c;
    c.sites = 40000;
    auto g = njtest::rng(3);
    const auto aln = simulate_alignment(model_t1(), c, g);
    std::array<double, 4> k{};
    for (auto s : aln[2]) ++k[s];
    double chi = 0;
    for (double x : k) chi += (x - 10000) * (x - 10000) / 10000;
    EXPECT_LT(chi, 16.27);  // 3 df, p = 0.001
}

TEST(Simulate, K2pWithUnitKappaIsJc) {
    // classes of the pair (0, 1): same, transition, transversion
    ExperimentConfig c;
    c.sites = 100000;
    c.substitution = SubstitutionModel::k2p;
    c.kappa = 1.0;
    auto g = njtest::rng(4);
    const auto m = model_t1();
    const auto aln = simulate_alignment(m, c, g);
    std::array<double, 3> k{};
    for (std::size_t s = 0; s < c.sites; ++s) {
        const int diff = aln[0][s] ^ aln[1][s];
        ++k[diff == 0 ? 0 : diff == 1 ? 1 : 2];
    }
    const double p = 0.75 * (1 - std::exp(-4 * tree_metric(m)(0, 1) / 3));
    const std::array<double, 3> e{(1 - p) * 1e5, p / 3 * 1e5, 2 * p / 3 * 1e5};
    double chi = 0;
    for (int j = 0; j < 3; ++j) chi += (k[static_cast<std::size_t>(j)] - e[static_cast<std::size_t>(j)]) * (k[static_cast<std::size_t>(j)] - e[static_cast<std::size_t>(j)]) / e[static_cast<std::size_t>(j)];
    EXPECT_LT(chi, 13.82);  // 2 df, p = 0.001
}

TEST(Simulate, K2pProbabilitiesAreConsistent) {
    for (double kappa : {0.5, 1.0, 2.0, 5.0})
        for (double d : {0.0, 0.1, 0.8, 3.0}) {
            const auto p = change_probabilities(d, SubstitutionModel::k2p, kappa);
            EXPECT_NEAR(k2p_distance(p.transition, p.transversion), d, 1e-9);
            if (kappa == 1.0) EXPECT_NEAR(p.transition + p.transversion, 0.75 * (1 - std::exp(-4 * d / 3)), 1e-12);
        }
}

TEST(Estimate, ClosedForm) {
    EXPECT_NEAR(jc_distance(0.3), 0.3831, 5e-5);
    EXPECT_DOUBLE_EQ(jc_distance(0.3), -0.75 * std::log(0.6));
    EXPECT_TRUE(std::isinf(jc_distance(0.75)));
    Sequence x{0, 1, 2, 3, 0, 1, 2, 3};
    bool cap = true;
    EXPECT_EQ(corrected_distance(x, x, SubstitutionModel::jc, cap), 0.0);
    EXPECT_FALSE(cap);
    EXPECT_FALSE(std::signbit(corrected_distance(x, x, SubstitutionModel::k2p, cap)));
    Sequence y{1, 0, 3, 2, 1, 0, 3, 2};  // all transitions, K2P undefined
    EXPECT_EQ(corrected_distance(x, y, SubstitutionModel::k2p, cap), kDistanceCap);
    EXPECT_TRUE(cap);
    Sequence z{2, 3, 0, 1, 2, 3, 0, 0};  // 7 of 8 differ, JC undefined
    EXPECT_EQ(corrected_distance(x, z, SubstitutionModel::jc, cap), kDistanceCap);
    EXPECT_TRUE(cap);
}

TEST(Estimate, ConsistentAtManySites) {
    const auto m = model_t2();
    const auto d = tree_metric(m);
    for (auto smodel : {SubstitutionModel::jc, SubstitutionModel::k2p}) {
        ExperimentConfig c;
        c.sites = 200000;
        c.substitution = smodel;
        auto g = njtest::rng(5);
        const auto est = estimate_distances(simulate_alignment(m, c, g), smodel);
        EXPECT_FALSE(est.any_capped());
        for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(est.d[i], d[i], 0.03) << to_string(smodel) << i;
    }
}

TEST(Experiment, CountsAndConsistency) {
    ExperimentConfig c;
    c.replicates = 300;
    c.seed = 11;
    const auto r = run_experiment(c, five());
    ASSERT_EQ(r.records.size(), 300u);
    EXPECT_EQ(r.correct.count + r.incorrect.count, 300u);
    const auto cones = five().cones();
    for (const auto& rec : r.records) {
        const auto again = distance_to_wrong(rec.d.entries(), c.model.topology(), cones);
        EXPECT_EQ(again.verdict, rec.verdict);
        EXPECT_DOUBLE_EQ(again.boundary_distance, rec.boundary_distance);
        // the verdict agrees with what NJ itself returns
        if (const auto t = nj_unique_trace(rec.d)) EXPECT_EQ(topology_of(*t) == c.model.topology(), rec.verdict == Verdict::correct);
        if (rec.verdict == Verdict::incorrect) EXPECT_EQ(rec.nearest_region, c.model.topology());
    }
}

TEST(Experiment, ReplayIsBitIdentical) {
    ExperimentConfig c;
    c.model = model_t2();
    c.substitution = SubstitutionModel::k2p;
    c.replicates = 120;
    c.seed = 12;
    std::ostringstream a, b, s1, s2;
    const auto r1 = run_experiment(c, five());
    c.threads = 3;
    const auto r2 = run_experiment(c, five());
    write_records_csv(a, r1);
    write_records_csv(b, r2);
    write_summary_csv(s1, r1);
    write_summary_csv(s2, r2);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(s1.str(), s2.str());
    c.seed = 13;
    std::ostringstream other;
    write_records_csv(other, run_experiment(c, five()));
    EXPECT_NE(other.str(), a.str());
}

TEST(Experiment, RecordCsvShape) {
    ExperimentConfig c;
    c.replicates = 5;
    std::ostringstream os;
    write_records_csv(os, run_experiment(c, five()));
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "replicate,d01,d02,d12,d03,d13,d23,d04,d14,d24,d34,verdict,boundary_distance,nearest_region,capped");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 5);
}

TEST(Experiment, RejectsBadConfig) {
    ExperimentConfig c;
    c.sites = 0;
    EXPECT_THROW(run_experiment(c, five()), std::invalid_argument);
    c = ExperimentConfig{};
    c.model.alpha = 0;
    EXPECT_THROW(run_experiment(c, five()), std::invalid_argument);
}

TEST(ClassStats, SampleVariance) {
    const auto s = class_stats({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_DOUBLE_EQ(s.variance, 5.0 / 3);
    EXPECT_EQ(class_stats({}).count, 0u);
}

TEST(Gaussian, ZeroNoiseAlwaysCorrect) {
    const auto curve = gaussian_experiment(model_t1(), {0.0}, 50, 1, five());
    ASSERT_EQ(curve.size(), 1u);
    EXPECT_EQ(curve[0].correct_rate, 1.0);
    EXPECT_GT(curve[0].mean_boundary_distance, 0);
}

TEST(Gaussian, MonotoneAndLimit) {
    const auto grid = parse_grid("0:0.05:0.3");
    const auto curve = gaussian_experiment(model_t1(), grid, 1500, 2, five());
    for (std::size_t k = 1; k < curve.size(); ++k) {
        const double se = std::hypot(curve[k].stderr_, curve[k - 1].stderr_);
        EXPECT_LE(curve[k].correct_rate, curve[k - 1].correct_rate + 3 * se) << curve[k].sigma;
    }
    // very large noise: the correct region carries 2 of the 30 equal cones
    const auto far = gaussian_experiment(model_t1(), {100.0}, 3000, 3, five());
    EXPECT_NEAR(far[0].correct_rate, 2.0 / 30, 3 * std::sqrt((2.0 / 30) * (28.0 / 30) / 3000));
}

TEST(Gaussian, GridParsing) {
    const auto g = parse_grid("0:0.05:0.5");
    ASSERT_EQ(g.size(), 11u);
    EXPECT_DOUBLE_EQ(g.front(), 0.0);
    EXPECT_NEAR(g.back(), 0.5, 1e-12);
    EXPECT_THROW(parse_grid("0:0:1"), std::invalid_argument);
    EXPECT_THROW(parse_grid("0;1"), std::invalid_argument);
    EXPECT_THROW(parse_grid("1:0.1:0"), std::invalid_argument);
}
