#include "njgeom/topology.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace njgeom;

TEST(Newick, FiveLeafCanonicalForm) {
    const TreeTopology t(5, {leaf(0) | leaf(1), leaf(3) | leaf(4)});
    EXPECT_EQ(to_newick(t), "((0,1),2,(3,4));");
}

TEST(Newick, FourLeafUsesCentralEdge) {
    const TreeTopology t(4, {leaf(0) | leaf(1)});
    EXPECT_EQ(to_newick(t, {"a", "b", "c", "d"}), "((a,b),(c,d));");
    const TreeTopology u(4, {leaf(0) | leaf(2)});
    EXPECT_EQ(to_newick(u), "((0,2),(1,3));");
}

TEST(Newick, SixLeafShapes) {
    const TreeTopology sym(6, {leaf(0) | leaf(1), leaf(2) | leaf(3), leaf(4) | leaf(5)});
    EXPECT_EQ(to_newick(sym), "((0,1),(2,3),(4,5));");
    const TreeTopology cat(6, {leaf(0) | leaf(1), leaf(0) | leaf(1) | leaf(2), leaf(4) | leaf(5)});
    EXPECT_EQ(to_newick(cat), "(((0,1),2),(3,(4,5)));");
}

TEST(Newick, ParsesRootedAndUnrootedForms) {
    const TreeTopology t(5, {leaf(0) | leaf(1), leaf(3) | leaf(4)});
    EXPECT_EQ(parse_newick("((0,1),2,(3,4));"), t);
    EXPECT_EQ(parse_newick("(((0:1,1:2):0.5,2),(3,4));"), t);
    EXPECT_EQ(parse_newick(" ( (4,3) ,(1,0),2 ) ; "), t);
    EXPECT_EQ(parse_newick("((a,b),(c,d));", {"a", "b", "c", "d"}), TreeTopology(4, {leaf(0) | leaf(1)}));
}

TEST(Newick, RejectsMalformedInput) {
    EXPECT_THROW(parse_newick("((0,1),2,(3,4))"), NewickError);
    EXPECT_THROW(parse_newick("((0,1),2,(3,4);"), NewickError);
    EXPECT_THROW(parse_newick("((0,1,2),3,(4,5));"), NewickError);
    EXPECT_THROW(parse_newick("((0,1),2,(3,3));"), NewickError);
    EXPECT_THROW(parse_newick("((a,b),(c,x));", {"a", "b", "c", "d"}), NewickError);
}

TEST(Newick, RandomTreesRoundTrip) {
    auto g = njtest::rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 4 + trial % 9;
        const auto t = random_tree(n, g).topology();
        EXPECT_EQ(parse_newick(to_newick(t)), t);
        const auto s = njtest::random_permutation(n, g);
        EXPECT_EQ(t.permuted(s).permuted(s.inverse()), t);
    }
}

TEST(TreeTopology, RejectsIncompatibleSplits) {
    EXPECT_THROW(TreeTopology(5, {leaf(0) | leaf(1), leaf(1) | leaf(2)}), std::invalid_argument);
    EXPECT_THROW(TreeTopology(5, {leaf(0) | leaf(1)}), std::invalid_argument);
}

TEST(TreeMetric, PathLengths) {
    // ((0,1),2,(3,4)) with pendant edges 0 and interior edges alpha, beta
    const TreeTopology t(5, {leaf(0) | leaf(1), leaf(3) | leaf(4)});
    auto w = weighted_tree(t, 0.0);
    const double alpha = 0.7, beta = 0.2;
    for (auto& e : w.edges) {
        if (e.u < 5 || e.v < 5) continue;
        const auto side = detail::subtree_leaves(detail::graph_from_splits(t), e.v, e.u);
        const bool is_01 = side == (leaf(0) | leaf(1)) || side == (all_leaves(5) & ~(leaf(0) | leaf(1)));
        e.length = is_01 ? alpha : beta;
    }
    const auto d = tree_metric(w);
    // indicator patterns of the two interior edges, row-wise order d10 d20 d21 d30 d31 d32 d40 d41 d42 d43
    const double a[10] = {0, 1, 1, 1, 1, 0, 1, 1, 0, 0};
    const double b[10] = {0, 0, 0, 1, 1, 1, 1, 1, 1, 0};
    for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(d[i], alpha * a[i] + beta * b[i]);
}
