#ifndef NJGEOM_TOPOLOGY_HPP
#define NJGEOM_TOPOLOGY_HPP

#include "njgeom/distvec.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace njgeom {

/// Set of original taxa as a bitmask (bit a set iff taxon a is in the set).
using LeafSet = std::uint64_t;

constexpr int kMaxTaxa = 64;

inline LeafSet leaf(int a) { return LeafSet{1} << a; }
inline LeafSet all_leaves(int n) { return n >= 64 ? ~LeafSet{0} : (leaf(n) - 1); }
inline int min_leaf(LeafSet s) { return std::countr_zero(s); }
inline int leaf_count(LeafSet s) { return std::popcount(s); }

inline std::vector<int> leaves_of(LeafSet s) {
    std::vector<int> out;
    while (s != 0) {
        out.push_back(std::countr_zero(s));
        s &= s - 1;
    }
    return out;
}

inline LeafSet permute_leaves(const Permutation& sigma, LeafSet s) {
    LeafSet out = 0;
    for (int a : leaves_of(s)) out |= leaf(sigma(a));
    return out;
}

class NewickError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unrooted binary tree topology on leaves 0..n-1, stored as its set of nontrivial splits.
/// Each split is kept as the side that does not contain leaf 0, so equal topologies have
/// identical representations.
class TreeTopology {
public:
    TreeTopology() = default;

    /// Builds from splits (either side accepted). Validates pairwise compatibility and count n-3.
    TreeTopology(int n, const std::vector<LeafSet>& splits) : n_(n) {
        if (n < 3 || n > kMaxTaxa) throw std::invalid_argument("TreeTopology: unsupported taxon count");
        const LeafSet full = all_leaves(n);
        for (LeafSet s : splits) {
            if ((s & ~full) != 0) throw std::invalid_argument("TreeTopology: split mentions unknown taxa");
            if (s & 1) s = full & ~s;
            const int k = leaf_count(s);
            if (k < 2 || k > n - 2) throw std::invalid_argument("TreeTopology: trivial split");
            splits_.push_back(s);
        }
        std::sort(splits_.begin(), splits_.end());
        splits_.erase(std::unique(splits_.begin(), splits_.end()), splits_.end());
        if (splits_.size() != static_cast<std::size_t>(n - 3))
            throw std::invalid_argument("TreeTopology: a binary tree on " + std::to_string(n) + " leaves has " +
                                        std::to_string(n - 3) + " splits, got " + std::to_string(splits_.size()));
        for (std::size_t i = 0; i < splits_.size(); ++i)
            for (std::size_t j = i + 1; j < splits_.size(); ++j) {
                const LeafSet a = splits_[i], b = splits_[j];
                if ((a & b) != 0 && (a & b) != a && (a & b) != b)
                    throw std::invalid_argument("TreeTopology: incompatible splits");
            }
    }

    int taxa() const { return n_; }
    const std::vector<LeafSet>& splits() const { return splits_; }

    TreeTopology permuted(const Permutation& sigma) const {
        std::vector<LeafSet> s;
        s.reserve(splits_.size());
        for (LeafSet x : splits_) s.push_back(permute_leaves(sigma, x));
        return TreeTopology(n_, s);
    }

    /// True iff {a,b} is a cherry of this tree.
    bool is_cherry(int a, int b) const {
        if (n_ == 3) return true;
        const LeafSet p = leaf(a) | leaf(b);
        const LeafSet q = all_leaves(n_) & ~p;
        for (LeafSet s : splits_)
            if (s == p || s == q) return true;
        return false;
    }

    friend bool operator==(const TreeTopology&, const TreeTopology&) = default;
    friend auto operator<=>(const TreeTopology&, const TreeTopology&) = default;

private:
    int n_ = 0;
    std::vector<LeafSet> splits_;
};

namespace detail {

/// Undirected tree graph: ids 0..n-1 are leaves, larger ids internal nodes.
struct TreeGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;
};

inline TreeGraph graph_from_splits(const TreeTopology& t) {
    const int n = t.taxa();
    // Clusters not containing leaf 0 form a laminar family; each becomes an internal node.
    std::vector<LeafSet> clusters = t.splits();
    std::sort(clusters.begin(), clusters.end(),
              [](LeafSet a, LeafSet b) { return leaf_count(a) != leaf_count(b) ? leaf_count(a) < leaf_count(b) : a < b; });
    TreeGraph g;
    g.n = n;
    const int root = n;  // internal node adjacent to leaf 0
    g.adj.assign(static_cast<std::size_t>(n + 1 + static_cast<int>(clusters.size())), {});
    auto link = [&](int u, int v) {
        g.adj[static_cast<std::size_t>(u)].push_back(v);
        g.adj[static_cast<std::size_t>(v)].push_back(u);
    };
    link(0, root);
    auto parent_of = [&](LeafSet s, std::size_t self) -> int {
        for (std::size_t k = self + 1; k < clusters.size(); ++k)
            if ((clusters[k] & s) == s && clusters[k] != s) return n + 1 + static_cast<int>(k);
        return root;
    };
    for (std::size_t k = 0; k < clusters.size(); ++k) link(n + 1 + static_cast<int>(k), parent_of(clusters[k], k));
    for (int a = 1; a < n; ++a) {
        int owner = root;
        for (std::size_t k = 0; k < clusters.size(); ++k)
            if (clusters[k] & leaf(a)) {
                owner = n + 1 + static_cast<int>(k);
                break;
            }
        link(a, owner);
    }
    return g;
}

inline LeafSet subtree_leaves(const TreeGraph& g, int node, int from) {
    if (node < g.n) return leaf(node);
    LeafSet s = 0;
    for (int c : g.adj[static_cast<std::size_t>(node)])
        if (c != from) s |= subtree_leaves(g, c, node);
    return s;
}

inline std::string subtree_newick(const TreeGraph& g, int node, int from, const std::vector<std::string>& labels) {
    if (node < g.n) return labels[static_cast<std::size_t>(node)];
    std::vector<std::pair<int, int>> kids;  // (min leaf, child)
    for (int c : g.adj[static_cast<std::size_t>(node)])
        if (c != from) kids.emplace_back(min_leaf(subtree_leaves(g, c, node)), c);
    std::sort(kids.begin(), kids.end());
    std::string out = "(";
    for (std::size_t k = 0; k < kids.size(); ++k) {
        if (k) out += ",";
        out += subtree_newick(g, kids[k].second, node, labels);
    }
    return out + ")";
}

}  // namespace detail

inline std::vector<std::string> default_labels(int n) {
    std::vector<std::string> labels;
    for (int a = 0; a < n; ++a) labels.push_back(std::to_string(a));
    return labels;
}

/// Canonical Newick string. The tree is rooted at the center of its internal-node subtree:
/// a trifurcation at the central node, or a bifurcation on the central edge when the
/// center is an edge. Children are ordered by their smallest leaf label.
inline std::string to_newick(const TreeTopology& t, const std::vector<std::string>& labels = {}) {
    const int n = t.taxa();
    const auto names = labels.empty() ? default_labels(n) : labels;
    if (names.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("to_newick: label count mismatch");
    const auto g = detail::graph_from_splits(t);
    const int nodes = static_cast<int>(g.adj.size());
    // peel internal-tree leaves layer by layer
    std::vector<int> degree(static_cast<std::size_t>(nodes), 0);
    std::vector<bool> removed(static_cast<std::size_t>(nodes), false);
    int remaining = 0;
    for (int u = n; u < nodes; ++u) {
        ++remaining;
        for (int v : g.adj[static_cast<std::size_t>(u)])
            if (v >= n) ++degree[static_cast<std::size_t>(u)];
    }
    std::vector<int> layer;
    for (int u = n; u < nodes; ++u)
        if (degree[static_cast<std::size_t>(u)] <= 1) layer.push_back(u);
    while (remaining > 2) {
        std::vector<int> next;
        for (int u : layer) {
            removed[static_cast<std::size_t>(u)] = true;
            --remaining;
            for (int v : g.adj[static_cast<std::size_t>(u)])
                if (v >= n && !removed[static_cast<std::size_t>(v)] && --degree[static_cast<std::size_t>(v)] == 1)
                    next.push_back(v);
        }
        layer = std::move(next);
    }
    std::vector<int> centers;
    for (int u = n; u < nodes; ++u)
        if (!removed[static_cast<std::size_t>(u)]) centers.push_back(u);
    if (centers.size() == 2) {
        const int a = centers[0], b = centers[1];
        bool adjacent = false;
        for (int v : g.adj[static_cast<std::size_t>(a)]) adjacent |= (v == b);
        if (!adjacent) centers = {a};  // cannot happen for a tree; keep a single root
    }
    if (centers.size() == 1) return detail::subtree_newick(g, centers[0], -1, names) + ";";
    const int a = centers[0], b = centers[1];
    std::string sa = detail::subtree_newick(g, a, b, names);
    std::string sb = detail::subtree_newick(g, b, a, names);
    if (min_leaf(detail::subtree_leaves(g, b, a)) < min_leaf(detail::subtree_leaves(g, a, b))) std::swap(sa, sb);
    return "(" + sa + "," + sb + ");";
}

namespace detail {

struct NewickNode {
    std::string label;
    std::vector<NewickNode> children;
};

class NewickReader {
public:
    explicit NewickReader(std::string_view text) : s_(text) {}

    NewickNode read() {
        skip_space();
        NewickNode root = node();
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ';') ++pos_;
        else throw NewickError("newick: expected ';' at position " + std::to_string(pos_));
        skip_space();
        if (pos_ != s_.size()) throw NewickError("newick: trailing text after ';'");
        return root;
    }

private:
    NewickNode node() {
        NewickNode out;
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            for (;;) {
                out.children.push_back(node());
                skip_space();
                if (pos_ >= s_.size()) throw NewickError("newick: unbalanced parentheses");
                if (s_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (s_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                throw NewickError(std::string("newick: unexpected '") + s_[pos_] + "'");
            }
        }
        out.label = name();
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ':') {
            ++pos_;
            skip_space();
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                        s_[pos_] == 'e' || s_[pos_] == 'E' || s_[pos_] == '-' || s_[pos_] == '+'))
                ++pos_;
        }
        if (out.children.empty() && out.label.empty()) throw NewickError("newick: unlabeled leaf");
        return out;
    }

    std::string name() {
        skip_space();
        std::string out;
        if (pos_ < s_.size() && s_[pos_] == '\'') {
            ++pos_;
            while (pos_ < s_.size() && s_[pos_] != '\'') out += s_[pos_++];
            if (pos_ >= s_.size()) throw NewickError("newick: unterminated quoted label");
            ++pos_;
            return out;
        }
        while (pos_ < s_.size() && std::string_view("(),:;").find(s_[pos_]) == std::string_view::npos &&
               !std::isspace(static_cast<unsigned char>(s_[pos_])))
            out += s_[pos_++];
        return out;
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

inline LeafSet collect_splits(const NewickNode& node, const std::map<std::string, int>& index, LeafSet& seen,
                              std::vector<LeafSet>& clusters) {
    if (node.children.empty()) {
        auto it = index.find(node.label);
        if (it == index.end()) throw NewickError("newick: unknown leaf label '" + node.label + "'");
        if (seen & leaf(it->second)) throw NewickError("newick: duplicate leaf label '" + node.label + "'");
        seen |= leaf(it->second);
        return leaf(it->second);
    }
    LeafSet s = 0;
    for (const auto& c : node.children) s |= collect_splits(c, index, seen, clusters);
    clusters.push_back(s);
    return s;
}

inline std::size_t count_degree_problems(const NewickNode& node, bool is_root) {
    std::size_t bad = 0;
    if (!node.children.empty()) {
        const std::size_t deg = node.children.size() + (is_root ? 0 : 1);
        if (deg != 3 && !(is_root && node.children.size() == 2)) ++bad;
        for (const auto& c : node.children) bad += count_degree_problems(c, false);
    }
    return bad;
}

}  // namespace detail

/// Parses a Newick string into an unrooted binary topology. Leaves are matched against
/// `labels` (index = position); with no labels, leaf names must be the integers 0..n-1.
/// Branch lengths and internal labels are ignored; a bifurcating root is unrooted.
inline TreeTopology parse_newick(std::string_view text, const std::vector<std::string>& labels = {}) {
    detail::NewickReader reader(text);
    const auto root = reader.read();
    std::map<std::string, int> index;
    std::vector<std::string> names = labels;
    if (names.empty()) {
        // count leaves, expect 0..n-1
        std::vector<const detail::NewickNode*> stack{&root};
        int leaves = 0;
        while (!stack.empty()) {
            const auto* nd = stack.back();
            stack.pop_back();
            if (nd->children.empty()) ++leaves;
            for (const auto& c : nd->children) stack.push_back(&c);
        }
        names = default_labels(leaves);
    }
    for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = static_cast<int>(i);
    const int n = static_cast<int>(names.size());
    if (n < 3 || n > kMaxTaxa) throw NewickError("newick: unsupported number of leaves");
    if (detail::count_degree_problems(root, true) != 0) throw NewickError("newick: tree is not binary");
    LeafSet seen = 0;
    std::vector<LeafSet> clusters;
    detail::collect_splits(root, index, seen, clusters);
    if (seen != all_leaves(n)) throw NewickError("newick: leaf set does not match the taxon labels");
    std::vector<LeafSet> splits;
    for (LeafSet c : clusters) {
        const int k = leaf_count(c);
        if (k >= 2 && k <= n - 2) splits.push_back(c);
    }
    try {
        return TreeTopology(n, splits);
    } catch (const std::invalid_argument& e) {
        throw NewickError(std::string("newick: ") + e.what());
    }
}

/// Unrooted tree with edge lengths. Leaves are nodes 0..n-1.
struct WeightedTree {
    int n = 0;
    struct Edge {
        int u, v;
        double length;
    };
    int node_count = 0;
    std::vector<Edge> edges;

    TreeTopology topology() const {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
        for (const auto& e : edges) {
            adj[static_cast<std::size_t>(e.u)].push_back(e.v);
            adj[static_cast<std::size_t>(e.v)].push_back(e.u);
        }
        detail::TreeGraph g{n, adj};
        std::vector<LeafSet> splits;
        for (const auto& e : edges) {
            if (e.u < n || e.v < n) continue;
            splits.push_back(detail::subtree_leaves(g, e.v, e.u));
        }
        return TreeTopology(n, splits);
    }
};

/// Builds a weighted tree realizing the topology, all edge lengths set to `length`.
inline WeightedTree weighted_tree(const TreeTopology& t, double length = 1.0) {
    const auto g = detail::graph_from_splits(t);
    WeightedTree w;
    w.n = t.taxa();
    w.node_count = static_cast<int>(g.adj.size());
    for (int u = 0; u < w.node_count; ++u)
        for (int v : g.adj[static_cast<std::size_t>(u)])
            if (u < v) w.edges.push_back({u, v, length});
    return w;
}

/// Path-length metric of a weighted tree.
template <class T = double>
DissimilarityVector<T> tree_metric(const WeightedTree& w) {
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(w.node_count));
    for (const auto& e : w.edges) {
        adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.length);
        adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.length);
    }
    DissimilarityVector<T> d(w.n);
    for (int a = 0; a < w.n; ++a) {
        std::vector<double> dist(static_cast<std::size_t>(w.node_count), -1.0);
        std::vector<int> stack{a};
        dist[static_cast<std::size_t>(a)] = 0.0;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (auto [v, len] : adj[static_cast<std::size_t>(u)]) {
                if (dist[static_cast<std::size_t>(v)] >= 0) continue;
                dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + len;
                stack.push_back(v);
            }
        }
        for (int b = 0; b < a; ++b) d(a, b) = T(dist[static_cast<std::size_t>(b)]);
    }
    return d;
}

/// Uniformly random labeled unrooted binary tree by stepwise leaf insertion on random
/// edges, with edge lengths drawn uniformly from [lo, hi].
template <class Rng>
WeightedTree random_tree(int n, Rng& rng, double lo = 0.1, double hi = 1.0) {
    if (n < 3) throw std::invalid_argument("random_tree: need n >= 3");
    WeightedTree w;
    w.n = n;
    w.node_count = n + 1;
    int center = n;
    w.edges = {{0, center, 0}, {1, center, 0}, {2, center, 0}};
    for (int a = 3; a < n; ++a) {
        std::uniform_int_distribution<std::size_t> pick(0, w.edges.size() - 1);
        const std::size_t k = pick(rng);
        const int mid = w.node_count++;
        const auto e = w.edges[k];
        w.edges[k] = {e.u, mid, 0};
        w.edges.push_back({mid, e.v, 0});
        w.edges.push_back({a, mid, 0});
    }
    std::uniform_real_distribution<double> len(lo, hi);
    for (auto& e : w.edges) e.length = len(rng);
    return w;
}

}  // namespace njgeom

#endif  // NJGEOM_TOPOLOGY_HPP
