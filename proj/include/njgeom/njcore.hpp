#ifndef NJGEOM_NJCORE_HPP
#define NJGEOM_NJCORE_HPP

#include "njgeom/distvec.hpp"
#include "njgeom/matrix.hpp"
#include "njgeom/topology.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace njgeom {

/// A^(n): q = A d. Diagonal n-4, -1 where two pairs share a taxon, 0 otherwise.
inline DenseMatrix<std::int64_t> q_operator(int n) {
    if (n < 4) throw std::invalid_argument("q_operator: need n >= 4");
    const std::size_t m = pair_count(n);
    DenseMatrix<std::int64_t> a(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto [p, q] = index_to_pair(i, n);
        for (std::size_t j = 0; j < m; ++j) {
            const auto [r, s] = index_to_pair(j, n);
            if (i == j) a(i, j) = n - 4;
            else if (p == r || p == s || q == r || q == s) a(i, j) = -1;
        }
    }
    return a;
}

/// Q-criterion evaluated directly: q_ab = (n-2) d_ab - sum_k d_ak - sum_k d_kb.
template <class T>
std::vector<T> q_criterion(const DissimilarityVector<T>& d) {
    const int n = d.taxa();
    std::vector<T> row_sum(static_cast<std::size_t>(n), from_int<T>(0));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < a; ++b) {
            row_sum[static_cast<std::size_t>(a)] += d(a, b);
            row_sum[static_cast<std::size_t>(b)] += d(a, b);
        }
    std::vector<T> q(d.size());
    const T scale = from_int<T>(n - 2);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto [a, b] = index_to_pair(i, n);
        q[i] = scale * d[i] - row_sum[static_cast<std::size_t>(a)] - row_sum[static_cast<std::size_t>(b)];
    }
    return q;
}

/// R^(n): reduces an n-taxon vector to n-1 taxa after joining taxa n-2 and n-1, the merged
/// node taking label n-2.
inline DenseMatrix<Rational> reduction_operator(int n) {
    if (n < 4) throw std::invalid_argument("reduction_operator: need n >= 4");
    const std::size_t m = pair_count(n);
    const std::size_t kept = pair_count(n - 2);
    const std::size_t rows = pair_count(n - 1);
    DenseMatrix<Rational> r(rows, m);
    const Rational half(1, 2);
    for (std::size_t i = 0; i < rows; ++i) {
        if (i < kept) {
            r(i, i) = 1;
        } else {
            r(i, i) = half;
            r(i, i + static_cast<std::size_t>(n - 2)) = half;
            r(i, m - 1) = -half;
        }
    }
    return r;
}

/// One picked cherry, recorded as the two original-taxa leaf sets it merged.
/// `first` holds the set with the smaller minimum leaf.
struct CherryPick {
    LeafSet first = 0;
    LeafSet second = 0;

    static CherryPick of(LeafSet x, LeafSet y) {
        if (min_leaf(y) < min_leaf(x)) std::swap(x, y);
        return {x, y};
    }
    LeafSet merged() const { return first | second; }

    friend bool operator==(const CherryPick&, const CherryPick&) = default;
    friend auto operator<=>(const CherryPick&, const CherryPick&) = default;
};

/// The ordered cherries joined by one run of NJ. For n taxa there are n-3 picks; the last
/// three nodes are joined implicitly.
///
/// Node labeling while replaying: after each pick the untouched nodes keep their relative
/// order in slots 0..k-3 and the merged node takes slot k-2. With four nodes left the
/// complementary pairs {u,v} and {w,x} always have equal Q-values and yield the same tree,
/// so a four-node pick is always recorded as the pair that avoids node 3.
struct CherryTrace {
    int n = 0;
    std::vector<CherryPick> picks;

    friend bool operator==(const CherryTrace&, const CherryTrace&) = default;
    friend auto operator<=>(const CherryTrace&, const CherryTrace&) = default;
};

/// Active nodes before a pick and the pick expressed in that labeling (a > b).
struct TraceStep {
    std::vector<LeafSet> nodes;
    int a = 0;
    int b = 0;
    std::size_t pair_index() const { return pair_to_index(a, b, static_cast<int>(nodes.size())); }
};

inline std::vector<LeafSet> relabel_after_pick(const std::vector<LeafSet>& nodes, int a, int b) {
    std::vector<LeafSet> next;
    next.reserve(nodes.size() - 1);
    for (int k = 0; k < static_cast<int>(nodes.size()); ++k)
        if (k != a && k != b) next.push_back(nodes[static_cast<std::size_t>(k)]);
    next.push_back(nodes[static_cast<std::size_t>(a)] | nodes[static_cast<std::size_t>(b)]);
    return next;
}

/// Replays a trace, validating it and returning the per-step active labeling.
/// A four-node pick that contains node 3 is replaced by its complement.
inline std::vector<TraceStep> replay(const CherryTrace& trace) {
    const int n = trace.n;
    if (n < 4 || n > kMaxTaxa) throw std::invalid_argument("trace: unsupported taxon count");
    if (trace.picks.size() != static_cast<std::size_t>(n - 3))
        throw std::invalid_argument("trace: expected " + std::to_string(n - 3) + " picks for n=" + std::to_string(n));
    std::vector<LeafSet> nodes;
    for (int a = 0; a < n; ++a) nodes.push_back(leaf(a));
    std::vector<TraceStep> steps;
    for (const auto& pick : trace.picks) {
        auto find = [&](LeafSet s) {
            for (std::size_t k = 0; k < nodes.size(); ++k)
                if (nodes[k] == s) return static_cast<int>(k);
            throw std::invalid_argument("trace: pick does not match an active node");
        };
        int x = find(pick.first), y = find(pick.second);
        if (x == y) throw std::invalid_argument("trace: pick joins a node with itself");
        if (nodes.size() == 4 && (x == 3 || y == 3)) {
            std::vector<int> rest;
            for (int k = 0; k < 4; ++k)
                if (k != x && k != y) rest.push_back(k);
            x = rest[0];
            y = rest[1];
        }
        if (x < y) std::swap(x, y);
        steps.push_back({nodes, x, y});
        nodes = relabel_after_pick(nodes, x, y);
    }
    return steps;
}

/// Returns the trace with four-node picks in canonical form.
inline CherryTrace canonical(const CherryTrace& trace) {
    const auto steps = replay(trace);
    CherryTrace out{trace.n, {}};
    for (const auto& s : steps)
        out.picks.push_back(CherryPick::of(s.nodes[static_cast<std::size_t>(s.a)], s.nodes[static_cast<std::size_t>(s.b)]));
    return out;
}

inline TreeTopology topology_of(const CherryTrace& trace) {
    std::vector<LeafSet> splits;
    for (const auto& p : canonical(trace).picks) splits.push_back(p.merged());
    return TreeTopology(trace.n, splits);
}

inline CherryTrace permuted(const CherryTrace& trace, const Permutation& sigma) {
    CherryTrace out{trace.n, {}};
    for (const auto& p : trace.picks)
        out.picks.push_back(CherryPick::of(permute_leaves(sigma, p.first), permute_leaves(sigma, p.second)));
    return canonical(out);
}

/// Text form used in files and on the CLI: picks separated by spaces, each pick "A+B"
/// with the leaves of each side joined by '.', e.g. "4+5 3+4.5 2+3.4.5".
inline std::string trace_to_string(const CherryTrace& trace) {
    auto side = [](LeafSet s) {
        std::string out;
        for (int a : leaves_of(s)) {
            if (!out.empty()) out += ".";
            out += std::to_string(a);
        }
        return out;
    };
    std::string out;
    for (const auto& p : trace.picks) {
        if (!out.empty()) out += " ";
        out += side(p.first) + "+" + side(p.second);
    }
    return out;
}

inline CherryTrace parse_trace(const std::string& text, int n) {
    CherryTrace trace{n, {}};
    std::istringstream in(text);
    std::string tok;
    auto side = [&](const std::string& s) {
        LeafSet out = 0;
        std::istringstream parts(s);
        std::string p;
        while (std::getline(parts, p, '.')) {
            if (p.empty()) throw std::invalid_argument("trace: empty leaf in '" + s + "'");
            const int a = std::stoi(p);
            if (a < 0 || a >= n) throw std::invalid_argument("trace: leaf out of range in '" + s + "'");
            out |= leaf(a);
        }
        return out;
    };
    while (in >> tok) {
        const auto plus = tok.find('+');
        if (plus == std::string::npos) throw std::invalid_argument("trace: pick '" + tok + "' lacks '+'");
        trace.picks.push_back(CherryPick::of(side(tok.substr(0, plus)), side(tok.substr(plus + 1))));
    }
    return canonical(trace);
}

/// Permutation matrix that reorders n labels so that {a,b} (a > b) land in slots n-2, n-1
/// and the other labels keep their relative order.
inline DenseMatrix<Rational> relabel_operator(int n, int a, int b) {
    if (a < b) std::swap(a, b);
    std::vector<int> order;
    for (int k = 0; k < n; ++k)
        if (k != a && k != b) order.push_back(k);
    order.push_back(b);
    order.push_back(a);
    const std::size_t m = pair_count(n);
    DenseMatrix<Rational> p(m, m);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < x; ++y)
            p(pair_to_index(x, y, n), pair_to_index(order[static_cast<std::size_t>(x)], order[static_cast<std::size_t>(y)], n)) = 1;
    return p;
}

/// Cumulative linear maps of a trace: maps[k] sends an original vector (length m) to the
/// reduced vector seen at step k, so the step-k Q-vector is A^(n_k) maps[k] d.
struct TraceMaps {
    std::vector<TraceStep> steps;
    std::vector<DenseMatrix<Rational>> maps;
};

inline TraceMaps trace_linear_maps(const CherryTrace& trace) {
    TraceMaps out;
    out.steps = replay(trace);
    DenseMatrix<Rational> current = DenseMatrix<Rational>::identity(pair_count(trace.n));
    for (const auto& step : out.steps) {
        out.maps.push_back(current);
        const int k = static_cast<int>(step.nodes.size());
        current = reduction_operator(k) * (relabel_operator(k, step.a, step.b) * current);
    }
    out.maps.push_back(current);
    return out;
}

struct NjOptions {
    /// Floating inputs: Q-values within this absolute distance of the minimum count as tied.
    double tie_tolerance = 1e-9;
    /// Upper bound on the number of explored tie branches.
    std::size_t branch_limit = 10000;
};

class BranchLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NjOutcome {
    CherryTrace trace;
    TreeTopology topology;

    friend bool operator==(const NjOutcome&, const NjOutcome&) = default;
    friend auto operator<=>(const NjOutcome& a, const NjOutcome& b) { return a.trace <=> b.trace; }
};

namespace detail {

/// Distances among `nodes.size()` active nodes after joining a and b (merged node last).
template <class T>
DissimilarityVector<T> reduce_distances(const DissimilarityVector<T>& d, int a, int b) {
    const int k = d.taxa();
    std::vector<int> others;
    for (int x = 0; x < k; ++x)
        if (x != a && x != b) others.push_back(x);
    DissimilarityVector<T> out(k - 1);
    const int merged = k - 2;
    for (int x = 0; x < merged; ++x) {
        for (int y = 0; y < x; ++y) out(x, y) = d(others[static_cast<std::size_t>(x)], others[static_cast<std::size_t>(y)]);
        const int o = others[static_cast<std::size_t>(x)];
        T v = d(o, a) + d(o, b) - d(a, b);
        v /= from_int<T>(2);
        out(merged, x) = v;
    }
    return out;
}

/// Candidate pairs for the current step and their Q-values. With four nodes only the
/// three pairs avoiding node 3 are offered.
template <class T>
std::vector<std::pair<std::size_t, T>> candidate_q(const DissimilarityVector<T>& d) {
    const auto q = q_criterion(d);
    std::vector<std::pair<std::size_t, T>> out;
    if (d.taxa() == 4) {
        for (std::size_t i = 0; i < 3; ++i) out.emplace_back(i, q[i]);
    } else {
        for (std::size_t i = 0; i < q.size(); ++i) out.emplace_back(i, q[i]);
    }
    return out;
}

template <class T>
std::vector<std::size_t> minimal_pairs(const DissimilarityVector<T>& d, double tol) {
    const auto cand = candidate_q(d);
    T best = cand.front().second;
    for (const auto& c : cand)
        if (c.second < best) best = c.second;
    std::vector<std::size_t> out;
    for (const auto& c : cand) {
        const T gap = c.second - best;
        if (sign_with_tolerance(gap, tol) == 0) out.push_back(c.first);
    }
    return out;
}

template <class T>
void nj_branch(const DissimilarityVector<T>& d, std::vector<LeafSet>& nodes, CherryTrace& trace,
               std::set<NjOutcome>& results, std::size_t& branches, const NjOptions& opt) {
    if (d.taxa() == 3) {
        if (++branches > opt.branch_limit)
            throw BranchLimitExceeded("nj_run: more than " + std::to_string(opt.branch_limit) + " tie branches");
        results.insert({trace, topology_of(trace)});
        return;
    }
    for (std::size_t idx : minimal_pairs(d, opt.tie_tolerance)) {
        const auto [a, b] = index_to_pair(idx, d.taxa());
        auto next_nodes = relabel_after_pick(nodes, a, b);
        trace.picks.push_back(CherryPick::of(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]));
        nj_branch(reduce_distances(d, a, b), next_nodes, trace, results, branches, opt);
        trace.picks.pop_back();
    }
}

}  // namespace detail

/// Runs NJ and returns every (trace, topology) reachable by picking any cherry with minimal
/// Q-value at any step. Exact scalars detect ties exactly.
template <class T>
std::vector<NjOutcome> nj_run(const DissimilarityVector<T>& d, const NjOptions& opt = {}) {
    if (d.taxa() < 4) throw std::invalid_argument("nj_run: need at least 4 taxa");
    std::vector<LeafSet> nodes;
    for (int a = 0; a < d.taxa(); ++a) nodes.push_back(leaf(a));
    CherryTrace trace{d.taxa(), {}};
    std::set<NjOutcome> results;
    std::size_t branches = 0;
    detail::nj_branch(d, nodes, trace, results, branches, opt);
    return {results.begin(), results.end()};
}

/// Distinct topologies among the outcomes of nj_run.
inline std::vector<TreeTopology> topologies(const std::vector<NjOutcome>& outcomes) {
    std::set<TreeTopology> s;
    for (const auto& o : outcomes) s.insert(o.topology);
    return {s.begin(), s.end()};
}

/// Single-path NJ: the trace when every step has a unique minimizer, nullopt on any tie.
template <class T>
std::optional<CherryTrace> nj_unique_trace(const DissimilarityVector<T>& input, double tie_tolerance = 1e-9) {
    DissimilarityVector<T> d = input;
    std::vector<LeafSet> nodes;
    for (int a = 0; a < d.taxa(); ++a) nodes.push_back(leaf(a));
    CherryTrace trace{d.taxa(), {}};
    while (d.taxa() > 3) {
        const auto best = detail::minimal_pairs(d, tie_tolerance);
        if (best.size() != 1) return std::nullopt;
        const auto [a, b] = index_to_pair(best.front(), d.taxa());
        trace.picks.push_back(CherryPick::of(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]));
        nodes = relabel_after_pick(nodes, a, b);
        d = detail::reduce_distances(d, a, b);
    }
    return trace;
}

}  // namespace njgeom

#endif  // NJGEOM_NJCORE_HPP
