#ifndef NJGEOM_CENSUS_HPP
#define NJGEOM_CENSUS_HPP

#include "njgeom/cone.hpp"
#include "njgeom/njcore.hpp"
#include "njgeom/parallel.hpp"
#include "njgeom/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace njgeom {

enum class ConeType { five, I, II, III };

inline const char* to_string(ConeType t) {
    switch (t) {
        case ConeType::five: return "C5";
        case ConeType::I: return "I";
        case ConeType::II: return "II";
        case ConeType::III: return "III";
    }
    return "?";
}

inline ConeType parse_cone_type(const std::string& s) {
    if (s == "C5") return ConeType::five;
    if (s == "I") return ConeType::I;
    if (s == "II") return ConeType::II;
    if (s == "III") return ConeType::III;
    throw std::invalid_argument("unknown cone type '" + s + "'");
}

struct CensusEntry {
    NJCone cone;
    ConeType type = ConeType::five;
    std::string label;
};

struct ConeCensus {
    int n = 0;
    std::vector<CensusEntry> entries;
    std::map<TreeTopology, std::vector<std::size_t>> by_topology;
    std::map<CherryTrace, std::size_t> by_trace;

    void reindex() {
        by_topology.clear();
        by_trace.clear();
        for (std::size_t k = 0; k < entries.size(); ++k) {
            by_topology[*entries[k].cone.topology].push_back(k);
            by_trace[entries[k].cone.trace] = k;
        }
    }

    std::vector<NJCone> cones() const {
        std::vector<NJCone> out;
        for (const auto& e : entries) out.push_back(e.cone);
        return out;
    }

    std::size_t count(ConeType t) const {
        return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](const CensusEntry& e) { return e.type == t; }));
    }
};

/// Every canonical trace on n taxa: any pair while more than four nodes remain, then one
/// of the three pairs avoiding node 3.
inline std::vector<CherryTrace> all_traces(int n) {
    if (n < 4 || n > 8) throw std::invalid_argument("all_traces: need 4 <= n <= 8");
    std::vector<CherryTrace> out;
    CherryTrace cur{n, {}};
    auto rec = [&](auto&& self, const std::vector<LeafSet>& nodes) -> void {
        const int k = static_cast<int>(nodes.size());
        if (k == 3) {
            out.push_back(cur);
            return;
        }
        const std::size_t limit = k == 4 ? 3 : pair_count(k);
        for (std::size_t i = 0; i < limit; ++i) {
            const auto [a, b] = index_to_pair(i, k);
            cur.picks.push_back(CherryPick::of(nodes[static_cast<std::size_t>(a)], nodes[static_cast<std::size_t>(b)]));
            self(self, relabel_after_pick(nodes, a, b));
            cur.picks.pop_back();
        }
    };
    std::vector<LeafSet> nodes;
    for (int a = 0; a < n; ++a) nodes.push_back(leaf(a));
    rec(rec, nodes);
    std::sort(out.begin(), out.end());
    return out;
}

/// Type of a six-taxa trace: III if the second cherry contains the first merged node,
/// I if the last split puts both merged pairs on one side, II otherwise.
inline ConeType classify_trace(const CherryTrace& t) {
    if (t.n == 5) return ConeType::five;
    if (t.n != 6) throw std::invalid_argument("classify_trace: types are defined for n = 5, 6");
    const auto c = canonical(t);
    const LeafSet m1 = c.picks[0].merged();
    if (c.picks[1].first == m1 || c.picks[1].second == m1) return ConeType::III;
    const LeafSet m2 = c.picks[1].merged();
    const LeafSet last = c.picks[2].merged();
    // the last pick joins two of {x, y, m1}; type I iff it is {x, y}
    return (last & (m1 | m2)) == 0 ? ConeType::I : ConeType::II;
}

inline std::string cone_label(const CherryTrace& t) {
    const auto c = canonical(t);
    if (t.n == 5) {
        const auto ab = leaves_of(c.picks[0].merged());
        const auto top = topology_of(c);
        int lone = -1;
        for (int x = 0; x < 5; ++x) {
            bool paired = false;
            for (int y = 0; y < 5; ++y) paired = paired || (y != x && top.is_cherry(x, y));
            if (!paired) lone = x;
        }
        return "C_{" + std::to_string(ab[0]) + std::to_string(ab[1]) + "," + std::to_string(lone) + "}";
    }
    return std::string(to_string(classify_trace(c))) + "[" + trace_to_string(c) + "]";
}

/// All NJ cones for n in {5, 6}, reduced to facets.
inline ConeCensus census(int n, unsigned threads = 1) {
    if (n != 5 && n != 6) throw std::invalid_argument("census: n must be 5 or 6");
    const auto traces = all_traces(n);
    ConeCensus c;
    c.n = n;
    c.entries.resize(traces.size());
    parallel_for(traces.size(), threads, [&](std::size_t k) {
        auto& e = c.entries[k];
        e.cone = irredundant(cone_from_trace(traces[k]));
        e.type = classify_trace(traces[k]);
        e.label = cone_label(traces[k]);
    });
    c.reindex();
    return c;
}

/// Every permutation of the n taxa.
inline std::vector<Permutation> symmetric_group(int n) {
    std::vector<int> img(static_cast<std::size_t>(n));
    std::iota(img.begin(), img.end(), 0);
    std::vector<Permutation> out;
    do out.emplace_back(img);
    while (std::next_permutation(img.begin(), img.end()));
    return out;
}

/// Permutations mapping the cone's half-space set onto itself.
inline std::vector<Permutation> stabilizer(const NJCone& cone) {
    const auto key = cone.key();
    std::vector<Permutation> out;
    for (const auto& s : symmetric_group(cone.n))
        if (permuted(cone, s).key() == key) out.push_back(s);
    return out;
}

struct AngleEstimate {
    std::string label;
    std::size_t samples = 0;
    std::size_t hits = 0;
    /// Number of cones pooled into this estimate (symmetry averaging); the fraction is per cone.
    std::size_t pooled = 1;
    double fraction = 0.0;
    double stderr_ = 0.0;
};

/// Per-cone estimate from `hits` among `pooled` symmetric cones: p = hits / (N K), with the
/// binomial standard error of the pooled proportion divided by K.
inline AngleEstimate make_estimate(std::string label, std::size_t hits, std::size_t samples, std::size_t pooled = 1) {
    AngleEstimate e;
    e.label = std::move(label);
    e.samples = samples;
    e.hits = hits;
    e.pooled = pooled;
    const double n = static_cast<double>(samples), k = static_cast<double>(pooled);
    const double p_all = samples ? static_cast<double>(hits) / n : 0.0;
    e.fraction = p_all / k;
    e.stderr_ = samples ? std::sqrt(p_all * (1 - p_all) / n) / k : 0.0;
    return e;
}

/// Tallies of a Monte Carlo run: hits per census entry.
struct AngleTally {
    std::size_t samples = 0;
    std::size_t discarded_ties = 0;
    std::vector<std::size_t> hits;
};

struct MonteCarloOptions {
    std::size_t samples = 2000000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::size_t chunk = 20000;
    double tie_tolerance = 1e-9;
};

/// Draws standard Gaussian vectors in R^m (a spherically symmetric law) and assigns each
/// to the cone of the trace NJ follows on it. Samples with a tie anywhere are discarded and
/// redrawn. Chunk k always uses stream (seed, k), so tallies do not depend on threads.
inline AngleTally solid_angles_mc(const ConeCensus& c, const MonteCarloOptions& opt) {
    const std::size_t m = pair_count(c.n);
    const std::size_t chunks = (opt.samples + opt.chunk - 1) / std::max<std::size_t>(opt.chunk, 1);
    std::vector<std::vector<std::size_t>> chunk_hits(chunks, std::vector<std::size_t>(c.entries.size(), 0));
    std::vector<std::size_t> chunk_ties(chunks, 0);
    parallel_for(chunks, opt.threads, [&](std::size_t k) {
        auto rng = stream_rng(opt.seed, k);
        std::normal_distribution<double> z;
        const std::size_t todo = std::min(opt.chunk, opt.samples - k * opt.chunk);
        DissimilarityVector<double> d(c.n);
        for (std::size_t s = 0; s < todo;) {
            for (std::size_t i = 0; i < m; ++i) d[i] = z(rng);
            const auto t = nj_unique_trace(d, opt.tie_tolerance);
            if (!t) {
                ++chunk_ties[k];
                continue;
            }
            const auto it = c.by_trace.find(canonical(*t));
            if (it == c.by_trace.end()) throw std::logic_error("solid_angles_mc: trace missing from census");
            ++chunk_hits[k][it->second];
            ++s;
        }
    });
    AngleTally tally;
    tally.samples = opt.samples;
    tally.hits.assign(c.entries.size(), 0);
    for (std::size_t k = 0; k < chunks; ++k) {
        tally.discarded_ties += chunk_ties[k];
        for (std::size_t e = 0; e < c.entries.size(); ++e) tally.hits[e] += chunk_hits[k][e];
    }
    return tally;
}

inline std::vector<AngleEstimate> per_cone_estimates(const ConeCensus& c, const AngleTally& t) {
    std::vector<AngleEstimate> out;
    for (std::size_t e = 0; e < c.entries.size(); ++e) out.push_back(make_estimate(c.entries[e].label, t.hits[e], t.samples));
    return out;
}

/// Per-cone angle of each symmetry type, pooling all cones of the type.
inline std::vector<AngleEstimate> per_type_estimates(const ConeCensus& c, const AngleTally& t) {
    std::map<ConeType, std::pair<std::size_t, std::size_t>> pool;  // hits, cones
    for (std::size_t e = 0; e < c.entries.size(); ++e) {
        auto& p = pool[c.entries[e].type];
        p.first += t.hits[e];
        ++p.second;
    }
    std::vector<AngleEstimate> out;
    for (const auto& [type, p] : pool) out.push_back(make_estimate(to_string(type), p.first, t.samples, p.second));
    return out;
}

/// Total angle of the cones of one labeled topology (raw counts).
inline AngleEstimate topology_angle(const ConeCensus& c, const AngleTally& t, const TreeTopology& top) {
    const auto it = c.by_topology.find(top);
    if (it == c.by_topology.end()) throw std::invalid_argument("topology_angle: topology not in census");
    std::size_t hits = 0;
    for (auto e : it->second) hits += t.hits[e];
    return make_estimate(to_newick(top), hits, t.samples);
}

/// Total angle of one labeled topology from symmetry-averaged per-type values: the sum over
/// its cones of the per-cone angle of each cone's type.
inline double topology_angle_symmetric(const ConeCensus& c, const AngleTally& t, const TreeTopology& top) {
    const auto types = per_type_estimates(c, t);
    std::map<std::string, double> per;
    for (const auto& e : types) per[e.label] = e.fraction;
    const auto it = c.by_topology.find(top);
    if (it == c.by_topology.end()) throw std::invalid_argument("topology_angle_symmetric: topology not in census");
    double s = 0;
    for (auto e : it->second) s += per[to_string(c.entries[e].type)];
    return s;
}

// ---------------------------------------------------------------------------------------
// Cone files

/// Writes one cone block: comment lines, then "n m k", then k normals.
inline void write_cone(std::ostream& os, const NJCone& c, const std::string& label = {}, const std::string& type = {}) {
    if (!c.trace.picks.empty()) os << "# trace: " << trace_to_string(c.trace) << "\n";
    if (c.topology) os << "# topology: " << to_newick(*c.topology) << "\n";
    if (!label.empty()) os << "# label: " << label << "\n";
    if (!type.empty()) os << "# type: " << type << "\n";
    os << "# irredundant: " << (c.irredundant ? "yes" : "no") << "\n";
    os << c.n << " " << c.dimension() << " " << c.halfspaces.size() << "\n";
    for (const auto& h : c.halfspaces) {
        for (std::size_t k = 0; k < h.normal.size(); ++k) os << (k ? " " : "") << h.normal[k];
        os << "\n";
    }
}

struct ConeBlock {
    NJCone cone;
    std::string label;
    std::string type;
};

class ConeFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads every cone block of a stream.
inline std::vector<ConeBlock> read_cones(std::istream& is) {
    std::vector<ConeBlock> out;
    ConeBlock cur;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) { throw ConeFileError("cone file line " + std::to_string(lineno) + ": " + msg); };
    auto value_of = [](const std::string& l, const std::string& key) -> std::optional<std::string> {
        const std::string tag = "# " + key + ":";
        if (l.rfind(tag, 0) != 0) return std::nullopt;
        auto v = l.substr(tag.size());
        v.erase(0, v.find_first_not_of(' '));
        return v;
    };
    std::string trace_text, newick_text;
    bool irredundant_flag = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line[0] == '#') {
            if (auto v = value_of(line, "trace")) trace_text = *v;
            else if (auto v2 = value_of(line, "topology")) newick_text = *v2;
            else if (auto v3 = value_of(line, "label")) cur.label = *v3;
            else if (auto v4 = value_of(line, "type")) cur.type = *v4;
            else if (auto v5 = value_of(line, "irredundant")) irredundant_flag = *v5 == "yes";
            continue;
        }
        std::istringstream hdr(line);
        int n = 0;
        std::size_t m = 0, k = 0;
        if (!(hdr >> n >> m >> k)) fail("expected header 'n m k'");
        if (n < 4 || n > kMaxTaxa || m != pair_count(n)) fail("header dimension does not match n");
        cur.cone.n = n;
        cur.cone.irredundant = irredundant_flag;
        for (std::size_t r = 0; r < k; ++r) {
            if (!std::getline(is, line)) fail("missing normal rows");
            ++lineno;
            std::istringstream row(line);
            IntVector h(m);
            for (std::size_t j = 0; j < m; ++j)
                if (!(row >> h[j])) fail("normal row has fewer than m integers");
            std::string extra;
            if (row >> extra) fail("normal row has more than m entries");
            cur.cone.halfspaces.push_back({std::move(h), "file:" + std::to_string(r)});
        }
        try {
            if (!trace_text.empty()) cur.cone.trace = parse_trace(trace_text, n);
            if (!newick_text.empty()) cur.cone.topology = parse_newick(newick_text);
            else if (!trace_text.empty()) cur.cone.topology = topology_of(cur.cone.trace);
        } catch (const std::exception& e) {
            fail(e.what());
        }
        out.push_back(std::move(cur));
        cur = ConeBlock{};
        trace_text.clear();
        newick_text.clear();
        irredundant_flag = false;
    }
    return out;
}

inline void write_census(std::ostream& os, const ConeCensus& c) {
    os << "# census n=" << c.n << " cones=" << c.entries.size() << "\n";
    for (const auto& e : c.entries) write_cone(os, e.cone, e.label, to_string(e.type));
}

inline ConeCensus read_census(std::istream& is) {
    ConeCensus c;
    for (auto& b : read_cones(is)) {
        if (c.n == 0) c.n = b.cone.n;
        if (b.cone.n != c.n) throw ConeFileError("census file mixes taxon counts");
        if (!b.cone.topology) throw ConeFileError("census cone lacks a trace or topology");
        CensusEntry e;
        e.type = b.type.empty() ? classify_trace(b.cone.trace) : parse_cone_type(b.type);
        e.label = b.label.empty() ? cone_label(b.cone.trace) : b.label;
        e.cone = std::move(b.cone);
        c.entries.push_back(std::move(e));
    }
    c.reindex();
    return c;
}

}  // namespace njgeom

#endif  // NJGEOM_CENSUS_HPP
