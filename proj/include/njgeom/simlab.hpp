#ifndef NJGEOM_SIMLAB_HPP
#define NJGEOM_SIMLAB_HPP

#include "njgeom/census.hpp"
#include "njgeom/parallel.hpp"
#include "njgeom/projection.hpp"
#include "njgeom/topology.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace njgeom {

/// Five-taxon model on ((0,1),2,(3,4)). Nodes 5, 6, 7 are the interior vertices joining
/// {0,1}, {2} and {3,4}; alpha is the edge 5-6 and beta the edge 6-7.
struct TreeModel {
    std::string name = "custom";
    std::array<double, 5> pendant{};
    double alpha = 0.0;
    double beta = 0.0;

    WeightedTree tree() const {
        WeightedTree w;
        w.n = 5;
        w.node_count = 8;
        w.edges = {{0, 5, pendant[0]}, {1, 5, pendant[1]}, {5, 6, alpha}, {2, 6, pendant[2]},
                   {6, 7, beta},       {3, 7, pendant[3]}, {4, 7, pendant[4]}};
        return w;
    }

    TreeTopology topology() const { return parse_newick("((0,1),2,(3,4));"); }
};

inline void validate(const TreeModel& m, bool require_positive) {
    auto check = [&](double x) {
        if (!std::isfinite(x) || x < 0 || (require_positive && x == 0))
            throw std::invalid_argument("tree model '" + m.name + "': edge lengths must be " +
                                        (require_positive ? "positive" : "nonnegative"));
    };
    for (double x : m.pendant) check(x);
    check(m.alpha);
    check(m.beta);
}

/// Both interior edges short.
inline TreeModel model_t1(double a = 0.03, double b = 0.42) { return {"T1", {b, b, b, b, b}, a, a}; }

/// One interior edge short, the other long.
inline TreeModel model_t2(double a = 0.03, double b = 0.42) { return {"T2", {b, b, b, b, b}, a, b}; }

inline DissimilarityVector<double> tree_metric(const TreeModel& m) {
    validate(m, false);
    return tree_metric<double>(m.tree());
}

enum class SubstitutionModel { jc, k2p };

inline const char* to_string(SubstitutionModel s) { return s == SubstitutionModel::jc ? "jc" : "k2p"; }

inline SubstitutionModel parse_substitution_model(const std::string& s) {
    if (s == "jc" || s == "JC") return SubstitutionModel::jc;
    if (s == "k2p" || s == "K2P") return SubstitutionModel::k2p;
    throw std::invalid_argument("unknown substitution model '" + s + "'");
}

struct ExperimentConfig {
    TreeModel model = model_t1();
    SubstitutionModel substitution = SubstitutionModel::jc;
    std::size_t sites = 500;
    std::size_t replicates = 10000;
    std::uint64_t seed = 1;
    /// Transition/transversion rate ratio for K2P.
    double kappa = 2.0;
    unsigned threads = 1;
};

inline void validate(const ExperimentConfig& c) {
    validate(c.model, true);
    if (c.sites < 1) throw std::invalid_argument("experiment: sites must be >= 1");
    if (c.replicates < 1) throw std::invalid_argument("experiment: replicates must be >= 1");
    if (!(c.kappa > 0) || !std::isfinite(c.kappa)) throw std::invalid_argument("experiment: kappa must be positive");
}

/// Nucleotides as 0..3 in the order A, G, C, T, so s ^ 1 is the transition partner of s.
using Sequence = std::vector<std::uint8_t>;
using Alignment = std::vector<Sequence>;

/// Probabilities of a transition (P) and of either transversion (Q, both together) along
/// a branch of length d.
struct ChangeProbabilities {
    double transition = 0.0;
    double transversion = 0.0;
};

inline ChangeProbabilities change_probabilities(double d, SubstitutionModel s, double kappa) {
    if (s == SubstitutionModel::jc) {
        const double p = 0.75 * (1 - std::exp(-4 * d / 3));
        return {p / 3, 2 * p / 3};
    }
    // rates: transition kappa*beta, each transversion beta, d = (kappa + 2) beta t
    const double bt = d / (kappa + 2), at = kappa * bt;
    const double q = 0.5 - 0.5 * std::exp(-4 * bt);
    const double p = 0.25 + 0.25 * std::exp(-4 * bt) - 0.5 * std::exp(-2 * (at + bt));
    return {p, q};
}

template <class Rng>
Alignment simulate_alignment(const TreeModel& m, const ExperimentConfig& c, Rng& rng) {
    validate(m, false);
    const auto w = m.tree();
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(w.node_count));
    for (const auto& e : w.edges) {
        adj[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.length);
        adj[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.length);
    }
    struct Step {
        int parent, child;
        ChangeProbabilities p;
    };
    std::vector<Step> order;
    const int root = 6;
    std::vector<int> stack{root}, seen(static_cast<std::size_t>(w.node_count), 0);
    seen[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (auto [v, len] : adj[static_cast<std::size_t>(u)]) {
            if (seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = 1;
            order.push_back({u, v, change_probabilities(len, c.substitution, c.kappa)});
            stack.push_back(v);
        }
    }
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> base(0, 3);
    std::vector<std::uint8_t> state(static_cast<std::size_t>(w.node_count));
    Alignment out(5, Sequence(c.sites));
    for (std::size_t s = 0; s < c.sites; ++s) {
        state[static_cast<std::size_t>(root)] = static_cast<std::uint8_t>(base(rng));
        for (const auto& st : order) {
            const std::uint8_t from = state[static_cast<std::size_t>(st.parent)];
            const double u = unif(rng);
            std::uint8_t to = from;
            if (u < st.p.transition) to = from ^ 1;
            else if (u < st.p.transition + st.p.transversion) to = from ^ (u < st.p.transition + st.p.transversion / 2 ? 2 : 3);
            state[static_cast<std::size_t>(st.child)] = to;
        }
        for (int a = 0; a < 5; ++a) out[static_cast<std::size_t>(a)][s] = state[static_cast<std::size_t>(a)];
    }
    return out;
}

constexpr double kDistanceCap = 5.0;

struct DistanceEstimate {
    DissimilarityVector<double> d;
    /// Per pair: the correction was undefined or exceeded the cap.
    std::vector<bool> capped;
    bool any_capped() const {
        for (bool b : capped)
            if (b) return true;
        return false;
    }
};

/// Jukes-Cantor correction of a mismatch fraction; +infinity where the log is undefined.
inline double jc_distance(double p) {
    const double arg = 1 - 4 * p / 3;
    return arg > 0 ? -0.75 * std::log(arg) : std::numeric_limits<double>::infinity();
}

/// Kimura two-parameter correction from transition and transversion fractions.
inline double k2p_distance(double p, double q) {
    const double a1 = 1 - 2 * p - q, a2 = 1 - 2 * q;
    return a1 > 0 && a2 > 0 ? -0.5 * std::log(a1) - 0.25 * std::log(a2) : std::numeric_limits<double>::infinity();
}

/// Corrected distance of one pair, clamped to kDistanceCap with `capped` set when clamped.
inline double corrected_distance(const Sequence& x, const Sequence& y, SubstitutionModel s, bool& capped) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("estimate_distances: sequences differ in length");
    std::size_t ts = 0, tv = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const int diff = x[k] ^ y[k];
        ts += diff == 1;
        tv += diff >= 2;
    }
    const double len = static_cast<double>(x.size());
    const double p = static_cast<double>(ts) / len, q = static_cast<double>(tv) / len;
    const double d = s == SubstitutionModel::jc ? jc_distance(p + q) : k2p_distance(p, q);
    capped = d > kDistanceCap;
    if (capped) return kDistanceCap;
    return d == 0 ? 0.0 : d;  // no negative zero
}

inline DistanceEstimate estimate_distances(const Alignment& aln, SubstitutionModel s) {
    const int n = static_cast<int>(aln.size());
    DistanceEstimate e{DissimilarityVector<double>(n), std::vector<bool>(pair_count(n), false)};
    for (int a = 1; a < n; ++a)
        for (int b = 0; b < a; ++b) {
            bool cap = false;
            e.d(a, b) = corrected_distance(aln[static_cast<std::size_t>(a)], aln[static_cast<std::size_t>(b)], s, cap);
            e.capped[pair_to_index(a, b, n)] = cap;
        }
    return e;
}

struct ExperimentRecord {
    std::size_t replicate = 0;
    DissimilarityVector<double> d{5};
    Verdict verdict = Verdict::incorrect;
    double boundary_distance = 0.0;
    TreeTopology nearest_region;
    bool capped = false;
};

struct ClassStats {
    std::size_t count = 0;
    double mean = 0.0;
    /// Sample variance (denominator count - 1); zero for fewer than two values.
    double variance = 0.0;
};

inline ClassStats class_stats(const std::vector<double>& xs) {
    ClassStats s;
    s.count = xs.size();
    if (xs.empty()) return s;
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.variance = ss / static_cast<double>(xs.size() - 1);
    }
    return s;
}

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ExperimentRecord> records;
    ClassStats correct;
    ClassStats incorrect;
    std::size_t capped_replicates = 0;

    double correct_rate() const { return static_cast<double>(correct.count) / static_cast<double>(records.size()); }
};

inline ExperimentReport summarize(ExperimentConfig config, std::vector<ExperimentRecord> records) {
    ExperimentReport r;
    r.config = std::move(config);
    r.records = std::move(records);
    std::vector<double> good, bad;
    for (const auto& rec : r.records) {
        (rec.verdict == Verdict::correct ? good : bad).push_back(rec.boundary_distance);
        r.capped_replicates += rec.capped;
    }
    r.correct = class_stats(good);
    r.incorrect = class_stats(bad);
    return r;
}

/// Simulates, estimates and classifies every replicate. Replicate k draws from stream
/// (seed, k), so the records do not depend on the thread count.
inline ExperimentReport run_experiment(const ExperimentConfig& config, const ConeCensus& census) {
    validate(config);
    if (census.n != 5) throw std::invalid_argument("run_experiment: needs the five-taxon census");
    const auto cones = census.cones();
    const auto truth = config.model.topology();
    std::vector<ExperimentRecord> records(config.replicates);
    parallel_for(config.replicates, config.threads, [&](std::size_t k) {
        auto rng = stream_rng(config.seed, k);
        const auto aln = simulate_alignment(config.model, config, rng);
        const auto est = estimate_distances(aln, config.substitution);
        const auto cls = distance_to_wrong(est.d.entries(), truth, cones);
        auto& rec = records[k];
        rec.replicate = k;
        rec.d = est.d;
        rec.verdict = cls.verdict;
        rec.boundary_distance = cls.boundary_distance;
        rec.nearest_region = cls.nearest_region;
        rec.capped = est.any_capped();
    });
    return summarize(config, std::move(records));
}

struct GaussianPoint {
    double sigma = 0.0;
    std::size_t replicates = 0;
    std::size_t correct = 0;
    double correct_rate = 0.0;
    double stderr_ = 0.0;
    double mean_boundary_distance = 0.0;
};

/// Correct-rate of tree metric plus i.i.d. N(0, sigma^2) noise per entry, for each sigma.
/// Replicate k at grid point g draws from stream (seed, g * 2^32 + k).
inline std::vector<GaussianPoint> gaussian_experiment(const TreeModel& model, const std::vector<double>& sigmas,
                                                      std::size_t replicates, std::uint64_t seed, const ConeCensus& census,
                                                      unsigned threads = 1) {
    validate(model, true);
    if (census.n != 5) throw std::invalid_argument("gaussian_experiment: needs the five-taxon census");
    if (replicates < 1) throw std::invalid_argument("gaussian_experiment: replicates must be >= 1");
    const auto cones = census.cones();
    const auto truth = model.topology();
    const auto base = tree_metric(model);
    std::vector<GaussianPoint> out;
    for (std::size_t g = 0; g < sigmas.size(); ++g) {
        const double sigma = sigmas[g];
        if (!(sigma >= 0) || !std::isfinite(sigma)) throw std::invalid_argument("gaussian_experiment: sigma must be >= 0");
        std::vector<char> ok(replicates, 0);
        std::vector<double> dist(replicates, 0.0);
        parallel_for(replicates, threads, [&](std::size_t k) {
            auto rng = stream_rng(seed, (static_cast<std::uint64_t>(g) << 32) + k);
            std::normal_distribution<double> z(0.0, 1.0);
            auto d = base;
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += sigma * z(rng);
            const auto rec = distance_to_wrong(d.entries(), truth, cones);
            ok[k] = rec.verdict == Verdict::correct;
            dist[k] = rec.boundary_distance;
        });
        GaussianPoint p;
        p.sigma = sigma;
        p.replicates = replicates;
        double sum = 0;
        for (std::size_t k = 0; k < replicates; ++k) {
            p.correct += static_cast<std::size_t>(ok[k]);
            sum += dist[k];
        }
        const double n = static_cast<double>(replicates);
        p.correct_rate = static_cast<double>(p.correct) / n;
        p.stderr_ = std::sqrt(p.correct_rate * (1 - p.correct_rate) / n);
        p.mean_boundary_distance = sum / n;
        out.push_back(p);
    }
    return out;
}

/// "lo:step:hi" inclusive grid.
inline std::vector<double> parse_grid(const std::string& text) {
    const auto c1 = text.find(':'), c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw std::invalid_argument("grid must be lo:step:hi");
    std::size_t used = 0;
    auto num = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("grid: bad number '" + s + "'");
        return v;
    };
    const double lo = num(text.substr(0, c1)), step = num(text.substr(c1 + 1, c2 - c1 - 1)), hi = num(text.substr(c2 + 1));
    if (!(step > 0) || hi < lo) throw std::invalid_argument("grid needs step > 0 and hi >= lo");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}

// ---------------------------------------------------------------------------------------
// CSV output. Doubles are written with 17 significant digits so files replay bit-exactly.

namespace detail {

inline std::ostream& exact(std::ostream& os) { return os << std::setprecision(17); }

inline std::string pair_header(int n) {
    std::string h;
    for (std::size_t i = 0; i < pair_count(n); ++i) {
        const auto [a, b] = index_to_pair(i, n);
        h += ",d" + std::to_string(b) + std::to_string(a);
    }
    return h;
}

}  // namespace detail

inline void write_records_csv(std::ostream& os, const ExperimentReport& r) {
    detail::exact(os);
    os << "replicate" << detail::pair_header(5) << ",verdict,boundary_distance,nearest_region,capped\n";
    for (const auto& rec : r.records) {
        os << rec.replicate;
        for (std::size_t i = 0; i < rec.d.size(); ++i) os << "," << rec.d[i];
        os << "," << to_string(rec.verdict) << "," << rec.boundary_distance << ",\"" << to_newick(rec.nearest_region) << "\","
           << (rec.capped ? 1 : 0) << "\n";
    }
}

inline void write_summary_csv(std::ostream& os, const ExperimentReport& r) {
    detail::exact(os);
    os << "tree,model,sites,replicates,seed,verdict,cases,mean,variance,capped_replicates\n";
    for (const auto& [name, s] : {std::pair{"correct", r.correct}, std::pair{"incorrect", r.incorrect}})
        os << r.config.model.name << "," << to_string(r.config.substitution) << "," << r.config.sites << ","
           << r.config.replicates << "," << r.config.seed << "," << name << "," << s.count << "," << s.mean << ","
           << s.variance << "," << r.capped_replicates << "\n";
}

inline void write_curve_csv(std::ostream& os, const std::vector<GaussianPoint>& curve) {
    detail::exact(os);
    os << "sigma,replicates,correct,correct_rate,stderr,mean_boundary_distance\n";
    for (const auto& p : curve)
        os << p.sigma << "," << p.replicates << "," << p.correct << "," << p.correct_rate << "," << p.stderr_ << ","
           << p.mean_boundary_distance << "\n";
}

}  // namespace njgeom

#endif  // NJGEOM_SIMLAB_HPP
