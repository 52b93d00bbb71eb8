#ifndef NJ_TOOLS_CLI_HPP
#define NJ_TOOLS_CLI_HPP

#include "njgeom/census.hpp"
#include "njgeom/cone.hpp"
#include "njgeom/io.hpp"
#include "njgeom/njcore.hpp"
#include "njgeom/parallel.hpp"
#include "njgeom/polytope.hpp"
#include "njgeom/projection.hpp"
#include "njgeom/simlab.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace njcli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Bad arguments or unreadable input: exit status 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
    return os.str();
}

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Writes `text` to `path` through a temporary file and a rename.
inline void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

/// Manifest of one output directory.
struct Manifest {
    explicit Manifest(std::string sub) : subcommand(std::move(sub)) {}

    std::string subcommand;
    json config = json::object();
    std::optional<std::uint64_t> seed;
    std::vector<fs::path> inputs;
    std::string started = utc_now();

    void write(const fs::path& dir, const std::vector<std::string>& outputs) const {
        json m;
        m["subcommand"] = subcommand;
        m["version"] = kVersion;
        m["config"] = config;
        m["seed"] = seed ? json(*seed) : json(nullptr);
        json in = json::object(), out = json::object();
        for (const auto& p : inputs) in[p.string()] = "sha256:" + sha256_hex(slurp(p));
        for (const auto& f : outputs) out[f] = "sha256:" + sha256_hex(slurp(dir / f));
        m["inputs"] = in;
        m["outputs"] = out;
        m["started"] = started;
        m["finished"] = utc_now();
        write_file(dir / "manifest.json", m.dump(2) + "\n");
    }
};

inline fs::path census_root(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("NJ_CACHE_DIR"); env && *env) return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return fs::path(xdg) / "njgeom";
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "njgeom";
    return fs::temp_directory_path() / "njgeom";
}

inline fs::path census_file(const fs::path& root, int n) { return root / ("census_n" + std::to_string(n) + ".v1.txt"); }

inline bool census_complete(const njgeom::ConeCensus& c, int n) {
    const std::size_t cones = n == 5 ? 30 : 450, tops = n == 5 ? 15 : 105;
    return c.n == n && c.entries.size() == cones && c.by_topology.size() == tops;
}

/// Loads the census for n from the cache directory, building and storing it when absent.
inline njgeom::ConeCensus load_census(int n, const std::string& flag, unsigned threads, std::ostream& err) {
    if (n != 5 && n != 6) throw UsageError("the cone census exists for 5 or 6 taxa, not " + std::to_string(n));
    const auto path = census_file(census_root(flag), n);
    if (fs::exists(path)) {
        std::ifstream in(path);
        njgeom::ConeCensus c;
        try {
            c = njgeom::read_census(in);
        } catch (const std::exception& e) {
            throw UsageError("census file '" + path.string() + "' is corrupt: " + e.what());
        }
        if (!census_complete(c, n)) throw UsageError("census file '" + path.string() + "' is incomplete; delete it to rebuild");
        return c;
    }
    err << "building the " << n << "-taxon cone census (cached at " << path.string() << ")\n";
    auto c = njgeom::census(n, threads);
    std::ostringstream os;
    njgeom::write_census(os, c);
    try {
        write_file(path, os.str());
    } catch (const std::exception& e) {
        err << "warning: could not cache census: " << e.what() << "\n";
    }
    return c;
}

inline std::string label_set(njgeom::LeafSet s, const std::vector<std::string>& labels) {
    std::string out;
    for (int a : njgeom::leaves_of(s)) out += (out.empty() ? "" : "+") + labels[static_cast<std::size_t>(a)];
    return out;
}

// ----------------------------------------------------------------------------
// Subcommands. Each returns an exit status; exceptions are mapped by dispatch().

struct RunArgs {
    std::string input, format = "auto";
    bool trace = false, all_ties = false;
};

inline int cmd_run(const RunArgs& a, std::ostream& out) {
    const auto in = njgeom::read_distances(a.input, njgeom::parse_distance_format(a.format));
    if (in.d.taxa() < 4) throw UsageError("nj run needs at least 4 taxa");
    const auto outcomes = njgeom::nj_run(in.d);
    std::set<std::string> printed;
    for (const auto& o : outcomes) {
        const auto newick = njgeom::to_newick(o.topology, in.labels);
        if (!a.all_ties && !printed.insert(newick).second) continue;
        out << newick << "\n";
        if (a.trace) {
            json picks = json::array();
            for (const auto& p : o.trace.picks) picks.push_back({label_set(p.first, in.labels), label_set(p.second, in.labels)});
            out << json{{"newick", newick}, {"trace", picks}}.dump() << "\n";
        }
    }
    return 0;
}

struct ConesArgs {
    int taxa = 0;
    std::string trace, input, cones, out, census;
    bool all = false, reduce = false;
    double tol = 1e-9;
};

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) out << text;
    else write_file(path, text);
}

inline int cmd_cones_build(const ConesArgs& a, std::ostream& out) {
    if (a.all == !a.trace.empty()) throw UsageError("cones build: give exactly one of --trace or --all");
    if (a.taxa < 4 || a.taxa > 8) throw UsageError("cones build: --taxa must be 4..8");
    std::vector<njgeom::CherryTrace> traces;
    try {
        traces = a.all ? njgeom::all_traces(a.taxa) : std::vector{njgeom::canonical(njgeom::parse_trace(a.trace, a.taxa))};
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("cones build: ") + e.what());
    }
    std::ostringstream os;
    for (const auto& t : traces) {
        auto c = njgeom::cone_from_trace(t);
        if (a.reduce) c = njgeom::irredundant(c);
        njgeom::write_cone(os, c, a.taxa <= 6 && a.taxa >= 5 ? njgeom::cone_label(t) : std::string{});
    }
    emit(a.out, os.str(), out);
    return 0;
}

inline std::vector<njgeom::ConeBlock> read_cone_file(const std::string& path) {
    std::istringstream in(slurp(path));
    try {
        return njgeom::read_cones(in);
    } catch (const njgeom::ConeFileError& e) {
        throw UsageError(path + ": " + e.what());
    }
}

inline int cmd_cones_reduce(const ConesArgs& a, std::ostream& out, std::ostream& err) {
    std::ostringstream os;
    for (const auto& b : read_cone_file(a.input)) {
        const auto r = njgeom::irredundant(b.cone);
        err << b.cone.halfspaces.size() << " -> " << r.halfspaces.size() << " half-spaces"
            << (b.label.empty() ? "" : " (" + b.label + ")") << "\n";
        njgeom::write_cone(os, r, b.label, b.type);
    }
    emit(a.out, os.str(), out);
    return 0;
}

inline int cmd_cones_member(const ConesArgs& a, std::ostream& out) {
    const auto blocks = read_cone_file(a.cones);
    std::istringstream in(slurp(a.input));
    const auto rows = njgeom::read_vector_table(in);
    out << "id,cone,label,membership\n";
    for (const auto& r : rows)
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            if (blocks[k].cone.n != r.d.taxa()) throw UsageError("cones member: vector '" + r.id + "' and cone " + std::to_string(k) + " differ in taxa");
            out << r.id << "," << k << "," << blocks[k].label << "," << njgeom::to_string(njgeom::membership(blocks[k].cone, r.d.entries(), a.tol)) << "\n";
        }
    return 0;
}

struct PolytopeArgs {
    int taxa = 0;
    bool fvector = false;
    std::string incidence;
};

inline int cmd_polytope(const PolytopeArgs& a, std::ostream& out) {
    if (a.taxa < 4 || a.taxa > 7) throw UsageError("polytope: --taxa must be 4..7");
    const auto p = njgeom::build_p(a.taxa);
    const auto inc = njgeom::facet_enumeration(p);
    if (a.fvector) {
        const auto f = njgeom::f_vector(p, inc);
        for (std::size_t k = 0; k < f.size(); ++k) out << (k ? " " : "") << f[k];
        out << "\n";
    } else {
        const auto row = njgeom::table1_row(p, inc);
        out << "taxa,vertices,dimension,facets,facets_through_vertex\n"
            << a.taxa << "," << row.vertices << "," << row.dimension << "," << row.facets << "," << row.facets_through_vertex << "\n";
    }
    if (!a.incidence.empty()) {
        std::ostringstream os;
        njgeom::write_incidence(os, p, inc);
        write_file(a.incidence, os.str());
    }
    return 0;
}

struct AnglesArgs {
    int taxa = 0;
    std::size_t samples = 0;
    std::optional<std::uint64_t> seed;
    bool per_cone = false, per_type = false, per_topology = false;
    std::string census, out;
    unsigned threads = njgeom::default_threads();
};

inline std::string angles_csv(const njgeom::ConeCensus& c, const njgeom::AngleTally& t, const std::string& level) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "level,label,cones,samples,hits,fraction,stderr,discarded_ties\n";
    auto row = [&](const njgeom::AngleEstimate& e, std::size_t cones) {
        os << level << ",\"" << e.label << "\"," << cones << "," << e.samples << "," << e.hits << "," << e.fraction << ","
           << e.stderr_ << "," << t.discarded_ties << "\n";
    };
    if (level == "cone")
        for (const auto& e : njgeom::per_cone_estimates(c, t)) row(e, 1);
    else if (level == "type")
        for (const auto& e : njgeom::per_type_estimates(c, t)) row(e, e.pooled);
    else
        for (const auto& [top, idx] : c.by_topology) row(njgeom::topology_angle(c, t, top), idx.size());
    return os.str();
}

inline int cmd_angles(const AnglesArgs& a, std::ostream& out, std::ostream& err) {
    if (!a.seed) throw UsageError("angles: --seed is required");
    if (a.samples < 1) throw UsageError("angles: --samples must be >= 1");
    if (a.per_cone + a.per_type + a.per_topology > 1) throw UsageError("angles: choose one of --per-cone, --per-type, --per-topology");
    const std::string level = a.per_cone ? "cone" : a.per_topology ? "topology" : "type";
    const auto c = load_census(a.taxa, a.census, a.threads, err);
    njgeom::MonteCarloOptions opt;
    opt.samples = a.samples;
    opt.seed = *a.seed;
    opt.threads = a.threads;
    Manifest m("angles");
    const auto tally = njgeom::solid_angles_mc(c, opt);
    const auto csv = angles_csv(c, tally, level);
    if (a.out.empty()) {
        out << csv;
        return 0;
    }
    m.seed = a.seed;
    m.config = {{"taxa", a.taxa}, {"samples", a.samples}, {"level", level}, {"chunk", opt.chunk}, {"tie_tolerance", opt.tie_tolerance}};
    write_file(fs::path(a.out) / "angles.csv", csv);
    m.write(a.out, {"angles.csv"});
    return 0;
}

struct DistanceArgs {
    std::string input, true_tree, census, out;
    double tol = 1e-9;
    unsigned threads = njgeom::default_threads();
};

inline int cmd_distance(const DistanceArgs& a, std::ostream& out, std::ostream& err) {
    njgeom::TreeTopology truth;
    try {
        truth = njgeom::parse_newick(a.true_tree);
    } catch (const std::exception& e) {
        throw UsageError(std::string("distance: --true-tree: ") + e.what() + " (leaves must be named 0..n-1)");
    }
    std::istringstream in(slurp(a.input));
    const auto rows = njgeom::read_vector_table(in);
    const auto c = load_census(truth.taxa(), a.census, a.threads, err);
    const auto cones = c.cones();
    njgeom::ProjectionOptions opt;
    opt.tol = a.tol;
    std::vector<njgeom::ClassificationRecord> recs(rows.size());
    for (const auto& r : rows)
        if (r.d.taxa() != truth.taxa()) throw UsageError("distance: vector '" + r.id + "' has a different number of taxa than the true tree");
    njgeom::parallel_for(rows.size(), a.threads, [&](std::size_t k) { recs[k] = njgeom::distance_to_wrong(rows[k].d.entries(), truth, cones, opt); });
    std::ostringstream os;
    os << std::setprecision(17) << "id,verdict,boundary_distance,nearest_region\n";
    for (std::size_t k = 0; k < rows.size(); ++k)
        os << rows[k].id << "," << njgeom::to_string(recs[k].verdict) << "," << recs[k].boundary_distance << ",\""
           << njgeom::to_newick(recs[k].nearest_region) << "\"\n";
    if (a.out.empty()) {
        out << os.str();
        return 0;
    }
    Manifest m("distance");
    m.config = {{"true_tree", njgeom::to_newick(truth)}, {"tol", a.tol}};
    m.inputs = {a.input};
    write_file(fs::path(a.out) / "distances.csv", os.str());
    m.write(a.out, {"distances.csv"});
    return 0;
}

struct SimArgs {
    std::string tree = "T1", model = "jc", out, census, sigma_grid = "0:0.05:0.5";
    double a = 0.03, b = 0.42, kappa = 2.0;
    std::size_t sites = 500, reps = 10000;
    std::optional<std::uint64_t> seed;
    unsigned threads = njgeom::default_threads();
};

inline njgeom::TreeModel sim_model(const SimArgs& s) {
    if (!(s.a > 0) || !(s.b > 0)) throw UsageError("sim: --a and --b must be positive");
    if (s.tree == "T1") return njgeom::model_t1(s.a, s.b);
    if (s.tree == "T2") return njgeom::model_t2(s.a, s.b);
    throw UsageError("sim: --tree must be T1 or T2");
}

inline json model_json(const njgeom::TreeModel& m) {
    return {{"name", m.name}, {"topology", njgeom::to_newick(m.topology())}, {"pendant", m.pendant}, {"alpha", m.alpha}, {"beta", m.beta}};
}

inline int cmd_sim(const SimArgs& s, std::ostream& out, std::ostream& err) {
    if (!s.seed) throw UsageError("sim: --seed is required");
    njgeom::ExperimentConfig c;
    c.model = sim_model(s);
    try {
        c.substitution = njgeom::parse_substitution_model(s.model);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("sim: ") + e.what());
    }
    c.sites = s.sites;
    c.replicates = s.reps;
    c.seed = *s.seed;
    c.kappa = s.kappa;
    c.threads = s.threads;
    try {
        njgeom::validate(c);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("sim: ") + e.what());
    }
    Manifest m("sim");
    m.seed = s.seed;
    m.config = {{"model", model_json(c.model)}, {"substitution", njgeom::to_string(c.substitution)}, {"sites", c.sites},
                {"replicates", c.replicates}, {"kappa", c.kappa}, {"distance_cap", njgeom::kDistanceCap}};
    const auto census = load_census(5, s.census, s.threads, err);
    const auto r = njgeom::run_experiment(c, census);
    std::ostringstream rec, sum;
    njgeom::write_records_csv(rec, r);
    njgeom::write_summary_csv(sum, r);
    const fs::path dir = s.out;
    write_file(dir / "records.csv", rec.str());
    write_file(dir / "summary.csv", sum.str());
    m.write(dir, {"records.csv", "summary.csv"});
    out << sum.str();
    return 0;
}

inline int cmd_sim_gauss(const SimArgs& s, std::ostream& out, std::ostream& err) {
    if (!s.seed) throw UsageError("sim-gauss: --seed is required");
    if (s.reps < 1) throw UsageError("sim-gauss: --reps must be >= 1");
    const auto model = sim_model(s);
    std::vector<double> grid;
    try {
        grid = njgeom::parse_grid(s.sigma_grid);
    } catch (const std::exception& e) {
        throw UsageError(std::string("sim-gauss: --sigma-grid: ") + e.what());
    }
    Manifest m("sim-gauss");
    m.seed = s.seed;
    m.config = {{"model", model_json(model)}, {"sigma_grid", grid}, {"replicates", s.reps}};
    const auto census = load_census(5, s.census, s.threads, err);
    const auto curve = njgeom::gaussian_experiment(model, grid, s.reps, *s.seed, census, s.threads);
    std::ostringstream os;
    njgeom::write_curve_csv(os, curve);
    write_file(fs::path(s.out) / "curve.csv", os.str());
    m.write(s.out, {"curve.csv"});
    out << os.str();
    return 0;
}

// ----------------------------------------------------------------------------

inline const char* kDistanceFormats =
    "Distance files:\n"
    "  csv     one pair per line, \"a,b,value\"; taxa are numbered in order of first appearance;\n"
    "          values are decimals or fractions (7/2) and are read exactly; '#' starts a comment\n"
    "  phylip  taxon count, then one row per taxon: name followed by n values; the matrix must be\n"
    "          symmetric (relative 1e-12) with zero diagonal\n";

inline const char* kVectorTable =
    "Vector tables:\n"
    "  CSV with a header row; the first column is the row id and columns d01, d02, d12, ... (dXY,\n"
    "  X < Y) hold the entries; other columns are ignored, so records.csv from `nj sim` can be read.\n";

inline const char* kConeFile =
    "Cone files:\n"
    "  per cone: optional comment lines '# trace: ...', '# topology: <newick>', '# label: ...',\n"
    "  '# type: ...', '# irredundant: yes|no', then a header 'n m k' (m = n(n-1)/2) and k rows of m\n"
    "  integers, each a normal h of the half-space (h, d) >= 0 in pair order d01, d02, d12, d03, ...\n";

inline const char* kTraceSyntax =
    "Traces:\n"
    "  space-separated picks, each two nodes joined by '+'; a node is its original taxa joined by '.',\n"
    "  e.g. \"3+4 2+3.4\" for 5 taxa (n-3 picks)\n";

/// Parses argv and runs one subcommand: 0 success, 1 usage error, 2 computation error.
inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neighbor-Joining as a piecewise-linear classifier: NJ runs, NJ cones, the polytope of\n"
                 "first-step normals, cone solid angles, boundary distances and simulations.",
                 "nj"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.footer("Run `nj <subcommand> --help` for flags and file formats. Stochastic subcommands need --seed.\n"
               "Census cache: --census DIR, else $NJ_CACHE_DIR, else ~/.cache/njgeom.\n"
               "Exit status: 0 success, 1 usage error, 2 computation error.");
    const unsigned threads_default = njgeom::default_threads();

    RunArgs run;
    auto* s_run = app.add_subcommand("run", "Run NJ on a distance file and print the Newick tree(s).");
    s_run->add_option("--input", run.input, "Distance file")->required();
    s_run->add_option("--format", run.format, "csv, phylip or auto")->check(CLI::IsMember({"csv", "phylip", "auto"}));
    s_run->add_flag("--trace", run.trace, "Also print each cherry order as a JSON line");
    s_run->add_flag("--all-ties", run.all_ties, "Print one line per tie-breaking path instead of per distinct tree");
    s_run->footer(kDistanceFormats);

    ConesArgs cones;
    auto* s_cones = app.add_subcommand("cones", "Build, reduce or test NJ cones.");
    s_cones->require_subcommand(1);
    s_cones->footer(std::string(kConeFile) + kTraceSyntax);
    auto* s_build = s_cones->add_subcommand("build", "Write the cone of one trace, or of every trace.");
    s_build->add_option("--taxa", cones.taxa, "Number of taxa (4..8)")->required();
    s_build->add_option("--trace", cones.trace, "Cherry order, e.g. \"3+4 2+3.4\"");
    s_build->add_flag("--all", cones.all, "Every trace on --taxa taxa");
    s_build->add_flag("--reduce", cones.reduce, "Keep only facet-defining half-spaces");
    s_build->add_option("--out", cones.out, "Output cone file (default: stdout)");
    s_build->footer(std::string(kConeFile) + kTraceSyntax);
    auto* s_reduce = s_cones->add_subcommand("reduce", "Remove redundant half-spaces (exact LP).");
    s_reduce->add_option("--input", cones.input, "Cone file")->required();
    s_reduce->add_option("--out", cones.out, "Output cone file (default: stdout)");
    s_reduce->footer(kConeFile);
    auto* s_member = s_cones->add_subcommand("member", "Classify vectors as interior, boundary or outside of each cone.");
    s_member->add_option("--cones", cones.cones, "Cone file")->required();
    s_member->add_option("--input", cones.input, "Vector table")->required();
    s_member->add_option("--tol", cones.tol, "Boundary tolerance on (h, d)");
    s_member->footer(std::string(kConeFile) + kVectorTable);

    PolytopeArgs poly;
    auto* s_poly = app.add_subcommand("polytope", "Vertices, dimension and facets of the polytope of Q-operator columns.");
    s_poly->add_option("--taxa", poly.taxa, "Number of taxa (4..7)")->required();
    s_poly->add_flag("--fvector", poly.fvector, "Print the f-vector (f_-1 ... f_d) instead of the summary row");
    s_poly->add_option("--incidence", poly.incidence, "Write facets to this file");
    s_poly->footer("Incidence file: one facet per line, \"normal | offset | vertex indices\", meaning\n"
                   "(normal, x) >= offset with equality exactly at the listed vertices.");

    AnglesArgs ang;
    ang.threads = threads_default;
    std::uint64_t ang_seed = 0;
    auto* s_ang = app.add_subcommand("angles", "Monte Carlo solid angles of the NJ cones.");
    s_ang->add_option("--taxa", ang.taxa, "5 or 6")->required()->check(CLI::IsMember({5, 6}));
    s_ang->add_option("--samples", ang.samples, "Number of accepted samples")->required();
    auto* o_ang_seed = s_ang->add_option("--seed", ang_seed, "Random seed")->required();
    s_ang->add_flag("--per-cone", ang.per_cone, "One row per cone");
    s_ang->add_flag("--per-type", ang.per_type, "One row per symmetry type, symmetry-averaged (default)");
    s_ang->add_flag("--per-topology", ang.per_topology, "One row per labeled topology");
    s_ang->add_option("--census", ang.census, "Census cache directory");
    s_ang->add_option("--out", ang.out, "Write angles.csv and manifest.json here instead of stdout");
    s_ang->add_option("--threads", ang.threads, "Worker threads");
    s_ang->footer("Output CSV: level,label,cones,samples,hits,fraction,stderr,discarded_ties. Fractions are per\n"
                  "cone of the row (per-cone, per-type) or the total of a topology's cones (per-topology).\n"
                  "Samples are standard Gaussian vectors; those with a tie are redrawn and counted.");

    DistanceArgs dist;
    dist.threads = threads_default;
    auto* s_dist = app.add_subcommand("distance", "Verdict and distance to the nearest wrongly classified region.");
    s_dist->add_option("--input", dist.input, "Vector table")->required();
    s_dist->add_option("--true-tree", dist.true_tree, "True topology, leaves named 0..n-1")->required();
    s_dist->add_option("--census", dist.census, "Census cache directory");
    s_dist->add_option("--tol", dist.tol, "Feasibility tolerance");
    s_dist->add_option("--out", dist.out, "Write distances.csv and manifest.json here instead of stdout");
    s_dist->add_option("--threads", dist.threads, "Worker threads");
    s_dist->footer(std::string(kVectorTable) + "Output CSV: id,verdict,boundary_distance,nearest_region.");

    SimArgs sim;
    sim.threads = threads_default;
    std::uint64_t sim_seed = 0;
    auto add_model = [&](CLI::App* s) {
        s->add_option("--tree", sim.tree, "T1 (both interior edges a) or T2 (interior edges a and b)")->check(CLI::IsMember({"T1", "T2"}));
        s->add_option("--a", sim.a, "Short edge length");
        s->add_option("--b", sim.b, "Long edge length (pendant edges)");
        s->add_option("--reps", sim.reps, "Replicates");
        s->add_option("--census", sim.census, "Census cache directory");
        s->add_option("--out", sim.out, "Output directory")->required();
        s->add_option("--threads", sim.threads, "Worker threads");
    };
    auto* s_sim = app.add_subcommand("sim", "Simulate alignments on a five-taxon model and classify the estimated distances.");
    add_model(s_sim);
    s_sim->add_option("--model", sim.model, "jc or k2p")->check(CLI::IsMember({"jc", "k2p"}));
    s_sim->add_option("--sites", sim.sites, "Alignment length");
    s_sim->add_option("--kappa", sim.kappa, "K2P transition/transversion rate ratio");
    auto* o_sim_seed = s_sim->add_option("--seed", sim_seed, "Random seed")->required();
    s_sim->footer("Writes records.csv (replicate,d01..d34,verdict,boundary_distance,nearest_region,capped),\n"
                  "summary.csv (per verdict: cases, mean and variance of boundary distances) and manifest.json.\n"
                  "Distance corrections that are undefined or exceed 5.0 are capped at 5.0 and flagged.");
    auto* s_gauss = app.add_subcommand("sim-gauss", "Correct-rate of tree metric plus Gaussian noise over a sigma grid.");
    add_model(s_gauss);
    s_gauss->add_option("--sigma-grid", sim.sigma_grid, "lo:step:hi");
    auto* o_gauss_seed = s_gauss->add_option("--seed", sim_seed, "Random seed")->required();
    s_gauss->footer("Writes curve.csv (sigma,replicates,correct,correct_rate,stderr,mean_boundary_distance) and\n"
                    "manifest.json.");

    if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
        err << "nj: unknown subcommand '" << argv[1] << "'; expected run, cones, polytope, angles, distance, sim or sim-gauss\n";
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "nj: " << e.what() << "\n";
        return 1;
    }

    try {
        if (s_run->parsed()) return cmd_run(run, out);
        if (s_build->parsed()) return cmd_cones_build(cones, out);
        if (s_reduce->parsed()) return cmd_cones_reduce(cones, out, err);
        if (s_member->parsed()) return cmd_cones_member(cones, out);
        if (s_poly->parsed()) return cmd_polytope(poly, out);
        if (s_ang->parsed()) {
            if (o_ang_seed->count()) ang.seed = ang_seed;
            return cmd_angles(ang, out, err);
        }
        if (s_dist->parsed()) return cmd_distance(dist, out, err);
        if (s_sim->parsed()) {
            if (o_sim_seed->count()) sim.seed = sim_seed;
            return cmd_sim(sim, out, err);
        }
        if (s_gauss->parsed()) {
            if (o_gauss_seed->count()) sim.seed = sim_seed;
            return cmd_sim_gauss(sim, out, err);
        }
    } catch (const UsageError& e) {
        err << "nj: " << e.what() << "\n";
        return 1;
    } catch (const njgeom::InputError& e) {
        err << "nj: " << e.what() << "\n";
        return 1;
    } catch (const njgeom::NewickError& e) {
        err << "nj: " << e.what() << "\n";
        return 1;
    } catch (const njgeom::ConeFileError& e) {
        err << "nj: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "nj: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "nj: computation failed: " << e.what() << "\n";
        return 2;
    }
    err << "nj: no subcommand\n";
    return 1;
}

}  // namespace njcli

#endif  // NJ_TOOLS_CLI_HPP
