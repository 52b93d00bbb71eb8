#include "cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string out, err;
};

Result nj(std::vector<std::string> args) {
    args.insert(args.begin(), "nj");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = njcli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("nj_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        cache = (dir / "cache").string();
        setenv("NJ_CACHE_DIR", cache.c_str(), 1);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string file(const std::string& name, const std::string& text) const {
        const auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }

    static std::string read(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir;
    std::string cache;
};

const char* kFigure1 = "a,b,3\na,c,1.8\na,d,2.5\nb,c,2.8\nb,d,3.5\nc,d,1.3\n";

}  // namespace

TEST_F(Cli, RunFigureOne) {
    const auto r = nj({"run", "--input", file("fig1.csv", kFigure1)});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "((a,b),(c,d));\n");
}

TEST_F(Cli, RunPhylipAndTrace) {
    const auto p = file("fig1.phy", "4\na 0 3 1.8 2.5\nb 3 0 2.8 3.5\nc 1.8 2.8 0 1.3\nd 2.5 3.5 1.3 0\n");
    const auto r = nj({"run", "--input", p, "--trace"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "((a,b),(c,d));\n{\"newick\":\"((a,b),(c,d));\",\"trace\":[[\"a\",\"b\"]]}\n");
}

TEST_F(Cli, RunReportsTiedTrees) {
    // the five-taxon ray: NJ may start with any of five cherries
    const int v[10] = {-1, 1, 1, -1, -1, 1, 1, -1, 1, -1};
    std::string csv;
    int k = 0;
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) csv += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(v[k++]) + "\n";
    const auto r = nj({"run", "--input", file("ray.csv", csv), "--all-ties"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_GE(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(Cli, PolytopeFVector) {
    const auto r = nj({"polytope", "--taxa", "5", "--fvector"});
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "1 10 45 90 75 22 1\n");
    const auto inc = (dir / "inc.txt").string();
    const auto t = nj({"polytope", "--taxa", "4", "--incidence", inc});
    EXPECT_EQ(t.out, "taxa,vertices,dimension,facets,facets_through_vertex\n4,3,2,3,2\n");
    EXPECT_TRUE(fs::exists(inc));
}

TEST_F(Cli, AnglesSmoke) {
    const auto r = nj({"angles", "--taxa", "6", "--samples", "10", "--seed", "1"});
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "level,label,cones,samples,hits,fraction,stderr,discarded_ties");
    int rows = 0;
    double mass = 0;
    while (std::getline(in, line)) {
        const auto f = njgeom::detail::split_csv(line);
        ASSERT_EQ(f.size(), 8u);
        mass += std::stod(f[2]) * std::stod(f[5]);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
    EXPECT_LE(mass, 1.0 + 1e-9);
    EXPECT_TRUE(fs::exists(njcli::census_file(cache, 6)));
}

TEST_F(Cli, AnglesDeterministicAndManifest) {
    const auto out1 = (dir / "a1").string(), out2 = (dir / "a2").string();
    ASSERT_EQ(nj({"angles", "--taxa", "5", "--samples", "5000", "--seed", "4", "--per-cone", "--out", out1, "--threads", "1"}).status, 0);
    ASSERT_EQ(nj({"angles", "--taxa", "5", "--samples", "5000", "--seed", "4", "--per-cone", "--out", out2, "--threads", "3"}).status, 0);
    EXPECT_EQ(read(fs::path(out1) / "angles.csv"), read(fs::path(out2) / "angles.csv"));
    const auto m = nlohmann::json::parse(read(fs::path(out1) / "manifest.json"));
    EXPECT_EQ(m["subcommand"], "angles");
    EXPECT_EQ(m["seed"], 4);
    EXPECT_EQ(m["config"]["samples"], 5000);
}

TEST_F(Cli, SimReplayIsBitIdentical) {
    const auto o1 = (dir / "s1").string(), o2 = (dir / "s2").string();
    const std::vector<std::string> base{"sim", "--tree", "T1", "--model", "k2p", "--reps", "80", "--seed", "5"};
    auto a1 = base, a2 = base;
    a1.insert(a1.end(), {"--out", o1, "--threads", "1"});
    a2.insert(a2.end(), {"--out", o2, "--threads", "2"});
    ASSERT_EQ(nj(a1).status, 0);
    ASSERT_EQ(nj(a2).status, 0);
    for (const char* f : {"records.csv", "summary.csv"}) EXPECT_EQ(read(fs::path(o1) / f), read(fs::path(o2) / f)) << f;
    int manifests = 0;
    for (const auto& e : fs::directory_iterator(o1)) manifests += e.path().filename() == "manifest.json";
    EXPECT_EQ(manifests, 1);
    const auto m = nlohmann::json::parse(read(fs::path(o1) / "manifest.json"));
    EXPECT_EQ(m["config"]["substitution"], "k2p");
    EXPECT_EQ(m["outputs"]["records.csv"], "sha256:" + njcli::sha256_hex(read(fs::path(o1) / "records.csv")));
}

TEST_F(Cli, DistanceMatchesSimVerdicts) {
    const auto o = (dir / "s").string();
    ASSERT_EQ(nj({"sim", "--tree", "T2", "--reps", "40", "--seed", "6", "--out", o}).status, 0);
    const auto r = nj({"distance", "--input", (fs::path(o) / "records.csv").string(), "--true-tree", "((0,1),2,(3,4));", "--census", cache});
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream rec(read(fs::path(o) / "records.csv")), got(r.out);
    std::string a, b;
    std::getline(rec, a);
    std::getline(got, b);
    EXPECT_EQ(b, "id,verdict,boundary_distance,nearest_region");
    int rows = 0;
    while (std::getline(rec, a) && std::getline(got, b)) {
        const auto fa = njgeom::detail::split_csv(a), fb = njgeom::detail::split_csv(b);
        EXPECT_EQ(fa[0], fb[0]);
        EXPECT_EQ(fa[11], fb[1]);
        EXPECT_EQ(fa[12], fb[2]);
        ++rows;
    }
    EXPECT_EQ(rows, 40);
}

TEST_F(Cli, SimGaussCurve) {
    const auto o = (dir / "g").string();
    const auto r = nj({"sim-gauss", "--sigma-grid", "0:0.1:0.2", "--reps", "50", "--seed", "2", "--out", o});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto curve = read(fs::path(o) / "curve.csv");
    EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 4);
    EXPECT_NE(curve.find("\n0,50,50,1,"), std::string::npos);
    EXPECT_TRUE(fs::exists(fs::path(o) / "manifest.json"));
}

TEST_F(Cli, ConesBuildReduceMember) {
    const auto c = (dir / "c.txt").string();
    ASSERT_EQ(nj({"cones", "build", "--taxa", "5", "--trace", "3+4 2+3.4", "--out", c}).status, 0);
    const auto red = nj({"cones", "reduce", "--input", c});
    ASSERT_EQ(red.status, 0);
    EXPECT_EQ(red.err, "11 -> 9 half-spaces (C_{34,2})\n");
    EXPECT_NE(red.out.find("5 10 9\n"), std::string::npos);
    const auto v = file("v.csv", "id,d01,d02,d12,d03,d13,d23,d04,d14,d24,d34\nzero,0,0,0,0,0,0,0,0,0,0\n");
    const auto m = nj({"cones", "member", "--cones", c, "--input", v});
    EXPECT_EQ(m.out, "id,cone,label,membership\nzero,0,C_{34,2},boundary\n");
}

TEST_F(Cli, CensusFlagOverridesCache) {
    const auto other = (dir / "elsewhere").string();
    ASSERT_EQ(nj({"angles", "--taxa", "5", "--samples", "10", "--seed", "1", "--census", other}).status, 0);
    EXPECT_TRUE(fs::exists(njcli::census_file(other, 5)));
    EXPECT_FALSE(fs::exists(njcli::census_file(cache, 5)));
    // a damaged cache file is reported, not silently used
    std::ofstream(njcli::census_file(other, 5)) << "5 10 1\n1 2\n";
    const auto r = nj({"angles", "--taxa", "5", "--samples", "10", "--seed", "1", "--census", other});
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("corrupt"), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(nj({}).status, 1);
    const auto unknown = nj({"frobnicate"});
    EXPECT_EQ(unknown.status, 1);
    EXPECT_NE(unknown.err.find("unknown subcommand"), std::string::npos);
    EXPECT_EQ(nj({"angles", "--taxa", "5", "--samples", "10"}).status, 1);
    EXPECT_EQ(nj({"sim", "--out", (dir / "x").string()}).status, 1);
    EXPECT_EQ(nj({"angles", "--taxa", "7", "--samples", "10", "--seed", "1"}).status, 1);
    EXPECT_EQ(nj({"run"}).status, 1);
    const auto missing = nj({"run", "--input", (dir / "nope.csv").string()});
    EXPECT_EQ(missing.status, 1);
    EXPECT_NE(missing.err.find("cannot open"), std::string::npos);
    const auto bad = nj({"run", "--input", file("bad.csv", "a,b,1\na,c,x\n")});
    EXPECT_EQ(bad.status, 1);
    EXPECT_NE(bad.err.find("line 2"), std::string::npos);
    EXPECT_EQ(std::count(bad.err.begin(), bad.err.end(), '\n'), 1);
    const auto asym = nj({"run", "--input", file("asym.phy", "4\na 0 1 1 1\nb 2 0 1 1\nc 1 1 0 1\nd 1 1 1 0\n")});
    EXPECT_EQ(asym.status, 1);
    EXPECT_NE(asym.err.find("symmetric"), std::string::npos);
    EXPECT_EQ(nj({"distance", "--input", file("t.csv", "id,d01\n"), "--true-tree", "((0,1),2"}).status, 1);
}

TEST_F(Cli, ComputationErrorStatus) {
    // all-zero input on 8 taxa ties everywhere and exceeds the branch limit
    std::string csv;
    for (int a = 0; a < 8; ++a)
        for (int b = a + 1; b < 8; ++b) csv += std::to_string(a) + "," + std::to_string(b) + ",0\n";
    const auto r = nj({"run", "--input", file("zero.csv", csv)});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("computation failed"), std::string::npos);
}

TEST_F(Cli, HelpEverywhere) {
    const auto top = nj({"--help"});
    EXPECT_EQ(top.status, 0);
    for (const char* s : {"run", "cones", "polytope", "angles", "distance", "sim", "sim-gauss"}) EXPECT_NE(top.out.find(s), std::string::npos) << s;
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases = {
        {{"run", "--help"}, {"--input", "--format", "--trace", "--all-ties", "phylip"}},
        {{"cones", "build", "--help"}, {"--taxa", "--trace", "--all", "--reduce", "n m k"}},
        {{"cones", "reduce", "--help"}, {"--input", "--out"}},
        {{"cones", "member", "--help"}, {"--cones", "--input", "--tol", "d01"}},
        {{"polytope", "--help"}, {"--taxa", "--fvector", "--incidence", "offset"}},
        {{"angles", "--help"}, {"--samples", "--seed", "--per-cone", "--per-type", "--per-topology", "--census", "--threads"}},
        {{"distance", "--help"}, {"--input", "--true-tree", "--census", "nearest_region"}},
        {{"sim", "--help"}, {"--tree", "--a", "--b", "--model", "--sites", "--reps", "--seed", "--out", "--kappa", "records.csv"}},
        {{"sim-gauss", "--help"}, {"--sigma-grid", "--reps", "--seed", "curve.csv"}},
    };
    for (const auto& [args, words] : cases) {
        const auto r = nj(args);
        EXPECT_EQ(r.status, 0) << args[0];
        for (const auto& w : words) EXPECT_NE(r.out.find(w), std::string::npos) << args[0] << " lacks " << w;
    }
}
