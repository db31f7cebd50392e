#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "kmsorder/commands.hpp"

using namespace kmsorder;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out, err;
    fs::path dir;
};

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("kmsorder_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Run run(const std::string& command, const std::string& config_text, const std::string& name,
        int workers = 1) {
    const auto dir = scratch(name);
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << config_text;
    std::ostringstream out, err;
    CommandOptions opt;
    opt.config_path = cfg.string();
    opt.out_dir = (dir / "out").string();
    opt.workers = workers;
    opt.log = &out;
    opt.err = &err;
    const int status = run_command(command, opt);
    return {status, out.str(), err.str(), dir / "out"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

std::string config_file(const std::string& name) { return slurp(fs::path(KMSORDER_CONFIG_DIR) / name); }

}  // namespace

TEST(Workers, Resolution) {
    EXPECT_EQ(resolve_workers(3, 5), 3);
    ::setenv("KMSORDER_WORKERS", "4", 1);
    EXPECT_EQ(resolve_workers(std::nullopt, 5), 4);
    ::unsetenv("KMSORDER_WORKERS");
    EXPECT_EQ(resolve_workers(std::nullopt, 5), 5);
    EXPECT_GE(resolve_workers(std::nullopt, 0), 1);
}

TEST(Workers, ParallelForCoversEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) { if (i == 7) throw std::runtime_error("x"); }),
                 std::runtime_error);
}

TEST(Asymmetry, DefaultSweepPasses) {
    const auto r = run("asymmetry", config_file("asymmetry.cfg"), "asym");
    EXPECT_EQ(r.status, 0) << r.err;
    const auto csv = slurp(r.dir / "asymmetry.csv");
    EXPECT_EQ(lines(csv), 1u + 8u);
    EXPECT_EQ(csv.find("fail"), std::string::npos);
    EXPECT_TRUE(fs::exists(r.dir / "metadata.json"));
    const auto meta = slurp(r.dir / "metadata.json");
    EXPECT_NE(meta.find("config_hash"), std::string::npos);
    EXPECT_NE(meta.find("wall_time_seconds"), std::string::npos);
}

TEST(Asymmetry, EmptySweepGivesOneRow) {
    const auto r = run("asymmetry", "[model]\nbeta = 2\n[protocol]\nfirst_center = -1.5\nsecond_center = 1.5\n",
                       "asym_empty");
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(lines(slurp(r.dir / "asymmetry.csv")), 2u);
}

TEST(Asymmetry, OverlapExitsNonzeroWithDiagnostic) {
    const auto r = run("asymmetry", config_file("overlap.cfg"), "asym_overlap");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("switching supports overlap"), std::string::npos) << r.err;
}

TEST(Asymmetry, OutputIndependentOfWorkerCount) {
    const std::string cfg = "[model]\nbeta = 2\n[sweep]\nbeta = [1, 2, 3]\nsecond_center = [1.5, 2.5]\n";
    const auto a = run("asymmetry", cfg, "asym_w1", 1);
    const auto b = run("asymmetry", cfg, "asym_w3", 3);
    EXPECT_EQ(slurp(a.dir / "asymmetry.csv"), slurp(b.dir / "asymmetry.csv"));
}

TEST(Asymmetry, BadConfigIsAnError) {
    const auto r = run("asymmetry", "[model]\nbeta = oops oops\n", "asym_bad");
    EXPECT_EQ(r.status, kExitError);
    EXPECT_NE(r.err.find("model.beta"), std::string::npos) << r.err;
}

TEST(Oracle, SinglePointGridIsRefused) {
    const auto r = run("oracle",
                       "[model]\ntag = discrete_modes\nbeta = 1\nmode_frequencies = [2]\nmode_weights = [0.3]\n"
                       "[oracle]\nn_max = 6\nrefine_n_max = 0\nlambdas = [0.1]\n",
                       "oracle_one");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("insufficient points"), std::string::npos) << r.err;
    EXPECT_NE(slurp(r.dir / "scaling_fit.json").find("insufficient points"), std::string::npos);
}

TEST(Oracle, ContinuumModelIsRejected) {
    const auto r = run("oracle", "[model]\nbeta = 1\n", "oracle_cont");
    EXPECT_EQ(r.status, kExitError);
    EXPECT_NE(r.err.find("discrete_modes"), std::string::npos);
}

TEST(Oracle, SmallRunWritesTables) {
    const auto r = run("oracle",
                       "[model]\ntag = discrete_modes\nbeta = 1\nmode_frequencies = [2]\nmode_weights = [0.3]\n"
                       "[oracle]\nn_max = 8\nrefine_n_max = 10\nstep = 2e-3\nlambda_min = 0.01\n"
                       "lambda_max = 0.3\nlambda_points = 5\n",
                       "oracle_small");
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(lines(slurp(r.dir / "scaling.csv")), 1u + 10u);
    const auto fit = slurp(r.dir / "scaling_fit.json");
    EXPECT_NE(fit.find("\"slope\""), std::string::npos);
    EXPECT_NE(fit.find("\"passed\": true"), std::string::npos);
}

TEST(Geometry, DefaultGridAndSvg) {
    const auto r = run("geometry", config_file("geometry.cfg"), "geom");
    EXPECT_EQ(r.status, 0) << r.err;
    const auto csv = slurp(r.dir / "geometry.csv");
    EXPECT_EQ(lines(csv), 52u);
    EXPECT_NE(csv.find("\n0,0,0,0,1,"), std::string::npos);
    const auto svg = slurp(r.dir / "geometry.svg");
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    const std::regex poly("<polyline ");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator()), 4);
}

TEST(KmsCheck, DefaultPasses) {
    const auto r = run("kms-check", config_file("kms.cfg"), "kms");
    EXPECT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(lines(slurp(r.dir / "kms.csv")), 1u + 200u + 25u);
}

TEST(KmsCheck, DiscretePasses) {
    EXPECT_EQ(run("kms-check", config_file("kms_discrete.cfg"), "kms_disc").status, 0);
}

TEST(KmsCheck, CorruptedModelFailsLoudly) {
    const auto r = run("kms-check", config_file("kms_corrupted.cfg"), "kms_bad");
    EXPECT_EQ(r.status, kExitBreach);
    EXPECT_NE(r.err.find("detailed balance violated"), std::string::npos);
}

TEST(Commands, UnknownCommand) {
    CommandOptions opt;
    std::ostringstream err;
    opt.err = &err;
    EXPECT_EQ(run_command("frobnicate", opt), kExitError);
}

TEST(Commands, MissingConfigFile) {
    CommandOptions opt;
    opt.config_path = "/nonexistent/kmsorder.cfg";
    std::ostringstream err;
    opt.err = &err;
    EXPECT_EQ(cmd_geometry(opt), kExitError);
}
