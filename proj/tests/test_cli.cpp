#include "jitchrono/cli.hpp"
#include "jitchrono/report.hpp"
#include "jitchrono/synthetic.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace jitchrono;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        root_ = fs::temp_directory_path() /
                ("jitchrono-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    void TearDown() override { fs::remove_all(root_); }

    std::string path(const std::string& rel) const { return (root_ / rel).string(); }

    std::string write(const std::string& rel, const std::string& content) const {
        write_text_file(root_ / rel, content);
        return path(rel);
    }

    std::string synth_csv(int periods = 3, int rows = 120) const {
        SyntheticSpec s;
        s.n_periods = periods;
        s.rows_per_period = rows;
        s.name = "syn";
        std::ostringstream csv;
        write_dataset_csv(generate_synthetic(s, 21), csv);
        return write("syn.csv", csv.str());
    }

    fs::path root_;
};

}  // namespace

TEST_F(CliTest, UnknownSubcommandIsUsageError) {
    const auto r = cli({"frobnicate", "x.csv"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"rq1"}).code, 1);
    EXPECT_EQ(cli({"rq1", "a.csv", "--trees", "zero"}).code, 1);
    EXPECT_EQ(cli({"rq1", "a.csv", "--threads", "0"}).code, 1);
}

TEST_F(CliTest, HelpAndVersion) {
    const auto r = cli({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("summarize"), std::string::npos);
    EXPECT_NE(r.out.find("--window-months"), std::string::npos);
    EXPECT_EQ(cli({"--version"}).out, std::string(kToolVersion) + "\n");
}

TEST_F(CliTest, DataErrorsExitTwo) {
    const auto missing = cli({"summarize", path("nope.csv")});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("nope.csv"), std::string::npos);
    const auto header_only =
        write("h.csv", "commit_id,commit_ts,la,ld,lt,ns,nd,nf,entropy,nuc,ndev,age,exp,rexp,sexp,fix,bug\n");
    const auto r = cli({"summarize", header_only});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("EmptyInput"), std::string::npos);
    const auto bad = write("b.csv", "commit_id,commit_ts\nx,1\n");
    EXPECT_EQ(cli({"rq1", bad, "--out-dir", path("o")}).code, 2);
}

TEST_F(CliTest, ConfigErrorsAreUsageErrors) {
    const auto data = synth_csv();
    const auto conf = write("bad.conf", "colour = red\n");
    EXPECT_EQ(cli({"summarize", data, "--config", conf}).code, 1);
    EXPECT_EQ(cli({"summarize", data, "--config", path("absent.conf")}).code, 1);
}

TEST_F(CliTest, SummarizeCounts) {
    const auto data = synth_csv(3, 1000);
    const auto r = cli({"summarize", data});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("changes: 3,000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("defective: "), std::string::npos);
    EXPECT_NE(r.out.find("%)"), std::string::npos);
    EXPECT_NE(r.out.find("periods: 3"), std::string::npos);
}

TEST_F(CliTest, Rq1TwiceIsByteIdentical) {
    const auto data = synth_csv();
    ASSERT_EQ(cli({"rq1", data, "--seed", "7", "--trees", "10", "--out-dir", path("a")}).code, 0);
    ASSERT_EQ(cli({"rq1", data, "--seed", "7", "--trees", "10", "--out-dir", path("b"), "--threads", "3"}).code, 0);
    for (const char* f : {"rq1/spm_auc.csv", "rq1/lpm_auc.csv", "rq1/spm_brier.csv", "rq1/lpm_brier.csv",
                          "rq1/spm_auc.svg"})
        EXPECT_EQ(read_text_file(path("a/") + f), read_text_file(path("b/") + f)) << f;
    ASSERT_EQ(cli({"rq1", data, "--seed", "8", "--trees", "10", "--out-dir", path("c")}).code, 0);
    EXPECT_NE(read_text_file(path("a/rq1/spm_auc.csv")), read_text_file(path("c/rq1/spm_auc.csv")));
}

TEST_F(CliTest, ManifestListsExistingArtifacts) {
    const auto data = synth_csv();
    const auto r = cli({"all", data, "--trees", "10", "--out-dir", path("all")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto manifest = nlohmann::json::parse(read_text_file(path("all/manifest.json")));
    EXPECT_EQ(manifest.at("version"), kToolVersion);
    EXPECT_EQ(manifest.at("config").at("forest").at("n_trees"), 10);
    EXPECT_EQ(manifest.at("dataset").at("n_changes"), 360);
    EXPECT_TRUE(manifest.at("timings").contains("run_s"));
    EXPECT_TRUE(manifest.at("warnings").is_array());
    EXPECT_EQ(manifest.at("artifacts").size(), 25u);
    for (const auto& a : manifest.at("artifacts")) EXPECT_TRUE(fs::exists(root_ / "all" / a.get<std::string>())) << a;
    // every SVG can be rebuilt from its CSV
    const auto csv = read_text_file(path("all/rq1/lpm_auc.csv"));
    const auto m = matrix_from_csv(csv, MetricKind::AUC, Strategy::LPM);
    EXPECT_EQ(heatmap_svg(m, "syn: LPM AUC"), read_text_file(path("all/rq1/lpm_auc.svg")));
}

TEST_F(CliTest, OutDirPrecedence) {
    const auto data = synth_csv();
    const auto conf = write("run.conf", "out_dir = " + path("from-config") + "\ntrees = 5\nseed = 3\n");
    ::setenv("JITCHRONO_OUT", path("from-env").c_str(), 1);
    ASSERT_EQ(cli({"rq1", data, "--trees", "5"}).code, 0);
    EXPECT_TRUE(fs::exists(path("from-env/manifest.json")));
    ASSERT_EQ(cli({"rq1", data, "--config", conf}).code, 0);
    EXPECT_TRUE(fs::exists(path("from-config/manifest.json")));
    ASSERT_EQ(cli({"rq1", data, "--config", conf, "--out-dir", path("from-flag"), "--trees", "6"}).code, 0);
    ::unsetenv("JITCHRONO_OUT");
    const auto manifest = nlohmann::json::parse(read_text_file(path("from-flag/manifest.json")));
    EXPECT_EQ(manifest.at("config").at("forest").at("n_trees"), 6);
    EXPECT_EQ(manifest.at("config").at("master_seed"), 3);
}

TEST_F(CliTest, SynthWritesDataset) {
    const auto spec = write("s.spec", "n_periods = 3\nrows_per_period = 60\nseed = 2\nname = tiny\n");
    const auto r = cli({"synth", spec, "--out-dir", path("gen")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(path("gen/tiny.csv")));
    EXPECT_TRUE(fs::exists(path("gen/manifest.json")));
    const auto s = cli({"summarize", path("gen/tiny.csv")});
    EXPECT_NE(s.out.find("changes: 180"), std::string::npos);
    EXPECT_EQ(cli({"synth", write("bad.spec", "rows_per_period = 2\n"), "--out-dir", path("gen")}).code, 1);
}

TEST_F(CliTest, MaskFlagReachesConfig) {
    const auto data = synth_csv();
    ASSERT_EQ(cli({"rq3", data, "--trees", "5", "--mask-first-train-period", "--out-dir", path("m")}).code, 0);
    const auto manifest = nlohmann::json::parse(read_text_file(path("m/manifest.json")));
    EXPECT_TRUE(manifest.at("config").at("mask_first_train_period").get<bool>());
    EXPECT_EQ(manifest.at("results").at("rq3").at("wsrt_auc").at("pairs"), 1);
}

TEST_F(CliTest, ProcessExitCodes) {
    const std::string bin = JITCHRONO_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    EXPECT_EQ(run("bogus"), 1);
    EXPECT_EQ(run("summarize " + path("missing.csv")), 2);
    EXPECT_EQ(run("summarize " + synth_csv()), 0);
}
