#include <gtest/gtest.h>

#include <sstream>

#include "echoweight/cli.hpp"
#include "support.hpp"

using namespace echoweight;
using echoweight::testing::fixture;
using echoweight::testing::slurp;
using echoweight::testing::TempDir;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "echoweight");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

void write_config(const std::filesystem::path& path, const std::string& body) { std::ofstream(path) << body; }

}  // namespace

TEST(Cli, WeighPrintsToyWeights)
{
    TempDir tmp("weigh");
    const auto r = invoke({"weigh", "--data", fixture("toy").string(), "--out", tmp.path().string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("b omega=1.01 "), std::string::npos);
    EXPECT_NE(r.out.find("c omega=0.03 "), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(tmp / "omega.csv"));
    EXPECT_TRUE(std::filesystem::exists(tmp / "weighted_matrix.csv"));
    EXPECT_TRUE(std::filesystem::exists(tmp / "resolved_config.json"));
}

TEST(Cli, UsageErrorsExitWithOne)
{
    EXPECT_EQ(invoke({"frobnicate"}).code, 1);
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"weigh", "--alpha", "abc"}).code, 1);
    const auto missing = invoke({"ingest"});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("no corpus"), std::string::npos);
    EXPECT_EQ(invoke({"ingest", "--data", "/nonexistent/dir"}).code, 1);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, IngestPrintsStatistics)
{
    const auto r = invoke({"ingest", "--data", fixture("small").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = jsonl::json::parse(r.out);
    EXPECT_EQ(j.at("load").at("dropped_events"), 1);
}

TEST(Cli, SynthIsReproducible)
{
    TempDir a("synth-a"), b("synth-b");
    write_config(a / "cfg.json", R"({"synth": {"n_news": 20, "n_users": 50, "vocab_size": 64}})");
    ASSERT_EQ(invoke({"synth", "--config", (a / "cfg.json").string(), "--seed", "7", "--out", (a / "o").string()}).code, 0);
    ASSERT_EQ(invoke({"synth", "--config", (a / "cfg.json").string(), "--seed", "7", "--out", (b / "o").string()}).code, 0);
    for (const char* f : {"news.jsonl", "comments.jsonl", "users.jsonl", "interactions.jsonl", "ground_truth.json"}) {
        EXPECT_EQ(slurp(a / "o" / f), slurp(b / "o" / f)) << f;
    }
}

TEST(Cli, ProfileTrainGridAndReport)
{
    TempDir tmp("pipeline");
    write_config(tmp / "cfg.json", R"({
        "synth": {"n_news": 40, "n_users": 80, "vocab_size": 64, "words_per_news": 8,
                  "interact_prob": {"L": {"real": 0.05, "fake": 0.05}}},
        "encoder": {"dim": 128},
        "train": {"epochs": 5, "un_hidden": 4, "fusion_hidden": 4, "mode": "edge_reweight"},
        "grid": {"conditions": ["binary_un", "edge_reweight"], "alphas": [0.0]}
    })");
    const auto cfg = (tmp / "cfg.json").string();
    const auto data = (tmp / "data").string();
    ASSERT_EQ(invoke({"synth", "--config", cfg, "--seed", "1", "--out", data}).code, 0);

    const auto prof = invoke({"profile", "--config", cfg, "--data", data, "--out", (tmp / "prof").string()});
    ASSERT_EQ(prof.code, 0) << prof.err;
    EXPECT_TRUE(std::filesystem::exists(tmp / "prof" / "ternary.csv"));
    EXPECT_EQ(read_profiles(tmp / "prof" / "profiles.jsonl").size(), 80u);

    const auto tr = invoke({"train", "--config", cfg, "--data", data, "--seed", "2", "--out", (tmp / "train").string()});
    ASSERT_EQ(tr.code, 0) << tr.err;
    EXPECT_NE(tr.out.find("mode=edge_reweight"), std::string::npos);
    const auto cp = load_checkpoint(tmp / "train" / "model.ckpt");
    EXPECT_EQ(cp.params.shape.users, 80u);
    EXPECT_TRUE(std::filesystem::exists(tmp / "train" / "train_log.csv"));

    const auto grid = invoke({"grid", "--config", cfg, "--data", data, "--seed", "3", "--out", (tmp / "grid").string()});
    ASSERT_EQ(grid.code, 0) << grid.err;
    const auto rows = read_result_csv(tmp / "grid" / "results.csv");
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].condition, "edge_reweight");
    EXPECT_EQ(rows[1].gain.value(), 0.0);  // alpha 0 collapses onto binary_un

    const auto rep = invoke({"report", "--results", (tmp / "grid" / "results.csv").string()});
    ASSERT_EQ(rep.code, 0) << rep.err;
    EXPECT_EQ(rep.out, slurp(tmp / "grid" / "results.txt"));
}
