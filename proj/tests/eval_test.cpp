#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "echoweight/eval.hpp"
#include "support.hpp"

using namespace echoweight;
using echoweight::testing::TempDir;

namespace {

PipelineSettings quick_settings()
{
    PipelineSettings s;
    s.encoder_dim = 256;
    s.train.epochs = 8;
    s.train.early_stop_patience = 3;
    s.train.un_hidden = 8;
    s.train.fusion_hidden = 8;
    return s;
}

}  // namespace

TEST(StratifiedSplit, SizesAndDisjointness)
{
    std::vector<int> labels(100, 0);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = 1;
    const auto s = stratified_split(labels, 0.75, 3);
    EXPECT_EQ(s.first.size(), 75u);
    EXPECT_EQ(s.second.size(), 25u);
    std::vector<bool> seen(100, false);
    for (auto i : s.first) seen[i] = true;
    for (auto i : s.second) {
        EXPECT_FALSE(seen[i]);
        seen[i] = true;
    }
    for (bool b : seen) EXPECT_TRUE(b);
    EXPECT_TRUE(std::is_sorted(s.first.begin(), s.first.end()));
}

TEST(StratifiedSplit, SameSeedSameSplit)
{
    std::vector<int> labels;
    for (int i = 0; i < 57; ++i) labels.push_back(i % 3 == 0);
    const auto a = stratified_split(labels, 0.75, 9), b = stratified_split(labels, 0.75, 9);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    EXPECT_NE(stratified_split(labels, 0.75, 10).first, a.first);
}

// Class balance in the first part is within one item of the exact proportion.
TEST(StratifiedSplit, PreservesClassProportions)
{
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng.index(300);
        std::vector<int> labels(n);
        std::size_t fakes = 0;
        for (auto& y : labels) fakes += (y = static_cast<int>(rng.bernoulli(0.3)));
        if (fakes == 0 || fakes == n) continue;
        const double ratio = rng.uniform(0.1, 0.9);
        const auto s = stratified_split(labels, ratio, rng.next());
        EXPECT_EQ(s.first.size(), static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n))));
        std::size_t first_fakes = 0;
        for (auto i : s.first) first_fakes += static_cast<std::size_t>(labels[i]);
        EXPECT_LE(std::abs(static_cast<double>(first_fakes) - ratio * static_cast<double>(fakes)), 1.0);
    }
}

TEST(StratifiedSplit, RejectsDegenerateInput)
{
    EXPECT_THROW(stratified_split(std::vector<int>{1, 1, 1}, 0.5, 0), ValidationError);
    EXPECT_THROW(stratified_split(std::vector<int>{0, 1}, 1.0, 0), ValidationError);
}

TEST(Statistics, MeanAndSampleStd)
{
    EXPECT_EQ(std_of({0.8}), 0.0);
    EXPECT_DOUBLE_EQ(mean_of({0.7, 0.8, 0.9}), 0.8);
    EXPECT_NEAR(std_of({0.7, 0.8, 0.9}), 0.1, 1e-15);
}

TEST(Grid, SingleCellTable)
{
    const auto s = echoweight::testing::small_synth(1);
    ExperimentGrid grid;
    grid.conditions = {Condition::binary_un};
    grid.seeds = {7};
    const auto t = run_grid(s.corpus, grid, quick_settings());
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].accuracies.size(), 1u);
    EXPECT_EQ(t.rows[0].std, 0.0);
    EXPECT_EQ(t.rows[0].gain.value(), 0.0);
    EXPECT_GE(t.rows[0].mean, 0.0);
    EXPECT_LE(t.rows[0].mean, 1.0);
}

TEST(Grid, EdgeReweightWithAlphaZeroEqualsBinary)
{
    const auto s = echoweight::testing::small_synth(2);
    ExperimentGrid grid;
    grid.conditions = {Condition::binary_un, Condition::edge_reweight, Condition::sample_reweight};
    grid.alphas = {0.0};
    grid.seeds = {1, 2};
    const auto t = run_grid(s.corpus, grid, quick_settings());
    const auto* base = t.find(Condition::binary_un, 0.0);
    ASSERT_NE(base, nullptr);
    EXPECT_EQ(t.find(Condition::edge_reweight, 0.0)->accuracies, base->accuracies);
    EXPECT_EQ(t.find(Condition::sample_reweight, 0.0)->accuracies, base->accuracies);
    EXPECT_EQ(t.find(Condition::edge_reweight, 0.0)->gain.value(), 0.0);
}

TEST(Grid, GainIsDifferenceOfMeans)
{
    ResultTable t;
    t.seeds = {1, 2};
    t.rows.push_back({Condition::binary_un, 0.0, {0.70, 0.80}, 0, 0, std::nullopt});
    t.rows.push_back({Condition::edge_reweight, 1.0, {0.80, 0.84}, 0, 0, std::nullopt});
    finalize_table(t);
    EXPECT_NEAR(t.rows[1].gain.value(), 0.82 - 0.75, 1e-15);

    ResultTable no_base;
    no_base.rows.push_back({Condition::text_only, 0.0, {0.6}, 0, 0, std::nullopt});
    finalize_table(no_base);
    EXPECT_FALSE(no_base.rows[0].gain.has_value());
}

TEST(Grid, CsvRoundTripsThroughReport)
{
    ResultTable t;
    t.seeds = {1, 2};
    t.rows.push_back({Condition::text_only, 0.0, {0.6, 0.62}, 0, 0, std::nullopt});
    t.rows.push_back({Condition::binary_un, 0.0, {0.7, 0.8}, 0, 0, std::nullopt});
    t.rows.push_back({Condition::edge_reweight, 0.5, {0.75, 0.85}, 0, 0, std::nullopt});
    finalize_table(t);
    const auto csv = result_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "condition,alpha,seed_count,mean_acc,std_acc,gain_vs_binary_un");
    EXPECT_NE(csv.find("edge_reweight,0.5,2,0.800000,0.070711,0.050000"), std::string::npos);

    TempDir tmp("report");
    {
        std::ofstream(tmp / "results.csv") << csv;
    }
    const auto rows = read_result_csv(tmp / "results.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[2].condition, "edge_reweight");
    EXPECT_NEAR(rows[2].gain.value(), 0.05, 1e-9);
    const auto rendered = render_table(rows);
    EXPECT_NE(rendered.find("80.00 ± 7.07"), std::string::npos);
    EXPECT_NE(rendered.find("+5.00"), std::string::npos);

    {
        std::ofstream(tmp / "bad.csv") << "condition,alpha,seed_count,mean_acc,std_acc,gain_vs_binary_un\nx,1\n";
    }
    EXPECT_THROW(read_result_csv(tmp / "bad.csv"), ParseError);
}

TEST(Ternary, ToyCorpusExport)
{
    TempDir tmp("ternary");
    const auto corpus = load_corpus(CorpusPaths::in_directory(echoweight::testing::fixture("toy"))).corpus;
    const auto r = export_ternary(corpus, compute_profiles(corpus), tmp / "t.csv");
    EXPECT_EQ(r.rows_written, 6u);
    EXPECT_EQ(r.excluded, 0u);
    const auto text = echoweight::testing::slurp(tmp / "t.csv");
    EXPECT_NE(text.find("news_id,frac_lurker,frac_engager,frac_contributor,label\n"), std::string::npos);
    EXPECT_NE(text.find("b,0.25,0.25,0.5,1\n"), std::string::npos);
    EXPECT_NE(text.find("# excluded_undefined=0"), std::string::npos);
}

TEST(Ternary, ExcludesNewsWithoutInteractions)
{
    TempDir tmp("ternary2");
    const auto loaded = assemble_corpus({{"a", "", 0}, {"b", "", 1}}, {}, {{"u1", 5000, 1000, true}}, {{"u1", "a"}});
    const auto r = export_ternary(loaded.corpus, compute_profiles(loaded.corpus), tmp / "t.csv");
    EXPECT_EQ(r.rows_written, 1u);
    EXPECT_EQ(r.excluded, 1u);
    const auto text = echoweight::testing::slurp(tmp / "t.csv");
    EXPECT_NE(text.find("a,0,0,1,0\n"), std::string::npos);  // contributor-only corner
    EXPECT_NE(text.find("# excluded_undefined=1"), std::string::npos);
}

TEST(Ternary, FakeNewsCarriesMoreLurkersUnderSignal)
{
    SynthConfig cfg;
    cfg.n_news = 200;
    cfg.n_users = 800;
    cfg.interact_prob = {{{0.002, 0.002}, {0.02, 0.02}, {0.2, 0.2}}};
    cfg.lurker_signal = 0.9;
    cfg.lurker_scale = 0.02;
    cfg.words_per_news = 3;
    cfg.comments_per_news = 0;
    cfg.seed = 5;
    const auto s = generate(cfg);
    const auto m = build_interaction_matrix(s.corpus);
    const auto groups = column_groups(m, compute_profiles(s.corpus));
    double sum[2] = {}, count[2] = {};
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto c = group_composition(m, i, groups);
        if (!c) continue;
        sum[s.corpus.news[i].label] += c->frac_lurker();
        count[s.corpus.news[i].label] += 1.0;
    }
    EXPECT_GT(sum[1] / count[1], sum[0] / count[0]);
}

TEST(Conditions, NamesRoundTrip)
{
    for (auto c : all_conditions) EXPECT_EQ(parse_condition(to_string(c)), c);
    EXPECT_THROW(parse_condition("bogus"), ValidationError);
    EXPECT_EQ(parse_norm_scope("all"), NormScope::all);
}
