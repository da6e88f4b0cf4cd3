#include <gtest/gtest.h>

#include <cmath>

#include "echoweight/synth.hpp"
#include "support.hpp"

using namespace echoweight;

namespace {

SynthConfig symmetric_config(std::uint64_t seed)
{
    SynthConfig cfg;
    cfg.n_news = 100;
    cfg.n_users = 400;
    cfg.interact_prob = {{{0.01, 0.01}, {0.03, 0.03}, {0.2, 0.2}}};
    cfg.lurker_signal = 0.0;
    cfg.words_per_news = 5;
    cfg.comments_per_news = 1;
    cfg.words_per_comment = 3;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(Generate, DeterministicForFixedSeed)
{
    const auto a = echoweight::testing::small_synth(4);
    const auto b = echoweight::testing::small_synth(4);
    EXPECT_EQ(a.corpus, b.corpus);
    EXPECT_EQ(a.truth.to_json(), b.truth.to_json());
    EXPECT_NE(echoweight::testing::small_synth(5).corpus, a.corpus);
}

TEST(Generate, GroupSizesFollowFractions)
{
    SynthConfig cfg;
    cfg.n_news = 5;
    cfg.n_users = 1000;
    const auto s = generate(cfg);
    EXPECT_EQ(s.truth.group_sizes, (std::array<std::size_t, 3>{900, 90, 10}));
    // 1.5 / 0.75 / 0.75: the two .75 remainders take the leftover seats
    EXPECT_EQ(largest_remainder(std::array<double, 3>{0.5, 0.25, 0.25}, 3), (std::array<std::size_t, 3>{1, 1, 1}));
}

TEST(Generate, RatesLandInTheirGroup)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = echoweight::testing::small_synth(seed, 20, 300);
        const auto profiles = compute_profiles(s.corpus);
        ASSERT_EQ(profiles.size(), s.truth.user_ids.size());
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            EXPECT_EQ(profiles[i].user_id, s.truth.user_ids[i]);
            EXPECT_EQ(profiles[i].group, s.truth.user_groups[i]) << profiles[i].user_id << " rate " << profiles[i].activity_rate;
        }
    }
}

TEST(Generate, EffectiveProbabilityOfLurkers)
{
    SynthConfig cfg;
    cfg.lurker_signal = 0.9;
    EXPECT_DOUBLE_EQ(cfg.effective_prob(UserGroup::lurker, 1), 0.9);
    EXPECT_DOUBLE_EQ(cfg.effective_prob(UserGroup::lurker, 0), 0.09);
    EXPECT_DOUBLE_EQ(cfg.effective_prob(UserGroup::engager, 1), 0.02);
    cfg.lurker_scale = 0.01;
    EXPECT_DOUBLE_EQ(cfg.effective_prob(UserGroup::lurker, 1), 0.009);
}

TEST(Generate, MutualInformationTracksLurkerSignal)
{
    auto cfg = symmetric_config(1);
    const double mi0 = lurker_label_mutual_information(generate(cfg).truth);
    cfg.lurker_signal = 0.9;
    cfg.lurker_scale = 0.05;
    const double mi9 = lurker_label_mutual_information(generate(cfg).truth);
    EXPECT_LT(mi0, 1e-4);
    EXPECT_GT(mi9, 10.0 * std::max(mi0, 1e-6));
}

// With no lurker signal and symmetric probabilities, each group's repost rate on fake news
// must match its rate on real news within three standard errors, pooled over seeds.
TEST(Generate, NoSignalMeansSymmetricRepostRates)
{
    std::array<std::array<double, 2>, 3> edges{}, pairs{};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = generate(symmetric_config(seed));
        for (int g = 0; g < 3; ++g) {
            for (int y = 0; y < 2; ++y) {
                edges[g][y] += static_cast<double>(s.truth.edges[g][y]);
                pairs[g][y] += static_cast<double>(s.truth.pairs[g][y]);
            }
        }
    }
    for (int g = 0; g < 3; ++g) {
        const double p0 = edges[g][0] / pairs[g][0], p1 = edges[g][1] / pairs[g][1];
        const double se = std::sqrt(p0 * (1 - p0) / pairs[g][0] + p1 * (1 - p1) / pairs[g][1]);
        EXPECT_LT(std::abs(p1 - p0), 3.0 * se) << "group " << g;
    }
}

TEST(Generate, BookkeepingMatchesCorpus)
{
    const auto s = echoweight::testing::small_synth(8);
    EXPECT_EQ(s.truth.total_edges(), s.corpus.events.size());
    EXPECT_EQ(s.truth.comments, s.corpus.comment_count());
    std::size_t pairs = 0;
    for (const auto& g : s.truth.pairs) pairs += g[0] + g[1];
    EXPECT_EQ(pairs, s.corpus.news.size() * s.corpus.users.size());
}

TEST(Generate, InfeasibleConfigurationsAreRejected)
{
    SynthConfig cfg;
    cfg.interact_prob = {{{0, 0}, {0, 0}, {0, 0}}};
    EXPECT_THROW(generate(cfg), ValidationError);

    cfg = SynthConfig{};
    cfg.rate_ranges[1] = {0.1, 0.1};  // open at lo, closed at hi: empty
    EXPECT_THROW(generate(cfg), ValidationError);

    cfg = SynthConfig{};
    cfg.group_fractions = {0.5, 0.5, 0.5};
    EXPECT_THROW(generate(cfg), ValidationError);
}

TEST(Oracle, WeightsAndEdgeMatrixAgreeWithFastPath)
{
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const auto s = echoweight::testing::small_synth(seed, 25, 50);
        const auto profiles = compute_profiles(s.corpus);
        const auto m = build_interaction_matrix(s.corpus);
        const auto fast = weight_vector(m, profiles, {}, 1.0);
        const auto slow = oracle_weights(s.corpus, profiles, {}, 1.0);
        EXPECT_EQ(fast.omega, slow.omega);
        EXPECT_EQ(fast.norm, slow.norm);
        const auto weighted = edge_reweight(m, fast);
        const auto dense = oracle_edge_reweight(s.corpus, profiles, slow);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) EXPECT_EQ(weighted.at(i, j), dense[i][j]);
        }
    }
}

TEST(WriteSynth, WritesCorpusAndGroundTruth)
{
    echoweight::testing::TempDir tmp("synth");
    const auto s = echoweight::testing::small_synth(3);
    write_synth(s, tmp.path());
    for (const char* f : {"news.jsonl", "comments.jsonl", "users.jsonl", "interactions.jsonl", "ground_truth.json"}) {
        EXPECT_TRUE(std::filesystem::exists(tmp / f)) << f;
    }
    EXPECT_EQ(load_corpus(CorpusPaths::in_directory(tmp.path())).corpus, s.corpus);
    const auto gt = jsonl::json::parse(echoweight::testing::slurp(tmp / "ground_truth.json"));
    EXPECT_EQ(gt.at("total_interactions"), s.corpus.events.size());
}
