#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <fmt/format.h>

#include "echoweight/corpus.hpp"
#include "echoweight/synth.hpp"

#ifndef ECHOWEIGHT_FIXTURE_DIR
#error "ECHOWEIGHT_FIXTURE_DIR must be defined by the build"
#endif

namespace echoweight::testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(ECHOWEIGHT_FIXTURE_DIR) / name; }

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                fmt::format("echoweight-{}-{}-{}", tag, static_cast<long>(::getpid()), counter++);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes a corpus with Politifact-sized counts:
/// 132 real + 319 fake news, 482 / 4,295 / 41,738 lurker / engager / contributor reposts
/// and 89,999 comments. Users: 482 lurkers (one repost each), 100 engagers, 100 contributors,
/// plus 5 unobservable accounts whose reposts must be dropped.
inline void write_politifact_shaped_fixture(const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    constexpr std::size_t n_news = 451, n_real = 132;
    auto news_id = [](std::size_t i) { return fmt::format("pf{:03}", i); };
    {
        std::ofstream out(dir / "news.jsonl");
        for (std::size_t i = 0; i < n_news; ++i) {
            out << fmt::format(R"({{"id": "{}", "text": "story number {}", "label": {}}})", news_id(i), i, i < n_real ? 0 : 1)
                << '\n';
        }
    }
    {
        std::ofstream out(dir / "comments.jsonl");
        for (std::size_t k = 0; k < 89999; ++k) {
            out << fmt::format(R"({{"news_id": "{}", "text": "comment {}"}})", news_id(k % n_news), k) << '\n';
        }
    }
    std::ofstream users(dir / "users.jsonl");
    std::ofstream inter(dir / "interactions.jsonl");
    auto add_user = [&](const std::string& id, int count, int age, bool observable) {
        users << fmt::format(R"({{"user_id": "{}", "total_activity_count": {}, "account_age_days": {}, "observable": {}}})",
                             id, count, age, observable ? "true" : "false")
              << '\n';
    };
    auto add_events = [&](const std::string& prefix, std::size_t n_users, std::size_t total, int count) {
        std::size_t emitted = 0;
        for (std::size_t u = 0; u < n_users; ++u) {
            const auto id = fmt::format("{}{:03}", prefix, u);
            add_user(id, count, 1000, true);
            const std::size_t share = total / n_users + (u < total % n_users ? 1 : 0);
            for (std::size_t k = 0; k < share; ++k) {
                inter << fmt::format(R"({{"user_id": "{}", "news_id": "{}"}})", id, news_id((u * 7 + k) % n_news)) << '\n';
                ++emitted;
            }
        }
        return emitted;
    };
    add_events("lurk", 482, 482, 10);        // 0.01 / day
    add_events("eng", 100, 4295, 100);       // 0.1 / day
    add_events("con", 100, 41738, 3000);     // 3 / day
    for (int k = 0; k < 5; ++k) {
        add_user(fmt::format("gone{}", k), 0, 1, false);
        inter << fmt::format(R"({{"user_id": "gone{}", "news_id": "{}"}})", k, news_id(0)) << '\n';
    }
    // a duplicate repost collapses into one event
    inter << fmt::format(R"({{"user_id": "con000", "news_id": "{}"}})", news_id(0)) << '\n';
}

/// Small random synthetic corpus for property tests.
inline SynthCorpus small_synth(std::uint64_t seed, std::size_t n_news = 40, std::size_t n_users = 60)
{
    SynthConfig cfg;
    cfg.n_news = n_news;
    cfg.n_users = n_users;
    cfg.group_fractions = {0.6, 0.3, 0.1};
    cfg.interact_prob = {{{0.05, 0.05}, {0.1, 0.1}, {0.3, 0.3}}};
    cfg.lurker_signal = 0.5;
    cfg.lurker_scale = 0.2;
    cfg.vocab_size = 200;
    cfg.words_per_news = 12;
    cfg.comments_per_news = 2;
    cfg.words_per_comment = 5;
    cfg.seed = seed;
    return generate(cfg);
}

}  // namespace echoweight::testing
