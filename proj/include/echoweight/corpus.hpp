#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "echoweight/error.hpp"
#include "echoweight/jsonl.hpp"

namespace echoweight {

struct NewsArticle {
    std::string id;
    std::string text;
    int label = 0;  // 0 = real, 1 = fake

    bool operator==(const NewsArticle&) const = default;
};

struct CommentSet {
    std::string news_id;
    std::vector<std::string> comments;

    bool operator==(const CommentSet&) const = default;
};

struct UserRecord {
    std::string user_id;
    std::int64_t total_activity_count = 0;
    std::int64_t account_age_days = 1;
    bool observable = true;

    bool operator==(const UserRecord&) const = default;
};

/// One retweet/repost of a news item by a user.
struct InteractionEvent {
    std::string user_id;
    std::string news_id;

    bool operator==(const InteractionEvent&) const = default;
    auto operator<=>(const InteractionEvent&) const = default;
};

/// Canonical, validated dataset. News and users are sorted by id, comments[i] belongs to
/// news[i], and events hold only deduplicated repost events by observable registered users,
/// sorted by (news_id, user_id).
struct Corpus {
    std::vector<NewsArticle> news;
    std::vector<CommentSet> comments;
    std::vector<UserRecord> users;
    std::vector<InteractionEvent> events;

    bool operator==(const Corpus&) const = default;

    std::size_t comment_count() const
    {
        std::size_t n = 0;
        for (const auto& c : comments) n += c.comments.size();
        return n;
    }
};

struct LoadReport {
    std::size_t duplicate_events = 0;
    std::size_t dropped_events = 0;  // user unknown or unobservable
};

struct LoadedCorpus {
    Corpus corpus;
    LoadReport report;
};

struct CorpusPaths {
    std::filesystem::path news;
    std::filesystem::path comments;
    std::filesystem::path users;
    std::filesystem::path interactions;

    static CorpusPaths in_directory(const std::filesystem::path& dir)
    {
        return {dir / "news.jsonl", dir / "comments.jsonl", dir / "users.jsonl", dir / "interactions.jsonl"};
    }
};

/// Sorts, deduplicates and filters raw records into a Corpus. Shared by the file loader and
/// the synthetic generator so both obey the same rules.
inline LoadedCorpus assemble_corpus(std::vector<NewsArticle> news,
                                    const std::vector<std::pair<std::string, std::string>>& comments,
                                    std::vector<UserRecord> users,
                                    std::vector<InteractionEvent> events)
{
    LoadedCorpus out;
    auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
    std::sort(news.begin(), news.end(), by_id);
    for (std::size_t i = 1; i < news.size(); ++i) {
        if (news[i].id == news[i - 1].id) throw ValidationError("duplicate news id '" + news[i].id + "'");
    }
    for (const auto& n : news) {
        if (n.label != 0 && n.label != 1) throw ValidationError("news '" + n.id + "' has label outside {0,1}");
    }
    std::sort(users.begin(), users.end(), [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
    for (std::size_t i = 1; i < users.size(); ++i) {
        if (users[i].user_id == users[i - 1].user_id) {
            throw ValidationError("duplicate user id '" + users[i].user_id + "'");
        }
    }
    for (const auto& u : users) {
        if (u.account_age_days < 1) throw ValidationError("user '" + u.user_id + "' has account_age_days < 1");
        if (u.total_activity_count < 0) {
            throw ValidationError("user '" + u.user_id + "' has negative total_activity_count");
        }
    }

    std::unordered_map<std::string, std::size_t> news_index;
    for (std::size_t i = 0; i < news.size(); ++i) news_index.emplace(news[i].id, i);

    std::set<std::string> dangling;
    out.corpus.comments.resize(news.size());
    for (std::size_t i = 0; i < news.size(); ++i) out.corpus.comments[i].news_id = news[i].id;
    for (const auto& [news_id, text] : comments) {
        auto it = news_index.find(news_id);
        if (it == news_index.end()) {
            dangling.insert(news_id);
            continue;
        }
        out.corpus.comments[it->second].comments.push_back(text);
    }
    if (!dangling.empty()) {
        std::string list;
        for (const auto& id : dangling) list += (list.empty() ? "" : ", ") + id;
        throw ValidationError("comments reference unknown news ids: " + list);
    }

    for (const auto& e : events) {
        if (!news_index.count(e.news_id)) dangling.insert(e.news_id);
    }
    if (!dangling.empty()) {
        std::string list;
        for (const auto& id : dangling) list += (list.empty() ? "" : ", ") + id;
        throw ValidationError("interactions reference unknown news ids: " + list);
    }

    std::unordered_map<std::string, bool> observable;
    for (const auto& u : users) observable.emplace(u.user_id, u.observable);

    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        return std::tie(a.news_id, a.user_id) < std::tie(b.news_id, b.user_id);
    });
    const auto before = events.size();
    events.erase(std::unique(events.begin(), events.end()), events.end());
    out.report.duplicate_events = before - events.size();

    std::vector<InteractionEvent> kept;
    kept.reserve(events.size());
    for (auto& e : events) {
        auto it = observable.find(e.user_id);
        if (it == observable.end() || !it->second) {
            ++out.report.dropped_events;
            continue;
        }
        kept.push_back(std::move(e));
    }

    out.corpus.news = std::move(news);
    out.corpus.users = std::move(users);
    out.corpus.events = std::move(kept);
    return out;
}

inline LoadedCorpus load_corpus(const CorpusPaths& paths)
{
    std::vector<NewsArticle> news;
    jsonl::for_each_record(paths.news, [&](const jsonl::json& r, std::size_t line) {
        jsonl::Fields f(r, paths.news, line);
        NewsArticle a{f.string("id"), f.string("text"), static_cast<int>(f.integer("label"))};
        if (a.label != 0 && a.label != 1) f.fail("label must be 0 or 1");
        news.push_back(std::move(a));
    });

    std::vector<std::pair<std::string, std::string>> comments;
    jsonl::for_each_record(paths.comments, [&](const jsonl::json& r, std::size_t line) {
        jsonl::Fields f(r, paths.comments, line);
        comments.emplace_back(f.string("news_id"), f.string("text"));
    });

    std::vector<UserRecord> users;
    jsonl::for_each_record(paths.users, [&](const jsonl::json& r, std::size_t line) {
        jsonl::Fields f(r, paths.users, line);
        UserRecord u{f.string("user_id"), f.integer("total_activity_count"), f.integer("account_age_days"),
                     f.boolean("observable")};
        if (u.account_age_days < 1) f.fail("account_age_days must be >= 1");
        if (u.total_activity_count < 0) f.fail("total_activity_count must be >= 0");
        users.push_back(std::move(u));
    });

    std::vector<InteractionEvent> events;
    jsonl::for_each_record(paths.interactions, [&](const jsonl::json& r, std::size_t line) {
        jsonl::Fields f(r, paths.interactions, line);
        events.push_back({f.string("user_id"), f.string("news_id")});
    });

    return assemble_corpus(std::move(news), comments, std::move(users), std::move(events));
}

inline void save_corpus(const Corpus& corpus, const CorpusPaths& paths)
{
    using jsonl::json;
    {
        auto out = jsonl::open_out(paths.news);
        for (const auto& n : corpus.news) out << json{{"id", n.id}, {"text", n.text}, {"label", n.label}}.dump() << '\n';
    }
    {
        auto out = jsonl::open_out(paths.comments);
        for (const auto& set : corpus.comments) {
            for (const auto& c : set.comments) out << json{{"news_id", set.news_id}, {"text", c}}.dump() << '\n';
        }
    }
    {
        auto out = jsonl::open_out(paths.users);
        for (const auto& u : corpus.users) {
            out << json{{"user_id", u.user_id},
                        {"total_activity_count", u.total_activity_count},
                        {"account_age_days", u.account_age_days},
                        {"observable", u.observable}}
                       .dump()
                << '\n';
        }
    }
    {
        auto out = jsonl::open_out(paths.interactions);
        for (const auto& e : corpus.events) out << json{{"user_id", e.user_id}, {"news_id", e.news_id}}.dump() << '\n';
    }
}

/// Sparse news x user matrix in CSR layout. Rows follow sorted news ids, columns sorted
/// observable user ids.
struct InteractionMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    std::size_t rows() const { return row_ids.size(); }
    std::size_t cols() const { return col_ids.size(); }
    std::size_t nnz() const { return val.size(); }

    std::span<const std::uint32_t> row_cols(std::size_t i) const
    {
        return {col.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
    }
    std::span<const double> row_vals(std::size_t i) const
    {
        return {val.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
    }

    double at(std::size_t i, std::size_t j) const
    {
        auto cols = row_cols(i);
        auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<std::uint32_t>(j));
        if (it == cols.end() || *it != j) return 0.0;
        return val[row_ptr[i] + static_cast<std::size_t>(it - cols.begin())];
    }

    double sum() const
    {
        double s = 0.0;
        for (double v : val) s += v;
        return s;
    }

    bool operator==(const InteractionMatrix&) const = default;
};

inline InteractionMatrix build_interaction_matrix(const Corpus& corpus)
{
    InteractionMatrix m;
    m.row_ids.reserve(corpus.news.size());
    for (const auto& n : corpus.news) m.row_ids.push_back(n.id);

    std::unordered_map<std::string, std::uint32_t> column;
    for (const auto& u : corpus.users) {
        if (!u.observable) continue;
        column.emplace(u.user_id, static_cast<std::uint32_t>(m.col_ids.size()));
        m.col_ids.push_back(u.user_id);
    }

    std::unordered_map<std::string, std::size_t> row;
    for (std::size_t i = 0; i < m.row_ids.size(); ++i) row.emplace(m.row_ids[i], i);

    std::vector<std::vector<std::uint32_t>> per_row(m.rows());
    for (const auto& e : corpus.events) {
        auto c = column.find(e.user_id);
        auto r = row.find(e.news_id);
        if (c == column.end() || r == row.end()) {
            throw ContractError("event (" + e.user_id + ", " + e.news_id + ") is not covered by the corpus registry");
        }
        per_row[r->second].push_back(c->second);
    }
    m.row_ptr.assign(1, 0);
    for (auto& cols : per_row) {
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        m.col.insert(m.col.end(), cols.begin(), cols.end());
        m.row_ptr.push_back(m.col.size());
    }
    m.val.assign(m.col.size(), 1.0);
    return m;
}

}  // namespace echoweight
