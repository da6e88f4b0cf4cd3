#pragma once

#include <cstddef>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "echoweight/corpus.hpp"
#include "echoweight/participation.hpp"

namespace echoweight {

/// Dataset summary laid out like the usual dataset-statistics table: news by label,
/// interactions by user group, comment total.
struct StatsReport {
    std::size_t news_real = 0;
    std::size_t news_fake = 0;
    std::size_t interactions_lurker = 0;
    std::size_t interactions_engager = 0;
    std::size_t interactions_contributor = 0;
    std::size_t comments = 0;
    std::size_t users_lurker = 0;
    std::size_t users_engager = 0;
    std::size_t users_contributor = 0;
    std::size_t users_unobservable = 0;

    std::size_t news_total() const { return news_real + news_fake; }
    std::size_t interactions_total() const
    {
        return interactions_lurker + interactions_engager + interactions_contributor;
    }

    bool operator==(const StatsReport&) const = default;

    jsonl::json to_json() const
    {
        return {
            {"news", {{"real", news_real}, {"fake", news_fake}, {"total", news_total()}}},
            {"interactions",
             {{"lurkers", interactions_lurker},
              {"engagers", interactions_engager},
              {"contributors", interactions_contributor},
              {"total", interactions_total()}}},
            {"comments", comments},
            {"users",
             {{"lurkers", users_lurker},
              {"engagers", users_engager},
              {"contributors", users_contributor},
              {"unobservable", users_unobservable}}},
        };
    }
};

inline StatsReport corpus_stats(const Corpus& corpus, const std::vector<ParticipationProfile>& profiles)
{
    StatsReport s;
    for (const auto& n : corpus.news) (n.label == 1 ? s.news_fake : s.news_real) += 1;
    s.comments = corpus.comment_count();

    std::unordered_map<std::string_view, UserGroup> group;
    group.reserve(profiles.size());
    for (const auto& p : profiles) {
        group.emplace(p.user_id, p.group);
        switch (p.group) {
        case UserGroup::lurker: ++s.users_lurker; break;
        case UserGroup::engager: ++s.users_engager; break;
        case UserGroup::contributor: ++s.users_contributor; break;
        }
    }
    for (const auto& u : corpus.users) s.users_unobservable += u.observable ? 0 : 1;

    for (const auto& e : corpus.events) {
        auto it = group.find(e.user_id);
        if (it == group.end()) throw ContractError("no participation profile for user '" + e.user_id + "'");
        switch (it->second) {
        case UserGroup::lurker: ++s.interactions_lurker; break;
        case UserGroup::engager: ++s.interactions_engager; break;
        case UserGroup::contributor: ++s.interactions_contributor; break;
        }
    }
    return s;
}

}  // namespace echoweight
