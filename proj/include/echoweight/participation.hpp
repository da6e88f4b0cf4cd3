#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "echoweight/corpus.hpp"
#include "echoweight/error.hpp"

namespace echoweight {

enum class UserGroup { lurker = 0, engager = 1, contributor = 2 };

inline constexpr std::array<UserGroup, 3> all_groups{UserGroup::lurker, UserGroup::engager, UserGroup::contributor};

inline std::string_view group_code(UserGroup g)
{
    switch (g) {
    case UserGroup::lurker: return "L";
    case UserGroup::engager: return "E";
    case UserGroup::contributor: return "C";
    }
    return "?";
}

inline UserGroup parse_group_code(std::string_view code)
{
    if (code == "L") return UserGroup::lurker;
    if (code == "E") return UserGroup::engager;
    if (code == "C") return UserGroup::contributor;
    throw ValidationError("unknown user group code '" + std::string(code) + "'");
}

/// Activity-rate cut points in activities per day. A rate exactly on a cut point belongs
/// to the quieter group.
struct Thresholds {
    double lurker_max = 0.025;
    double engager_max = 0.15;

    void validate() const
    {
        if (!(0.0 < lurker_max && lurker_max < engager_max)) {
            throw ValidationError("thresholds must satisfy 0 < lurker_max < engager_max");
        }
    }
};

struct ParticipationProfile {
    std::string user_id;
    double activity_rate = 0.0;
    UserGroup group = UserGroup::lurker;

    bool operator==(const ParticipationProfile&) const = default;
};

inline double activity_rate(const UserRecord& user)
{
    return static_cast<double>(user.total_activity_count) / static_cast<double>(user.account_age_days);
}

inline UserGroup categorize_user(double rate, const Thresholds& t = {})
{
    if (rate <= t.lurker_max) return UserGroup::lurker;
    if (rate <= t.engager_max) return UserGroup::engager;
    return UserGroup::contributor;
}

/// Profiles for observable users, in sorted user-id order (the interaction matrix column order).
inline std::vector<ParticipationProfile> compute_profiles(const Corpus& corpus, const Thresholds& t = {})
{
    t.validate();
    std::vector<ParticipationProfile> out;
    out.reserve(corpus.users.size());
    for (const auto& u : corpus.users) {
        if (!u.observable) continue;
        const double rate = activity_rate(u);
        out.push_back({u.user_id, rate, categorize_user(rate, t)});
    }
    return out;
}

/// Group of every matrix column. Throws if a column has no profile.
inline std::vector<UserGroup> column_groups(const InteractionMatrix& matrix,
                                            const std::vector<ParticipationProfile>& profiles)
{
    std::unordered_map<std::string_view, UserGroup> by_id;
    by_id.reserve(profiles.size());
    for (const auto& p : profiles) by_id.emplace(p.user_id, p.group);
    std::vector<UserGroup> out;
    out.reserve(matrix.cols());
    for (const auto& id : matrix.col_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw ContractError("no participation profile for user '" + id + "'");
        out.push_back(it->second);
    }
    return out;
}

/// Per-news interacting-user counts by group; the fractions are the exact ratios count/total.
struct Composition {
    std::size_t lurkers = 0;
    std::size_t engagers = 0;
    std::size_t contributors = 0;

    std::size_t total() const { return lurkers + engagers + contributors; }
    double frac_lurker() const { return static_cast<double>(lurkers) / static_cast<double>(total()); }
    double frac_engager() const { return static_cast<double>(engagers) / static_cast<double>(total()); }
    double frac_contributor() const { return static_cast<double>(contributors) / static_cast<double>(total()); }
};

/// Composition of row `row`. Empty optional when the news has no interactions (undefined point).
inline std::optional<Composition> group_composition(const InteractionMatrix& matrix, std::size_t row,
                                                    const std::vector<UserGroup>& groups)
{
    Composition c;
    for (auto j : matrix.row_cols(row)) {
        switch (groups[j]) {
        case UserGroup::lurker: ++c.lurkers; break;
        case UserGroup::engager: ++c.engagers; break;
        case UserGroup::contributor: ++c.contributors; break;
        }
    }
    if (c.total() == 0) return std::nullopt;
    return c;
}

inline std::optional<Composition> group_composition(const std::string& news_id, const InteractionMatrix& matrix,
                                                    const std::vector<ParticipationProfile>& profiles)
{
    auto it = std::lower_bound(matrix.row_ids.begin(), matrix.row_ids.end(), news_id);
    if (it == matrix.row_ids.end() || *it != news_id) throw ContractError("unknown news id '" + news_id + "'");
    return group_composition(matrix, static_cast<std::size_t>(it - matrix.row_ids.begin()),
                             column_groups(matrix, profiles));
}

inline void write_profiles(const std::vector<ParticipationProfile>& profiles, const std::filesystem::path& path)
{
    auto out = jsonl::open_out(path);
    for (const auto& p : profiles) {
        out << jsonl::json{{"user_id", p.user_id}, {"rate", p.activity_rate}, {"group", group_code(p.group)}}.dump()
            << '\n';
    }
}

inline std::vector<ParticipationProfile> read_profiles(const std::filesystem::path& path)
{
    std::vector<ParticipationProfile> out;
    jsonl::for_each_record(path, [&](const jsonl::json& r, std::size_t line) {
        jsonl::Fields f(r, path, line);
        if (!r.contains("rate") || !r["rate"].is_number()) f.fail("field 'rate' must be a number");
        out.push_back({f.string("user_id"), r["rate"].get<double>(), parse_group_code(f.string("group"))});
    });
    return out;
}

}  // namespace echoweight
