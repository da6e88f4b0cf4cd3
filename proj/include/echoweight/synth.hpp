#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "echoweight/corpus.hpp"
#include "echoweight/error.hpp"
#include "echoweight/participation.hpp"
#include "echoweight/random.hpp"
#include "echoweight/weighting.hpp"

namespace echoweight {

/// Activity-rate interval of one group. The lurker interval is closed at `lo`; the others
/// are open at `lo`. All are closed at `hi`.
struct RateRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct SynthConfig {
    std::size_t n_news = 200;
    std::size_t n_users = 1000;
    std::array<double, 3> group_fractions{0.90, 0.09, 0.01};
    double fake_fraction = 0.5;
    std::array<RateRange, 3> rate_ranges{RateRange{0.0, 0.025}, RateRange{0.025, 0.15}, RateRange{0.15, 20.0}};
    /// Base repost probability indexed [group][label]. The lurker row is shifted by the
    /// lurker signal: + s * lurker_scale for fake news, + s * lurker_scale / 10 for real news.
    std::array<std::array<double, 2>, 3> interact_prob{{{0.0, 0.0}, {0.02, 0.02}, {0.2, 0.2}}};
    double lurker_signal = 0.0;
    double lurker_scale = 1.0;
    std::size_t vocab_size = 2000;
    std::size_t words_per_news = 40;
    std::size_t comments_per_news = 3;
    std::size_t words_per_comment = 12;
    /// Probability that a word is drawn from the label's own lexicon instead of the shared one.
    double text_signal = 0.1;
    double comment_signal = 0.1;
    std::int64_t min_account_age = 30;
    std::int64_t max_account_age = 3650;
    std::uint64_t seed = 0;

    double effective_prob(UserGroup g, int label) const
    {
        double p = interact_prob[static_cast<int>(g)][label];
        if (g == UserGroup::lurker) p += lurker_signal * lurker_scale * (label == 1 ? 1.0 : 0.1);
        return std::min(p, 1.0);
    }

    void validate() const
    {
        if (n_news == 0 || n_users == 0) throw ValidationError("synth: n_news and n_users must be positive");
        double sum = 0.0;
        for (double f : group_fractions) {
            if (f < 0.0) throw ValidationError("synth: group fractions must be >= 0");
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("synth: group fractions must sum to 1");
        if (!(fake_fraction >= 0.0 && fake_fraction <= 1.0)) throw ValidationError("synth: fake_fraction outside [0,1]");
        for (const auto& row : interact_prob) {
            for (double p : row) {
                if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("synth: interact_prob outside [0,1]");
            }
        }
        if (!(lurker_signal >= 0.0 && lurker_signal <= 1.0)) throw ValidationError("synth: lurker_signal outside [0,1]");
        if (!(lurker_scale >= 0.0)) throw ValidationError("synth: lurker_scale must be >= 0");
        for (const auto& r : rate_ranges) {
            if (!(r.lo >= 0.0 && r.hi >= r.lo)) throw ValidationError("synth: bad rate range");
        }
        if (vocab_size < 8) throw ValidationError("synth: vocab_size must be >= 8");
        if (!(text_signal >= 0.0 && text_signal <= 1.0 && comment_signal >= 0.0 && comment_signal <= 1.0)) {
            throw ValidationError("synth: text/comment signal outside [0,1]");
        }
        if (min_account_age < 1 || max_account_age < min_account_age) throw ValidationError("synth: bad account ages");
    }
};

/// Latent draws of one generated corpus.
struct GroundTruth {
    std::vector<std::string> user_ids;
    std::vector<UserGroup> user_groups;
    std::vector<double> user_rates;
    std::vector<std::string> news_ids;
    std::vector<int> news_labels;
    std::array<std::size_t, 3> group_sizes{};
    std::array<std::array<std::size_t, 2>, 3> edges{};  // [group][label]
    std::array<std::array<std::size_t, 2>, 3> pairs{};  // candidate (user, news) pairs, [group][label]
    std::size_t comments = 0;

    std::size_t total_edges() const
    {
        std::size_t s = 0;
        for (const auto& g : edges) s += g[0] + g[1];
        return s;
    }

    jsonl::json to_json() const
    {
        jsonl::json users = jsonl::json::array();
        for (std::size_t i = 0; i < user_ids.size(); ++i) {
            users.push_back({{"user_id", user_ids[i]}, {"group", group_code(user_groups[i])}, {"rate", user_rates[i]}});
        }
        jsonl::json news = jsonl::json::array();
        for (std::size_t i = 0; i < news_ids.size(); ++i) news.push_back({{"id", news_ids[i]}, {"label", news_labels[i]}});
        jsonl::json edge_counts, pair_counts;
        for (auto g : all_groups) {
            const auto k = static_cast<int>(g);
            edge_counts[std::string(group_code(g))] = {{"real", edges[k][0]}, {"fake", edges[k][1]}};
            pair_counts[std::string(group_code(g))] = {{"real", pairs[k][0]}, {"fake", pairs[k][1]}};
        }
        return {{"group_sizes", {{"L", group_sizes[0]}, {"E", group_sizes[1]}, {"C", group_sizes[2]}}},
                {"interactions", edge_counts},
                {"candidate_pairs", pair_counts},
                {"total_interactions", total_edges()},
                {"comments", comments},
                {"users", users},
                {"news", news}};
    }
};

struct SynthCorpus {
    Corpus corpus;
    GroundTruth truth;
};

/// Largest-remainder apportionment of n items; ties go to the lower index.
template <std::size_t K>
std::array<std::size_t, K> largest_remainder(const std::array<double, K>& fractions, std::size_t n)
{
    std::array<std::size_t, K> out{};
    std::array<double, K> rem{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double exact = fractions[k] * static_cast<double>(n);
        out[k] = static_cast<std::size_t>(std::floor(exact));
        rem[k] = exact - std::floor(exact);
        assigned += out[k];
    }
    std::array<std::size_t, K> order{};
    for (std::size_t k = 0; k < K; ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < n; k = (k + 1) % K, ++assigned) ++out[order[k]];
    return out;
}

namespace detail {

inline bool rate_in_range(double rate, const RateRange& r, bool closed_low)
{
    return (closed_low ? rate >= r.lo : rate > r.lo) && rate <= r.hi;
}

inline std::string padded_id(char prefix, std::size_t i, std::size_t n)
{
    const auto width = std::to_string(n).size();
    return fmt::format("{}{:0{}}", prefix, i, width);
}

inline std::string draw_text(Rng& rng, std::size_t words, std::size_t vocab, int label, double signal)
{
    // words [0, V/8) form the fake lexicon, [V/8, V/4) the real lexicon, the rest is shared
    const std::size_t lex = vocab / 8;
    std::string out;
    for (std::size_t w = 0; w < words; ++w) {
        std::size_t word;
        if (rng.bernoulli(signal)) {
            word = (label == 1 ? 0 : lex) + rng.index(lex);
        } else {
            word = 2 * lex + rng.index(vocab - 2 * lex);
        }
        if (!out.empty()) out.push_back(' ');
        out += fmt::format("w{}", word);
    }
    return out;
}

}  // namespace detail

inline SynthCorpus generate(const SynthConfig& cfg)
{
    cfg.validate();
    double expected = 0.0;
    for (auto g : all_groups) {
        for (int y = 0; y < 2; ++y) expected += cfg.group_fractions[static_cast<int>(g)] * cfg.effective_prob(g, y);
    }
    if (expected <= 0.0) throw ValidationError("synth: configuration yields zero expected interactions");

    Rng rng(cfg.seed);
    SynthCorpus out;
    auto& gt = out.truth;

    const auto sizes = largest_remainder(cfg.group_fractions, cfg.n_users);
    gt.group_sizes = sizes;
    std::vector<UserGroup> groups;
    for (auto g : all_groups) groups.insert(groups.end(), sizes[static_cast<int>(g)], g);
    rng.shuffle(groups);

    std::vector<UserRecord> users;
    users.reserve(cfg.n_users);
    for (std::size_t i = 0; i < cfg.n_users; ++i) {
        const auto g = groups[i];
        const auto& range = cfg.rate_ranges[static_cast<int>(g)];
        const bool closed_low = g == UserGroup::lurker;
        std::int64_t age = 0, count = -1;
        for (int attempt = 0; attempt < 1000 && count < 0; ++attempt) {
            age = rng.between(cfg.min_account_age, cfg.max_account_age);
            const double a = static_cast<double>(age);
            auto c = static_cast<std::int64_t>(std::llround(rng.uniform(range.lo, range.hi) * a));
            // nudge onto an integer count whose exact ratio lies inside the interval
            const auto lo = static_cast<std::int64_t>(std::floor(range.lo * a)) - 1;
            const auto hi = static_cast<std::int64_t>(std::ceil(range.hi * a)) + 1;
            c = std::clamp(c, std::max<std::int64_t>(lo, 0), hi);
            for (auto d : {std::int64_t{0}, std::int64_t{1}, std::int64_t{-1}, std::int64_t{2}, std::int64_t{-2}}) {
                const auto cand = c + d;
                if (cand >= 0 && detail::rate_in_range(static_cast<double>(cand) / a, range, closed_low)) {
                    count = cand;
                    break;
                }
            }
        }
        if (count < 0) throw ValidationError("synth: cannot realize an activity rate inside the configured interval");
        auto id = detail::padded_id('u', i, cfg.n_users);
        gt.user_ids.push_back(id);
        gt.user_groups.push_back(g);
        gt.user_rates.push_back(static_cast<double>(count) / static_cast<double>(age));
        users.push_back({std::move(id), count, age, true});
    }

    const auto fakes = static_cast<std::size_t>(std::llround(cfg.fake_fraction * static_cast<double>(cfg.n_news)));
    std::vector<int> labels(cfg.n_news, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(fakes), 1);
    rng.shuffle(labels);

    std::vector<NewsArticle> news;
    std::vector<std::pair<std::string, std::string>> comments;
    std::vector<InteractionEvent> events;
    for (std::size_t i = 0; i < cfg.n_news; ++i) {
        auto id = detail::padded_id('n', i, cfg.n_news);
        const int y = labels[i];
        news.push_back({id, detail::draw_text(rng, cfg.words_per_news, cfg.vocab_size, y, cfg.text_signal), y});
        for (std::size_t c = 0; c < cfg.comments_per_news; ++c) {
            comments.emplace_back(id, detail::draw_text(rng, cfg.words_per_comment, cfg.vocab_size, y, cfg.comment_signal));
        }
        for (std::size_t j = 0; j < cfg.n_users; ++j) {
            const auto g = static_cast<int>(groups[j]);
            ++gt.pairs[g][y];
            if (rng.bernoulli(cfg.effective_prob(groups[j], y))) {
                ++gt.edges[g][y];
                events.push_back({gt.user_ids[j], id});
            }
        }
        gt.news_ids.push_back(id);
        gt.news_labels.push_back(y);
    }
    gt.comments = comments.size();

    out.corpus = assemble_corpus(std::move(news), comments, std::move(users), std::move(events)).corpus;
    return out;
}

inline void write_synth(const SynthCorpus& s, const std::filesystem::path& dir)
{
    save_corpus(s.corpus, CorpusPaths::in_directory(dir));
    auto out = jsonl::open_out(dir / "ground_truth.json");
    out << s.truth.to_json().dump(1) << '\n';
}

/// Reference silent-user weights by exhaustive (news, user) enumeration. Quadratic; meant
/// as an independent check on weight_vector for small corpora.
inline WeightVector oracle_weights(const Corpus& corpus, const std::vector<ParticipationProfile>& profiles,
                                   const GroupCoefficients& coeffs, double alpha = 0.0)
{
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : corpus.events) edges.emplace(e.news_id, e.user_id);

    WeightVector wv;
    wv.alpha = alpha;
    for (const auto& n : corpus.news) {
        double lurkers = 0.0, engagers = 0.0, contributors = 0.0;
        for (const auto& p : profiles) {
            const double u = edges.count({n.id, p.user_id}) ? 1.0 : 0.0;
            lurkers += (p.group == UserGroup::lurker ? 1.0 : 0.0) * u;
            engagers += (p.group == UserGroup::engager ? 1.0 : 0.0) * u;
            contributors += (p.group == UserGroup::contributor ? 1.0 : 0.0) * u;
        }
        wv.omega.push_back(coeffs.lurker * lurkers + coeffs.engager * engagers + coeffs.contributor * contributors);
    }
    double sq = 0.0;
    for (double w : wv.omega) sq += w * w;
    wv.norm = sq > 0.0 ? std::sqrt(sq) : 1.0;
    return wv;
}

/// Dense reference of the edge re-weighted matrix: entry (i, j) = u_ij * (1 + w_i/|w|)^alpha.
inline std::vector<std::vector<double>> oracle_edge_reweight(const Corpus& corpus,
                                                             const std::vector<ParticipationProfile>& profiles,
                                                             const WeightVector& wv)
{
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : corpus.events) edges.emplace(e.news_id, e.user_id);
    std::vector<std::vector<double>> dense(corpus.news.size(), std::vector<double>(profiles.size(), 0.0));
    for (std::size_t i = 0; i < corpus.news.size(); ++i) {
        for (std::size_t j = 0; j < profiles.size(); ++j) {
            const double u = edges.count({corpus.news[i].id, profiles[j].user_id}) ? 1.0 : 0.0;
            dense[i][j] = u * std::pow(1.0 + wv.omega[i] / wv.norm, wv.alpha);
        }
    }
    return dense;
}

/// Empirical mutual information (nats) between a news label and the presence of a lurker
/// repost, over all (lurker, news) pairs of the generated corpus.
inline double lurker_label_mutual_information(const GroundTruth& gt)
{
    const auto& e = gt.edges[0];
    const auto& p = gt.pairs[0];
    const double total = static_cast<double>(p[0] + p[1]);
    if (total == 0.0) return 0.0;
    const double joint[2][2] = {{static_cast<double>(p[0] - e[0]), static_cast<double>(p[1] - e[1])},
                                {static_cast<double>(e[0]), static_cast<double>(e[1])}};
    double mi = 0.0;
    for (int edge = 0; edge < 2; ++edge) {
        const double pe = (joint[edge][0] + joint[edge][1]) / total;
        for (int y = 0; y < 2; ++y) {
            const double pj = joint[edge][y] / total;
            const double py = static_cast<double>(p[y]) / total;
            if (pj > 0.0) mi += pj * std::log(pj / (pe * py));
        }
    }
    return mi;
}

}  // namespace echoweight
