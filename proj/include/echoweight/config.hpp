#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <string>

#include "echoweight/corpus.hpp"
#include "echoweight/eval.hpp"
#include "echoweight/synth.hpp"

namespace echoweight {

/// File-based configuration for every CLI subcommand. Every section is optional.
struct RunConfig {
    std::optional<CorpusPaths> corpus;
    PipelineSettings pipeline;
    double alpha = 1.0;
    ExperimentGrid grid;
    SynthConfig synth;
    std::uint64_t seed = 0;

    /// Seed and alpha are single-valued here and pushed into the nested configs.
    void resolve()
    {
        pipeline.thresholds.validate();
        pipeline.coefficients.validate();
        if (!(alpha >= 0.0)) throw ValidationError("weighting.alpha must be >= 0");
        if (pipeline.encoder_dim == 0) throw ValidationError("encoder.dim must be positive");
        pipeline.train.alpha = alpha;
        pipeline.train.seed = seed;
        pipeline.train.norm_kind = pipeline.norm_kind;
        pipeline.train.validate();
        grid.validate();
        synth.seed = seed;
        synth.validate();
    }
};

namespace detail {

using json = jsonl::json;

/// Reads one JSON object section, rejecting keys it does not know.
class Section {
public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name))
    {
        if (!j_.is_object()) throw ValidationError("config section '" + name_ + "' must be an object");
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        for (const auto& [k, v] : j_.items()) {
            bool ok = false;
            for (const char* key : keys) ok |= k == key;
            if (!ok) throw ValidationError("unknown config key '" + name_ + "." + k + "'");
        }
    }

    template <class T>
    void read(const char* key, T& out) const
    {
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw ValidationError("config key '" + name_ + "." + key + "' has the wrong type");
        }
    }

    const json* child(const char* key) const
    {
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

private:
    const json& j_;
    std::string name_;
};

}  // namespace detail

inline RunConfig parse_run_config(const jsonl::json& j, const std::filesystem::path& base_dir = {})
{
    using detail::Section;
    RunConfig rc;
    Section top(j, "config");
    top.allow({"corpus", "thresholds", "coefficients", "weighting", "encoder", "train", "grid", "synth", "seed"});
    top.read("seed", rc.seed);

    if (const auto* c = top.child("corpus")) {
        Section s(*c, "corpus");
        s.allow({"dir", "news", "comments", "users", "interactions"});
        std::string dir, news, comments, users, interactions;
        s.read("dir", dir);
        auto resolve = [&](const std::string& p) { return p.empty() || std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p; };
        CorpusPaths paths = dir.empty() ? CorpusPaths{} : CorpusPaths::in_directory(resolve(dir));
        s.read("news", news);
        s.read("comments", comments);
        s.read("users", users);
        s.read("interactions", interactions);
        if (!news.empty()) paths.news = resolve(news);
        if (!comments.empty()) paths.comments = resolve(comments);
        if (!users.empty()) paths.users = resolve(users);
        if (!interactions.empty()) paths.interactions = resolve(interactions);
        rc.corpus = paths;
    }
    if (const auto* c = top.child("thresholds")) {
        Section s(*c, "thresholds");
        s.allow({"lurker_max", "engager_max"});
        s.read("lurker_max", rc.pipeline.thresholds.lurker_max);
        s.read("engager_max", rc.pipeline.thresholds.engager_max);
    }
    if (const auto* c = top.child("coefficients")) {
        Section s(*c, "coefficients");
        s.allow({"lurker", "engager", "contributor"});
        s.read("lurker", rc.pipeline.coefficients.lurker);
        s.read("engager", rc.pipeline.coefficients.engager);
        s.read("contributor", rc.pipeline.coefficients.contributor);
    }
    if (const auto* c = top.child("weighting")) {
        Section s(*c, "weighting");
        s.allow({"alpha", "coefficients", "norm_kind", "norm_scope"});
        s.read("alpha", rc.alpha);
        std::string kind = std::string(to_string(rc.pipeline.norm_kind));
        std::string scope = std::string(to_string(rc.pipeline.norm_scope));
        s.read("norm_kind", kind);
        s.read("norm_scope", scope);
        rc.pipeline.norm_kind = parse_norm_kind(kind);
        rc.pipeline.norm_scope = parse_norm_scope(scope);
        if (const auto* co = s.child("coefficients")) {
            Section cs(*co, "weighting.coefficients");
            cs.allow({"lurker", "engager", "contributor"});
            cs.read("lurker", rc.pipeline.coefficients.lurker);
            cs.read("engager", rc.pipeline.coefficients.engager);
            cs.read("contributor", rc.pipeline.coefficients.contributor);
        }
    }
    if (const auto* c = top.child("encoder")) {
        Section s(*c, "encoder");
        s.allow({"dim", "hash"});
        s.read("dim", rc.pipeline.encoder_dim);
        std::string hash = "fnv1a64";
        s.read("hash", hash);
        if (hash != "fnv1a64") throw ValidationError("encoder.hash must be \"fnv1a64\"");
    }
    if (const auto* c = top.child("train")) {
        Section s(*c, "train");
        s.allow({"epochs", "batch_size", "learning_rate", "mode", "early_stop_patience", "un_hidden", "fusion_hidden",
                 "validation_fraction"});
        auto& t = rc.pipeline.train;
        s.read("epochs", t.epochs);
        s.read("batch_size", t.batch_size);
        s.read("learning_rate", t.learning_rate);
        s.read("early_stop_patience", t.early_stop_patience);
        s.read("un_hidden", t.un_hidden);
        s.read("fusion_hidden", t.fusion_hidden);
        s.read("validation_fraction", t.validation_fraction);
        std::string mode = std::string(to_string(t.mode));
        s.read("mode", mode);
        t.mode = parse_train_mode(mode);
    }
    if (const auto* c = top.child("grid")) {
        Section s(*c, "grid");
        s.allow({"conditions", "alphas", "seeds", "split_ratio"});
        std::vector<std::string> conds;
        s.read("conditions", conds);
        if (!conds.empty()) {
            rc.grid.conditions.clear();
            for (const auto& name : conds) rc.grid.conditions.push_back(parse_condition(name));
        } else if (s.child("conditions")) {
            rc.grid.conditions.clear();
        }
        s.read("alphas", rc.grid.alphas);
        s.read("seeds", rc.grid.seeds);
        s.read("split_ratio", rc.grid.split_ratio);
    }
    if (const auto* c = top.child("synth")) {
        Section s(*c, "synth");
        s.allow({"n_news", "n_users", "group_fractions", "fake_fraction", "rate_ranges", "interact_prob", "lurker_signal",
                 "lurker_scale", "vocab_size", "words_per_news", "comments_per_news", "words_per_comment", "text_signal",
                 "comment_signal", "min_account_age", "max_account_age"});
        auto& sc = rc.synth;
        s.read("n_news", sc.n_news);
        s.read("n_users", sc.n_users);
        s.read("group_fractions", sc.group_fractions);
        s.read("fake_fraction", sc.fake_fraction);
        s.read("lurker_signal", sc.lurker_signal);
        s.read("lurker_scale", sc.lurker_scale);
        s.read("vocab_size", sc.vocab_size);
        s.read("words_per_news", sc.words_per_news);
        s.read("comments_per_news", sc.comments_per_news);
        s.read("words_per_comment", sc.words_per_comment);
        s.read("text_signal", sc.text_signal);
        s.read("comment_signal", sc.comment_signal);
        s.read("min_account_age", sc.min_account_age);
        s.read("max_account_age", sc.max_account_age);
        if (const auto* rr = s.child("rate_ranges")) {
            Section r(*rr, "synth.rate_ranges");
            r.allow({"L", "E", "C"});
            for (auto g : all_groups) {
                std::array<double, 2> lohi{sc.rate_ranges[static_cast<int>(g)].lo, sc.rate_ranges[static_cast<int>(g)].hi};
                r.read(std::string(group_code(g)).c_str(), lohi);
                sc.rate_ranges[static_cast<int>(g)] = {lohi[0], lohi[1]};
            }
        }
        if (const auto* ip = s.child("interact_prob")) {
            Section r(*ip, "synth.interact_prob");
            r.allow({"L", "E", "C"});
            for (auto g : all_groups) {
                const auto* gj = r.child(std::string(group_code(g)).c_str());
                if (!gj) continue;
                Section gs(*gj, "synth.interact_prob." + std::string(group_code(g)));
                gs.allow({"real", "fake"});
                gs.read("real", sc.interact_prob[static_cast<int>(g)][0]);
                gs.read("fake", sc.interact_prob[static_cast<int>(g)][1]);
            }
        }
    }
    return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    jsonl::json j;
    try {
        j = jsonl::json::parse(in);
    } catch (const jsonl::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    return parse_run_config(j, path.parent_path());
}

/// Fully resolved configuration, written next to every run's outputs.
inline jsonl::json to_json(const RunConfig& rc)
{
    using json = jsonl::json;
    const auto& p = rc.pipeline;
    json j;
    j["seed"] = rc.seed;
    if (rc.corpus) {
        j["corpus"] = {{"news", rc.corpus->news.string()},
                       {"comments", rc.corpus->comments.string()},
                       {"users", rc.corpus->users.string()},
                       {"interactions", rc.corpus->interactions.string()}};
    }
    j["thresholds"] = {{"lurker_max", p.thresholds.lurker_max}, {"engager_max", p.thresholds.engager_max}};
    j["coefficients"] = {{"lurker", p.coefficients.lurker},
                         {"engager", p.coefficients.engager},
                         {"contributor", p.coefficients.contributor}};
    j["weighting"] = {{"alpha", rc.alpha},
                      {"norm_kind", to_string(p.norm_kind)},
                      {"norm_scope", to_string(p.norm_scope)}};
    j["encoder"] = {{"dim", p.encoder_dim}, {"hash", "fnv1a64"}};
    j["train"] = {{"epochs", p.train.epochs},
                  {"batch_size", p.train.batch_size},
                  {"learning_rate", p.train.learning_rate},
                  {"mode", to_string(p.train.mode)},
                  {"early_stop_patience", p.train.early_stop_patience},
                  {"un_hidden", p.train.un_hidden},
                  {"fusion_hidden", p.train.fusion_hidden},
                  {"validation_fraction", p.train.validation_fraction}};
    json conds = json::array();
    for (auto c : rc.grid.conditions) conds.push_back(to_string(c));
    j["grid"] = {{"conditions", conds},
                 {"alphas", rc.grid.alphas},
                 {"seeds", rc.grid.seeds},
                 {"split_ratio", rc.grid.split_ratio}};
    const auto& s = rc.synth;
    json ranges, probs;
    for (auto g : all_groups) {
        const auto k = static_cast<int>(g);
        const std::string code(group_code(g));
        ranges[code] = {s.rate_ranges[k].lo, s.rate_ranges[k].hi};
        probs[code] = {{"real", s.interact_prob[k][0]}, {"fake", s.interact_prob[k][1]}};
    }
    j["synth"] = {{"n_news", s.n_news},
                  {"n_users", s.n_users},
                  {"group_fractions", s.group_fractions},
                  {"fake_fraction", s.fake_fraction},
                  {"rate_ranges", ranges},
                  {"interact_prob", probs},
                  {"lurker_signal", s.lurker_signal},
                  {"lurker_scale", s.lurker_scale},
                  {"vocab_size", s.vocab_size},
                  {"words_per_news", s.words_per_news},
                  {"comments_per_news", s.comments_per_news},
                  {"words_per_comment", s.words_per_comment},
                  {"text_signal", s.text_signal},
                  {"comment_signal", s.comment_signal},
                  {"min_account_age", s.min_account_age},
                  {"max_account_age", s.max_account_age}};
    return j;
}

}  // namespace echoweight
