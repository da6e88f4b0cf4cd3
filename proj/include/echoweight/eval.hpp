#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "echoweight/corpus.hpp"
#include "echoweight/encode.hpp"
#include "echoweight/model.hpp"
#include "echoweight/participation.hpp"
#include "echoweight/split.hpp"
#include "echoweight/weighting.hpp"

namespace echoweight {

enum class Condition { text_only, binary_un, edge_reweight, sample_reweight };

inline constexpr Condition all_conditions[] = {Condition::text_only, Condition::binary_un, Condition::edge_reweight,
                                               Condition::sample_reweight};

inline std::string_view to_string(Condition c)
{
    switch (c) {
    case Condition::text_only: return "text_only";
    case Condition::binary_un: return "binary_un";
    case Condition::edge_reweight: return "edge_reweight";
    case Condition::sample_reweight: return "sample_reweight";
    }
    return "?";
}

inline Condition parse_condition(std::string_view s)
{
    for (auto c : all_conditions) {
        if (to_string(c) == s) return c;
    }
    throw ValidationError("unknown condition '" + std::string(s) + "'");
}

/// Only the two re-weighting conditions depend on alpha.
inline bool uses_alpha(Condition c) { return c == Condition::edge_reweight || c == Condition::sample_reweight; }

enum class NormScope { train, all };

inline std::string_view to_string(NormScope s) { return s == NormScope::train ? "train" : "all"; }

inline NormScope parse_norm_scope(std::string_view s)
{
    if (s == "train") return NormScope::train;
    if (s == "all") return NormScope::all;
    throw ValidationError("unknown norm_scope '" + std::string(s) + "' (expected train or all)");
}

struct ExperimentGrid {
    std::vector<Condition> conditions{Condition::text_only, Condition::binary_un, Condition::edge_reweight,
                                      Condition::sample_reweight};
    std::vector<double> alphas{0.5, 1.0};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double split_ratio = 0.75;

    void validate() const
    {
        if (conditions.empty()) throw ValidationError("grid: conditions must be nonempty");
        if (seeds.empty()) throw ValidationError("grid: seeds must be nonempty");
        for (double a : alphas) {
            if (!(a >= 0.0)) throw ValidationError("grid: alphas must be >= 0");
        }
        if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ValidationError("grid: split_ratio must lie in (0,1)");
    }
};

/// Everything except the model: how profiles, weights and text features are built.
struct PipelineSettings {
    Thresholds thresholds;
    GroupCoefficients coefficients;
    NormKind norm_kind = NormKind::l2;
    NormScope norm_scope = NormScope::train;
    std::size_t encoder_dim = 4096;
    TrainConfig train;
};

/// Corpus-level data shared by every seed: tokenized text, the binary matrix, the column
/// groups and the per-news silent-user weights.
struct PreparedCorpus {
    std::vector<TokenSequence> news_tokens;
    std::vector<std::vector<TokenSequence>> comment_tokens;
    std::vector<int> labels;
    InteractionMatrix binary;
    std::vector<UserGroup> groups;
    std::vector<double> omega;
};

inline PreparedCorpus prepare_corpus(const Corpus& corpus, const PipelineSettings& settings)
{
    PreparedCorpus p;
    for (std::size_t i = 0; i < corpus.news.size(); ++i) {
        p.news_tokens.push_back(preprocess(corpus.news[i].text));
        std::vector<TokenSequence> cs;
        for (const auto& c : corpus.comments[i].comments) cs.push_back(preprocess(c));
        p.comment_tokens.push_back(std::move(cs));
        p.labels.push_back(corpus.news[i].label);
    }
    p.binary = build_interaction_matrix(corpus);
    p.groups = column_groups(p.binary, compute_profiles(corpus, settings.thresholds));
    p.omega = news_weights(p.binary, p.groups, settings.coefficients);
    return p;
}

/// Per-seed state: split, training-fit encoder, text features for every news.
struct SeedFeatures {
    SplitIndices split;
    IdfTable idf;
    std::vector<EmbeddingVector> news;
    std::vector<EmbeddingVector> comments;
};

inline SeedFeatures prepare_seed(const PreparedCorpus& p, double split_ratio, std::uint64_t seed, std::size_t dim)
{
    SeedFeatures s;
    s.split = stratified_split(p.labels, split_ratio, seed);
    std::vector<TokenSequence> docs;
    for (auto i : s.split.first) {
        docs.push_back(p.news_tokens[i]);
        for (const auto& c : p.comment_tokens[i]) docs.push_back(c);
    }
    s.idf = IdfTable::fit(docs, dim);
    for (std::size_t i = 0; i < p.news_tokens.size(); ++i) {
        s.news.push_back(encode_news(p.news_tokens[i], s.idf));
        s.comments.push_back(encode_comments(p.comment_tokens[i], s.idf));
    }
    return s;
}

inline SparseVector matrix_row(const InteractionMatrix& m, std::size_t i)
{
    SparseVector v;
    v.dim = m.cols();
    auto cols = m.row_cols(i);
    auto vals = m.row_vals(i);
    v.index.assign(cols.begin(), cols.end());
    v.value.assign(vals.begin(), vals.end());
    return v;
}

/// The interaction matrix a condition feeds to the model (empty for text_only).
inline InteractionMatrix condition_matrix(const PreparedCorpus& p, const SeedFeatures& s, Condition c, double alpha,
                                          const PipelineSettings& settings)
{
    if (c != Condition::edge_reweight) return p.binary;
    WeightVector wv{p.omega, 1.0, alpha};
    if (settings.norm_scope == NormScope::train) {
        wv = wv.normalized_over(s.split.first, settings.norm_kind);
    } else {
        wv.norm = omega_norm(wv.omega, settings.norm_kind);
    }
    return edge_reweight(p.binary, wv);
}

inline TrainingSet make_training_set(const PreparedCorpus& p, const SeedFeatures& s, const InteractionMatrix& m,
                                     Condition c, const std::vector<std::size_t>& indices)
{
    TrainingSet t;
    t.text_dim = s.idf.dim();
    t.users = m.cols();
    for (auto i : indices) {
        FeatureRow row{s.news[i], s.comments[i], {}};
        if (c == Condition::text_only) {
            row.un.dim = m.cols();
        } else {
            row.un = matrix_row(m, i);
        }
        t.rows.push_back(std::move(row));
        t.labels.push_back(p.labels[i]);
        t.omega.push_back(p.omega[i]);
    }
    return t;
}

inline TrainConfig condition_config(TrainConfig cfg, Condition c, double alpha, std::uint64_t seed)
{
    cfg.seed = seed;
    cfg.alpha = uses_alpha(c) ? alpha : 0.0;
    switch (c) {
    case Condition::text_only:
    case Condition::binary_un: cfg.mode = TrainMode::binary_un; break;
    case Condition::edge_reweight: cfg.mode = TrainMode::edge_reweight; break;
    case Condition::sample_reweight: cfg.mode = TrainMode::sample_reweight; break;
    }
    return cfg;
}

struct CellOutcome {
    TrainResult trained;
    double test_accuracy = 0.0;
};

inline CellOutcome run_cell(const PreparedCorpus& p, const SeedFeatures& s, Condition c, double alpha,
                            std::uint64_t seed, const PipelineSettings& settings)
{
    const auto m = condition_matrix(p, s, c, alpha, settings);
    const auto train_set = make_training_set(p, s, m, c, s.split.first);
    const auto test_set = make_training_set(p, s, m, c, s.split.second);
    auto cfg = condition_config(settings.train, c, alpha, seed);
    cfg.norm_kind = settings.norm_kind;
    CellOutcome out;
    out.trained = train(train_set, cfg);
    out.test_accuracy = evaluate(out.trained.params, test_set.rows, test_set.labels);
    return out;
}

struct ResultRow {
    Condition condition = Condition::binary_un;
    double alpha = 0.0;
    std::vector<double> accuracies;  // one per seed, grid seed order
    double mean = 0.0;
    double std = 0.0;
    std::optional<double> gain;  // mean - mean(binary_un)
};

struct ResultTable {
    std::vector<std::uint64_t> seeds;
    std::vector<ResultRow> rows;

    const ResultRow* find(Condition c, double alpha) const
    {
        for (const auto& r : rows) {
            if (r.condition == c && (!uses_alpha(c) || r.alpha == alpha)) return &r;
        }
        return nullptr;
    }
};

/// Sample standard deviation (n - 1); 0 for a single value.
inline double mean_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v)
{
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline void finalize_table(ResultTable& t)
{
    for (auto& r : t.rows) {
        r.mean = mean_of(r.accuracies);
        r.std = std_of(r.accuracies);
    }
    const ResultRow* base = t.find(Condition::binary_un, 0.0);
    for (auto& r : t.rows) {
        if (base) r.gain = r.mean - base->mean;
    }
}

/// Trains and evaluates every (condition, alpha, seed) cell. Alpha-free conditions
/// (text_only, binary_un) run once per seed and are reported with alpha 0.
inline ResultTable run_grid(const Corpus& corpus, const ExperimentGrid& grid, const PipelineSettings& settings)
{
    grid.validate();
    const auto prepared = prepare_corpus(corpus, settings);

    ResultTable table;
    table.seeds = grid.seeds;
    for (auto c : all_conditions) {
        if (std::find(grid.conditions.begin(), grid.conditions.end(), c) == grid.conditions.end()) continue;
        if (uses_alpha(c)) {
            for (double a : grid.alphas) table.rows.push_back({c, a, {}, 0.0, 0.0, std::nullopt});
        } else {
            table.rows.push_back({c, 0.0, {}, 0.0, 0.0, std::nullopt});
        }
    }

    for (auto seed : grid.seeds) {
        const auto features = prepare_seed(prepared, grid.split_ratio, seed, settings.encoder_dim);
        for (auto& row : table.rows) {
            row.accuracies.push_back(run_cell(prepared, features, row.condition, row.alpha, seed, settings).test_accuracy);
        }
    }
    finalize_table(table);
    return table;
}

inline std::string result_csv(const ResultTable& t)
{
    std::string out = "condition,alpha,seed_count,mean_acc,std_acc,gain_vs_binary_un\n";
    for (const auto& r : t.rows) {
        out += fmt::format("{},{},{},{:.6f},{:.6f},{}\n", to_string(r.condition), r.alpha, r.accuracies.size(), r.mean,
                           r.std, r.gain ? fmt::format("{:.6f}", *r.gain) : std::string());
    }
    return out;
}

inline std::string cells_csv(const ResultTable& t)
{
    std::string out = "condition,alpha,seed,accuracy\n";
    for (const auto& r : t.rows) {
        for (std::size_t k = 0; k < r.accuracies.size(); ++k) {
            out += fmt::format("{},{},{},{:.6f}\n", to_string(r.condition), r.alpha, t.seeds[k], r.accuracies[k]);
        }
    }
    return out;
}

/// Summary rows read back from result_csv (per-seed accuracies are not kept there).
struct SummaryRow {
    std::string condition;
    double alpha = 0.0;
    std::size_t seed_count = 0;
    double mean = 0.0;
    double std = 0.0;
    std::optional<double> gain;
};

inline std::vector<SummaryRow> read_result_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "cannot open result table");
    std::string line;
    std::size_t lineno = 0;
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            if (line.rfind("condition,alpha", 0) != 0) throw ParseError(path.string(), 1, "unexpected header");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 6) throw ParseError(path.string(), lineno, "expected 6 columns");
        try {
            SummaryRow r{f[0], std::stod(f[1]), std::stoul(f[2]), std::stod(f[3]), std::stod(f[4]), std::nullopt};
            if (!f[5].empty()) r.gain = std::stod(f[5]);
            rows.push_back(std::move(r));
        } catch (const std::exception&) {
            throw ParseError(path.string(), lineno, "non-numeric cell");
        }
    }
    return rows;
}

/// Text table with one line per alpha and a "mean ± std" cell per condition (percent).
inline std::string render_table(const std::vector<SummaryRow>& rows)
{
    std::vector<std::string> conds;
    std::vector<double> alphas;
    for (const auto& r : rows) {
        if (std::find(conds.begin(), conds.end(), r.condition) == conds.end()) conds.push_back(r.condition);
        if (uses_alpha(parse_condition(r.condition)) && std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) {
            alphas.push_back(r.alpha);
        }
    }
    if (alphas.empty()) alphas.push_back(0.0);
    auto lookup = [&](const std::string& c, double a) -> const SummaryRow* {
        for (const auto& r : rows) {
            if (r.condition == c && (!uses_alpha(parse_condition(c)) || r.alpha == a)) return &r;
        }
        return nullptr;
    };

    std::string out = fmt::format("{:<8}", "alpha");
    for (const auto& c : conds) out += fmt::format(" | {:^17}", c);
    out += "\n" + std::string(8 + conds.size() * 20, '-') + "\n";
    for (double a : alphas) {
        out += fmt::format("{:<8}", a);
        for (const auto& c : conds) {
            const auto* r = lookup(c, a);
            out += r ? fmt::format(" | {:>7.2f} ± {:<7.2f}", 100.0 * r->mean, 100.0 * r->std) : fmt::format(" | {:^17}", "-");
        }
        out += "\n";
        out += fmt::format("{:<8}", "  gain");
        for (const auto& c : conds) {
            const auto* r = lookup(c, a);
            out += (r && r->gain) ? fmt::format(" | {:>+7.2f}          ", 100.0 * *r->gain) : fmt::format(" | {:^17}", "");
        }
        out += "\n";
    }
    return out;
}

inline std::vector<SummaryRow> summary_rows(const ResultTable& t)
{
    std::vector<SummaryRow> out;
    for (const auto& r : t.rows) {
        out.push_back({std::string(to_string(r.condition)), r.alpha, r.accuracies.size(), r.mean, r.std, r.gain});
    }
    return out;
}

struct TernaryExport {
    std::size_t rows_written = 0;
    std::size_t excluded = 0;
};

/// Per-news group composition as CSV; news without interactions are excluded and counted
/// in a trailing comment line.
inline TernaryExport export_ternary(const Corpus& corpus, const std::vector<ParticipationProfile>& profiles,
                                    const std::filesystem::path& out_path)
{
    const auto m = build_interaction_matrix(corpus);
    const auto groups = column_groups(m, profiles);
    auto out = jsonl::open_out(out_path);
    out << "news_id,frac_lurker,frac_engager,frac_contributor,label\n";
    TernaryExport r;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto c = group_composition(m, i, groups);
        if (!c) {
            ++r.excluded;
            continue;
        }
        out << fmt::format("{},{},{},{},{}\n", m.row_ids[i], c->frac_lurker(), c->frac_engager(), c->frac_contributor(),
                           corpus.news[i].label);
        ++r.rows_written;
    }
    out << "# excluded_undefined=" << r.excluded << '\n';
    return r;
}

}  // namespace echoweight
