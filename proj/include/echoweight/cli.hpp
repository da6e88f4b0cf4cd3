#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "echoweight/config.hpp"
#include "echoweight/corpus.hpp"
#include "echoweight/eval.hpp"
#include "echoweight/participation.hpp"
#include "echoweight/stats.hpp"
#include "echoweight/synth.hpp"
#include "echoweight/weighting.hpp"

namespace echoweight::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, runtime_failure = 2 };

struct Options {
    std::string command;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string data;
    std::optional<double> alpha;
    std::string results;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    auto out = jsonl::open_out(path);
    out << text;
}

class Runner {
public:
    Runner(const Options& opts, std::ostream& out) : opts_(opts), out_(out)
    {
        if (!opts.config.empty()) rc_ = load_run_config(opts.config);
        if (opts.seed) {
            rc_.seed = *opts.seed;
            rc_.grid.seeds = {*opts.seed};
        }
        if (opts.alpha) rc_.alpha = *opts.alpha;
        if (!opts.data.empty()) rc_.corpus = CorpusPaths::in_directory(opts.data);
        rc_.resolve();
        dir_ = opts.out.empty() ? std::filesystem::path("runs") / opts.command : std::filesystem::path(opts.out);
    }

    int run()
    {
        const auto& c = opts_.command;
        if (c == "ingest") return ingest();
        if (c == "profile") return profile();
        if (c == "weigh") return weigh();
        if (c == "synth") return synth();
        if (c == "train") return train_one();
        if (c == "grid") return grid();
        if (c == "report") return report();
        throw ValidationError("unknown subcommand '" + c + "'");
    }

private:
    LoadedCorpus corpus() const
    {
        if (!rc_.corpus) throw ValidationError("no corpus configured (set corpus.dir in the config or pass --data)");
        return load_corpus(*rc_.corpus);
    }

    void write_resolved_config() const { write_text(dir_ / "resolved_config.json", to_json(rc_).dump(2) + "\n"); }

    int ingest()
    {
        const auto loaded = corpus();
        const auto profiles = compute_profiles(loaded.corpus, rc_.pipeline.thresholds);
        auto j = corpus_stats(loaded.corpus, profiles).to_json();
        j["load"] = {{"dropped_events", loaded.report.dropped_events},
                     {"duplicate_events", loaded.report.duplicate_events}};
        out_ << j.dump(2) << '\n';
        if (!opts_.out.empty()) {
            write_text(dir_ / "stats.json", j.dump(2) + "\n");
            write_resolved_config();
        }
        return ok;
    }

    int profile()
    {
        const auto loaded = corpus();
        const auto profiles = compute_profiles(loaded.corpus, rc_.pipeline.thresholds);
        write_profiles(profiles, dir_ / "profiles.jsonl");
        const auto t = export_ternary(loaded.corpus, profiles, dir_ / "ternary.csv");
        write_resolved_config();
        out_ << fmt::format("profiles: {}\nternary rows: {} (excluded {})\n", profiles.size(), t.rows_written, t.excluded);
        return ok;
    }

    int weigh()
    {
        const auto loaded = corpus();
        const auto profiles = compute_profiles(loaded.corpus, rc_.pipeline.thresholds);
        const auto m = build_interaction_matrix(loaded.corpus);
        const auto wv = weight_vector(m, profiles, rc_.pipeline.coefficients, rc_.alpha, rc_.pipeline.norm_kind);
        const auto weighted = edge_reweight(m, wv);

        std::string omega_csv = "news_id,omega,factor\n";
        out_ << fmt::format("# norm={:.10g} alpha={} norm_kind={}\n", wv.norm, wv.alpha, to_string(rc_.pipeline.norm_kind));
        for (std::size_t i = 0; i < m.rows(); ++i) {
            omega_csv += fmt::format("{},{:.10g},{:.10g}\n", m.row_ids[i], wv.omega[i], wv.factor(i));
            out_ << fmt::format("{} omega={:.10g} factor={:.10g}\n", m.row_ids[i], wv.omega[i], wv.factor(i));
        }
        write_text(dir_ / "omega.csv", omega_csv);

        std::string triplets = "news_id,user_id,weight\n";
        for (std::size_t i = 0; i < weighted.rows(); ++i) {
            auto cols = weighted.row_cols(i);
            auto vals = weighted.row_vals(i);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                triplets += fmt::format("{},{},{:.10g}\n", weighted.row_ids[i], weighted.col_ids[cols[k]], vals[k]);
            }
        }
        write_text(dir_ / "weighted_matrix.csv", triplets);
        write_resolved_config();
        return ok;
    }

    int synth()
    {
        const auto s = generate(rc_.synth);
        write_synth(s, dir_);
        write_resolved_config();
        out_ << fmt::format("news: {}  users: {}  interactions: {}  comments: {}\n", s.corpus.news.size(),
                            s.corpus.users.size(), s.corpus.events.size(), s.truth.comments);
        return ok;
    }

    int train_one()
    {
        const auto loaded = corpus();
        const auto& settings = rc_.pipeline;
        const auto prepared = prepare_corpus(loaded.corpus, settings);
        const auto features = prepare_seed(prepared, rc_.grid.split_ratio, rc_.seed, settings.encoder_dim);
        Condition c = Condition::binary_un;
        if (settings.train.mode == TrainMode::edge_reweight) c = Condition::edge_reweight;
        if (settings.train.mode == TrainMode::sample_reweight) c = Condition::sample_reweight;
        const auto cell = run_cell(prepared, features, c, rc_.alpha, rc_.seed, settings);

        jsonl::json header{{"config", to_json(rc_)}, {"seed", rc_.seed}, {"mode", to_string(settings.train.mode)}};
        save_checkpoint(cell.trained.params, header, dir_ / "model.ckpt");
        write_train_log(cell.trained.log, dir_ / "train_log.csv");
        write_text(dir_ / "idf.json", features.idf.to_json().dump() + "\n");
        const jsonl::json metrics{{"test_accuracy", cell.test_accuracy},
                                  {"best_epoch", cell.trained.best_epoch},
                                  {"epochs_run", cell.trained.log.size()},
                                  {"train_size", features.split.first.size()},
                                  {"test_size", features.split.second.size()}};
        write_text(dir_ / "metrics.json", metrics.dump(2) + "\n");
        write_resolved_config();
        out_ << fmt::format("mode={} alpha={} test_accuracy={:.4f} best_epoch={}\n", to_string(settings.train.mode),
                            rc_.alpha, cell.test_accuracy, cell.trained.best_epoch);
        return ok;
    }

    int grid()
    {
        const auto loaded = corpus();
        const auto table = run_grid(loaded.corpus, rc_.grid, rc_.pipeline);
        write_text(dir_ / "results.csv", result_csv(table));
        write_text(dir_ / "cells.csv", cells_csv(table));
        const auto rendered = render_table(summary_rows(table));
        write_text(dir_ / "results.txt", rendered);
        write_resolved_config();
        out_ << rendered;
        return ok;
    }

    int report()
    {
        const std::filesystem::path path = opts_.results.empty() ? dir_ / "results.csv" : std::filesystem::path(opts_.results);
        out_ << render_table(read_result_csv(path));
        return ok;
    }

    Options opts_;
    std::ostream& out_;
    RunConfig rc_;
    std::filesystem::path dir_;
};

}  // namespace detail

/// Entry point shared by the echoweight binary and the in-process tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"echoweight: participation-aware fake news detection"};
    app.require_subcommand(1);
    Options opts;

    struct Spec {
        const char* name;
        const char* help;
    };
    const Spec specs[] = {
        {"ingest", "validate a corpus and print dataset statistics"},
        {"profile", "write participation profiles and ternary composition CSV"},
        {"weigh", "emit silent-user weights and the edge re-weighted matrix"},
        {"synth", "generate a synthetic corpus"},
        {"train", "train and evaluate one condition"},
        {"grid", "run the full experiment grid"},
        {"report", "render a result table CSV"},
    };
    for (const auto& s : specs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", opts.config, "JSON run configuration");
        sub->add_option("--seed", opts.seed, "override the configured seed(s)");
        sub->add_option("--out", opts.out, "output directory");
        sub->add_option("--data", opts.data, "corpus directory (overrides corpus paths)");
        sub->add_option("--alpha", opts.alpha, "override weighting.alpha");
        if (std::string(s.name) == "report") sub->add_option("--results", opts.results, "results.csv to render");
        sub->callback([&opts, name = s.name] { opts.command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (app.exit(e, out, err) == 0) return ok;
        err << app.help();
        return validation_failure;
    }

    try {
        detail::Runner runner(opts, out);
        return runner.run();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return validation_failure;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return validation_failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return runtime_failure;
    }
}

}  // namespace echoweight::cli
