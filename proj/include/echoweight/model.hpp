#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "echoweight/encode.hpp"
#include "echoweight/error.hpp"
#include "echoweight/random.hpp"
#include "echoweight/split.hpp"
#include "echoweight/weighting.hpp"

namespace echoweight {

/// One classifier input: news text, aggregated comments and the news's row of the
/// (binary or re-weighted) interaction matrix.
struct FeatureRow {
    EmbeddingVector news;
    EmbeddingVector comments;
    SparseVector un;
};

/// Network dimensions. un_hidden = 0 feeds the raw interaction row to the fusion input;
/// fusion_hidden = 0 connects the fusion input straight to the output (logistic regression).
struct ModelShape {
    std::size_t text_dim = 0;
    std::size_t users = 0;
    std::size_t un_hidden = 32;
    std::size_t fusion_hidden = 64;

    std::size_t un_width() const { return un_hidden > 0 ? un_hidden : users; }
    std::size_t fusion_input() const { return un_width() + 2 * text_dim; }

    bool operator==(const ModelShape&) const = default;
};

struct LayerSlice {
    std::string_view name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// Offsets into the flat parameter vector. Weight matrices are stored input-major
/// (row j holds the fan-out of input j) so sparse inputs touch contiguous memory.
struct ParamLayout {
    explicit ParamLayout(const ModelShape& s)
    {
        std::size_t at = 0;
        auto next = [&at](std::size_t n) {
            const auto o = at;
            at += n;
            return o;
        };
        un_w = next(s.users * s.un_hidden);
        un_b = next(s.un_hidden);
        fusion_w = next(s.fusion_input() * s.fusion_hidden);
        fusion_b = next(s.fusion_hidden);
        out_w = next(s.fusion_hidden > 0 ? s.fusion_hidden : s.fusion_input());
        out_b = next(1);
        total = at;
    }

    std::vector<LayerSlice> layers() const
    {
        return {{"un_weight", un_w, un_b - un_w},
                {"un_bias", un_b, fusion_w - un_b},
                {"fusion_weight", fusion_w, fusion_b - fusion_w},
                {"fusion_bias", fusion_b, out_w - fusion_b},
                {"output_weight", out_w, out_b - out_w},
                {"output_bias", out_b, 1}};
    }

    std::size_t un_w, un_b, fusion_w, fusion_b, out_w, out_b, total;
};

struct ModelParams {
    ModelShape shape;
    std::vector<double> theta;

    ModelParams() = default;
    explicit ModelParams(const ModelShape& s) : shape(s), theta(ParamLayout(s).total, 0.0) {}

    ParamLayout layout() const { return ParamLayout(shape); }

    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, weights then bias.
    static ModelParams initialize(const ModelShape& s, Rng& rng)
    {
        ModelParams p(s);
        const ParamLayout l(s);
        auto fill = [&](std::size_t from, std::size_t to, std::size_t fan_in) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
            for (std::size_t k = from; k < to; ++k) p.theta[k] = rng.uniform(-bound, bound);
        };
        fill(l.un_w, l.fusion_w, s.users);
        fill(l.fusion_w, l.out_w, s.fusion_input());
        fill(l.out_w, l.total, s.fusion_hidden > 0 ? s.fusion_hidden : s.fusion_input());
        return p;
    }

    bool operator==(const ModelParams&) const = default;
};

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
    std::vector<double> un_pre;
    std::vector<double> un_act;
    std::vector<double> fusion_pre;
    std::vector<double> fusion_act;
    double logit = 0.0;
    double probability = 0.5;  // clamped to [eps, 1 - eps]
    bool clamped = false;
};

namespace detail {

inline void check_row(const FeatureRow& row, const ModelShape& s)
{
    if (row.news.dim != s.text_dim || row.comments.dim != s.text_dim) {
        throw ContractError(fmt::format("text feature dim {} / {} does not match model dim {}", row.news.dim,
                                        row.comments.dim, s.text_dim));
    }
    if (row.un.dim != s.users) {
        throw ContractError(fmt::format("interaction row width {} does not match model users {}", row.un.dim, s.users));
    }
}

/// Visits every nonzero fusion input (index, value): UN part, then news, then comments.
template <class Fn>
void for_each_fusion_input(const FeatureRow& row, const ModelShape& s, const ForwardCache& c, Fn&& fn)
{
    if (s.un_hidden > 0) {
        for (std::size_t j = 0; j < s.un_hidden; ++j) {
            if (c.un_act[j] != 0.0) fn(j, c.un_act[j]);
        }
    } else {
        for (std::size_t k = 0; k < row.un.nnz(); ++k) fn(static_cast<std::size_t>(row.un.index[k]), row.un.value[k]);
    }
    const std::size_t base = s.un_width();
    for (std::size_t k = 0; k < row.news.nnz(); ++k) fn(base + row.news.index[k], row.news.value[k]);
    for (std::size_t k = 0; k < row.comments.nnz(); ++k) {
        fn(base + s.text_dim + row.comments.index[k], row.comments.value[k]);
    }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace detail

inline ForwardCache forward_cached(const FeatureRow& row, const ModelParams& params)
{
    const auto& s = params.shape;
    detail::check_row(row, s);
    const ParamLayout l(s);
    const double* th = params.theta.data();
    ForwardCache c;

    if (s.un_hidden > 0) {
        c.un_pre.assign(th + l.un_b, th + l.un_b + s.un_hidden);
        for (std::size_t k = 0; k < row.un.nnz(); ++k) {
            const double v = row.un.value[k];
            const double* w = th + l.un_w + static_cast<std::size_t>(row.un.index[k]) * s.un_hidden;
            for (std::size_t h = 0; h < s.un_hidden; ++h) c.un_pre[h] += v * w[h];
        }
        c.un_act.resize(s.un_hidden);
        for (std::size_t h = 0; h < s.un_hidden; ++h) c.un_act[h] = std::max(c.un_pre[h], 0.0);  // keeps NaN visible
    }

    if (s.fusion_hidden > 0) {
        c.fusion_pre.assign(th + l.fusion_b, th + l.fusion_b + s.fusion_hidden);
        detail::for_each_fusion_input(row, s, c, [&](std::size_t j, double v) {
            const double* w = th + l.fusion_w + j * s.fusion_hidden;
            for (std::size_t h = 0; h < s.fusion_hidden; ++h) c.fusion_pre[h] += v * w[h];
        });
        c.fusion_act.resize(s.fusion_hidden);
        c.logit = th[l.out_b];
        for (std::size_t h = 0; h < s.fusion_hidden; ++h) {
            c.fusion_act[h] = std::max(c.fusion_pre[h], 0.0);
            c.logit += th[l.out_w + h] * c.fusion_act[h];
        }
    } else {
        c.logit = th[l.out_b];
        detail::for_each_fusion_input(row, s, c, [&](std::size_t j, double v) { c.logit += th[l.out_w + j] * v; });
    }

    const double p = detail::sigmoid(c.logit);
    c.probability = clamp_probability(p);
    c.clamped = c.probability != p;
    return c;
}

inline double forward(const FeatureRow& row, const ModelParams& params) { return forward_cached(row, params).probability; }

/// Adds d(loss)/d(theta) for one sample to `grad`, where d(loss)/d(logit) = dlogit.
inline void backward(const FeatureRow& row, const ModelParams& params, const ForwardCache& c, double dlogit,
                     std::vector<double>& grad)
{
    const auto& s = params.shape;
    const ParamLayout l(s);
    const double* th = params.theta.data();
    double* g = grad.data();

    g[l.out_b] += dlogit;
    std::vector<double> d_un_act;
    if (s.un_hidden > 0) d_un_act.assign(s.un_hidden, 0.0);

    if (s.fusion_hidden > 0) {
        std::vector<double> d_pre(s.fusion_hidden);
        for (std::size_t h = 0; h < s.fusion_hidden; ++h) {
            g[l.out_w + h] += dlogit * c.fusion_act[h];
            d_pre[h] = c.fusion_pre[h] > 0.0 ? dlogit * th[l.out_w + h] : 0.0;
            g[l.fusion_b + h] += d_pre[h];
        }
        detail::for_each_fusion_input(row, s, c, [&](std::size_t j, double v) {
            double* gw = g + l.fusion_w + j * s.fusion_hidden;
            for (std::size_t h = 0; h < s.fusion_hidden; ++h) gw[h] += v * d_pre[h];
        });
        for (std::size_t j = 0; j < (s.un_hidden > 0 ? s.un_hidden : 0); ++j) {
            const double* w = th + l.fusion_w + j * s.fusion_hidden;
            double acc = 0.0;
            for (std::size_t h = 0; h < s.fusion_hidden; ++h) acc += w[h] * d_pre[h];
            d_un_act[j] = acc;
        }
    } else {
        detail::for_each_fusion_input(row, s, c, [&](std::size_t j, double v) { g[l.out_w + j] += dlogit * v; });
        for (std::size_t j = 0; j < (s.un_hidden > 0 ? s.un_hidden : 0); ++j) d_un_act[j] = dlogit * th[l.out_w + j];
    }

    if (s.un_hidden > 0) {
        std::vector<double> d_pre(s.un_hidden);
        for (std::size_t h = 0; h < s.un_hidden; ++h) {
            d_pre[h] = c.un_pre[h] > 0.0 ? d_un_act[h] : 0.0;
            g[l.un_b + h] += d_pre[h];
        }
        for (std::size_t k = 0; k < row.un.nnz(); ++k) {
            const double v = row.un.value[k];
            double* gw = g + l.un_w + static_cast<std::size_t>(row.un.index[k]) * s.un_hidden;
            for (std::size_t h = 0; h < s.un_hidden; ++h) gw[h] += v * d_pre[h];
        }
    }
}

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Balanced loss of a batch and its exact gradient. The loss is piecewise: where the
/// probability is clamped the loss is flat, so those samples contribute no gradient.
inline LossAndGradient gradients(std::span<const FeatureRow* const> batch, std::span<const int> labels,
                                 const ModelParams& params, std::span<const double> factors)
{
    if (batch.size() != labels.size() || batch.size() != factors.size()) {
        throw ContractError("gradients: batch, labels and factors differ in length");
    }
    if (batch.empty()) throw ContractError("gradients: empty batch");
    LossAndGradient out;
    out.grad.assign(params.theta.size(), 0.0);
    const double m = static_cast<double>(batch.size());
    double ce_sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto c = forward_cached(*batch[i], params);
        ce_sum += factors[i] * ce_loss(labels[i], c.probability);
        if (c.clamped) continue;
        const double dlogit = factors[i] / m * (c.probability - static_cast<double>(labels[i]));
        backward(*batch[i], params, c, dlogit, out.grad);
    }
    out.loss = -ce_sum / m;
    return out;
}

inline LossAndGradient gradients(std::span<const FeatureRow> batch, std::span<const int> labels,
                                 const ModelParams& params, std::span<const double> factors)
{
    std::vector<const FeatureRow*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& r : batch) ptrs.push_back(&r);
    return gradients(std::span<const FeatureRow* const>(ptrs), labels, params, factors);
}

/// Balanced loss only (no gradient); used by finite-difference checks.
inline double batch_loss(std::span<const FeatureRow> batch, std::span<const int> labels, const ModelParams& params,
                         std::span<const double> factors)
{
    std::vector<double> p;
    p.reserve(batch.size());
    for (const auto& r : batch) p.push_back(forward(r, params));
    return balanced_loss(labels, p, factors);
}

/// Fraction of samples whose thresholded prediction (p >= 0.5 -> 1) equals the label.
inline double evaluate(const ModelParams& params, std::span<const FeatureRow> rows, std::span<const int> labels)
{
    if (rows.size() != labels.size()) throw ContractError("evaluate: rows and labels differ in length");
    if (rows.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int pred = forward(rows[i], params) >= 0.5 ? 1 : 0;
        correct += pred == labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

enum class TrainMode { binary_un, edge_reweight, sample_reweight };

inline std::string_view to_string(TrainMode m)
{
    switch (m) {
    case TrainMode::binary_un: return "binary_un";
    case TrainMode::edge_reweight: return "edge_reweight";
    case TrainMode::sample_reweight: return "sample_reweight";
    }
    return "?";
}

inline TrainMode parse_train_mode(std::string_view s)
{
    if (s == "binary_un") return TrainMode::binary_un;
    if (s == "edge_reweight") return TrainMode::edge_reweight;
    if (s == "sample_reweight") return TrainMode::sample_reweight;
    throw ValidationError("unknown train mode '" + std::string(s) + "'");
}

struct TrainConfig {
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    double learning_rate = 0.05;
    double alpha = 0.0;
    TrainMode mode = TrainMode::binary_un;
    std::size_t early_stop_patience = 20;
    std::uint64_t seed = 0;
    std::size_t un_hidden = 32;
    std::size_t fusion_hidden = 64;
    double validation_fraction = 0.15;
    NormKind norm_kind = NormKind::l2;

    void validate() const
    {
        if (epochs == 0) throw ValidationError("epochs must be positive");
        if (batch_size == 0) throw ValidationError("batch_size must be positive");
        if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
        if (!(alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
        if (early_stop_patience == 0) throw ValidationError("early_stop_patience must be positive");
        if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
            throw ValidationError("validation_fraction must lie in [0, 1)");
        }
    }
};

/// Training inputs. `omega` holds each sample's silent-user weight, used for batch factors
/// in sample_reweight mode. The `un` part of each row must already be the matrix variant
/// that matches the mode.
struct TrainingSet {
    std::size_t text_dim = 0;
    std::size_t users = 0;
    std::vector<FeatureRow> rows;
    std::vector<int> labels;
    std::vector<double> omega;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
    double mean_batch_factor = 1.0;

    bool operator==(const EpochLog&) const = default;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochLog> log;
    std::size_t best_epoch = 0;
};

/// Minibatch SGD on the balanced loss with early stopping on a held-out slice of the
/// training set. Returns the parameters of the best validation epoch.
inline TrainResult train(const TrainingSet& data, const TrainConfig& cfg)
{
    cfg.validate();
    const std::size_t n = data.rows.size();
    if (n == 0) throw TrainingError("empty training set");
    if (data.labels.size() != n || data.omega.size() != n) {
        throw ContractError("training set rows, labels and omega differ in length");
    }

    const ModelShape shape{data.text_dim, data.users, cfg.un_hidden, cfg.fusion_hidden};
    Rng rng(cfg.seed);
    TrainResult result;
    ModelParams params = ModelParams::initialize(shape, rng);

    std::vector<std::size_t> fit_idx, val_idx;
    bool both_labels = false;
    for (int y : data.labels) both_labels |= y != data.labels.front();
    if (cfg.validation_fraction > 0.0 && both_labels && n >= 4) {
        auto s = stratified_split(data.labels, 1.0 - cfg.validation_fraction, rng.next());
        fit_idx = std::move(s.first);
        val_idx = std::move(s.second);
    } else {
        for (std::size_t i = 0; i < n; ++i) fit_idx.push_back(i);
    }
    const auto& monitor = val_idx.empty() ? fit_idx : val_idx;
    std::vector<FeatureRow> monitor_rows;
    std::vector<int> monitor_labels;
    for (auto i : monitor) {
        monitor_rows.push_back(data.rows[i]);
        monitor_labels.push_back(data.labels[i]);
    }

    double best_acc = -1.0;
    std::size_t since_best = 0;
    std::vector<std::size_t> order = fit_idx;
    std::vector<const FeatureRow*> batch;
    std::vector<int> batch_labels;
    std::vector<double> batch_omega;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0, factor_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            batch_labels.clear();
            batch_omega.clear();
            for (std::size_t k = start; k < end; ++k) {
                batch.push_back(&data.rows[order[k]]);
                batch_labels.push_back(data.labels[order[k]]);
                batch_omega.push_back(data.omega[order[k]]);
            }
            std::vector<double> factors(batch.size(), 1.0);
            if (cfg.mode == TrainMode::sample_reweight) factors = batch_factors(batch_omega, cfg.alpha, cfg.norm_kind);

            auto lg = gradients(std::span<const FeatureRow* const>(batch), batch_labels, params, factors);
            if (!std::isfinite(lg.loss)) {
                throw TrainingError(fmt::format("non-finite loss at epoch {} batch {}", epoch, batches));
            }
            for (std::size_t k = 0; k < params.theta.size(); ++k) params.theta[k] -= cfg.learning_rate * lg.grad[k];
            loss_sum += lg.loss;
            for (double f : factors) factor_sum += f;
            ++batches;
        }

        const double acc = evaluate(params, monitor_rows, monitor_labels);
        result.log.push_back({epoch, loss_sum / static_cast<double>(batches), acc,
                              factor_sum / static_cast<double>(order.size())});
        if (acc > best_acc) {
            best_acc = acc;
            result.params = params;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.early_stop_patience) {
            break;
        }
    }
    return result;
}

inline void write_train_log(const std::vector<EpochLog>& log, const std::filesystem::path& path)
{
    auto out = jsonl::open_out(path);
    out << "epoch,train_loss,val_accuracy,mean_batch_factor\n";
    for (const auto& e : log) {
        out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", e.epoch, e.train_loss, e.val_accuracy, e.mean_batch_factor);
    }
}

/// Checkpoint: one JSON header line, then the parameters as little-endian float64 in
/// layout order.
inline void save_checkpoint(const ModelParams& params, const jsonl::json& extra_header, const std::filesystem::path& path)
{
    const auto layout = params.layout();
    jsonl::json layers = jsonl::json::array();
    for (const auto& s : layout.layers()) layers.push_back({{"name", s.name}, {"offset", s.offset}, {"size", s.size}});
    jsonl::json header = extra_header;
    header["format"] = "echoweight-checkpoint-v1";
    header["shape"] = {{"text_dim", params.shape.text_dim},
                       {"users", params.shape.users},
                       {"un_hidden", params.shape.un_hidden},
                       {"fusion_hidden", params.shape.fusion_hidden}};
    header["layers"] = layers;
    header["count"] = params.theta.size();

    auto out = jsonl::open_out(path);
    out << header.dump() << '\n';
    for (double v : params.theta) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
}

struct Checkpoint {
    jsonl::json header;
    ModelParams params;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open checkpoint");
    std::string line;
    std::getline(in, line);
    Checkpoint cp;
    try {
        cp.header = jsonl::json::parse(line);
    } catch (const jsonl::json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    const auto& sh = cp.header.at("shape");
    const ModelShape shape{sh.at("text_dim").get<std::size_t>(), sh.at("users").get<std::size_t>(),
                           sh.at("un_hidden").get<std::size_t>(), sh.at("fusion_hidden").get<std::size_t>()};
    cp.params = ModelParams(shape);
    if (cp.header.at("count").get<std::size_t>() != cp.params.theta.size()) {
        throw ParseError(path.string(), 1, "parameter count does not match shape");
    }
    for (double& v : cp.params.theta) {
        char bytes[8];
        if (!in.read(bytes, 8)) throw ParseError(path.string(), 2, "truncated parameter payload");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        v = std::bit_cast<double>(bits);
    }
    return cp;
}

}  // namespace echoweight
