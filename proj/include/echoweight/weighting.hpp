#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echoweight/corpus.hpp"
#include "echoweight/error.hpp"
#include "echoweight/participation.hpp"

namespace echoweight {

struct GroupCounts {
    std::size_t lurkers = 0;
    std::size_t engagers = 0;
    std::size_t contributors = 0;

    bool operator==(const GroupCounts&) const = default;
};

/// Per-group multipliers of the silent-user weight (90-9-1 defaults).
struct GroupCoefficients {
    double lurker = 0.9;
    double engager = 0.09;
    double contributor = 0.01;

    void validate() const
    {
        if (!(lurker >= 0.0 && engager >= 0.0 && contributor >= 0.0)) {
            throw ValidationError("group coefficients must be >= 0");
        }
    }
};

enum class NormKind { l2, l1, max };

inline std::string_view to_string(NormKind k)
{
    switch (k) {
    case NormKind::l2: return "l2";
    case NormKind::l1: return "l1";
    case NormKind::max: return "max";
    }
    return "?";
}

inline NormKind parse_norm_kind(std::string_view s)
{
    if (s == "l2") return NormKind::l2;
    if (s == "l1") return NormKind::l1;
    if (s == "max") return NormKind::max;
    throw ValidationError("unknown norm_kind '" + std::string(s) + "' (expected l2, l1 or max)");
}

/// Silent-user weight of one news item: the group counts of its interacting users combined
/// with the group coefficients.
inline double news_weight(const GroupCounts& counts, const GroupCoefficients& coeffs = {})
{
    return coeffs.lurker * static_cast<double>(counts.lurkers) +
           coeffs.engager * static_cast<double>(counts.engagers) +
           coeffs.contributor * static_cast<double>(counts.contributors);
}

inline GroupCounts row_group_counts(const InteractionMatrix& matrix, std::size_t row,
                                    const std::vector<UserGroup>& groups)
{
    GroupCounts c;
    for (auto j : matrix.row_cols(row)) {
        switch (groups[j]) {
        case UserGroup::lurker: ++c.lurkers; break;
        case UserGroup::engager: ++c.engagers; break;
        case UserGroup::contributor: ++c.contributors; break;
        }
    }
    return c;
}

/// Norm of `omega` restricted to `values`; an all-zero vector has norm 1 so that every
/// factor collapses to 1.
inline double omega_norm(std::span<const double> values, NormKind kind = NormKind::l2)
{
    double acc = 0.0;
    for (double w : values) {
        switch (kind) {
        case NormKind::l2: acc += w * w; break;
        case NormKind::l1: acc += std::abs(w); break;
        case NormKind::max: acc = std::max(acc, std::abs(w)); break;
        }
    }
    if (kind == NormKind::l2) acc = std::sqrt(acc);
    return acc > 0.0 ? acc : 1.0;
}

inline double reweight_factor(double omega, double norm, double alpha)
{
    return std::pow(1.0 + omega / norm, alpha);
}

struct WeightVector {
    std::vector<double> omega;
    double norm = 1.0;
    double alpha = 0.0;

    double factor(std::size_t i) const { return reweight_factor(omega[i], norm, alpha); }

    /// Same omegas, with the norm taken over `rows` only (e.g. the training news).
    WeightVector normalized_over(std::span<const std::size_t> rows, NormKind kind = NormKind::l2) const
    {
        std::vector<double> subset;
        subset.reserve(rows.size());
        for (auto r : rows) subset.push_back(omega.at(r));
        return {omega, omega_norm(subset, kind), alpha};
    }
};

inline std::vector<double> news_weights(const InteractionMatrix& matrix, const std::vector<UserGroup>& groups,
                                        const GroupCoefficients& coeffs = {})
{
    if (groups.size() != matrix.cols()) throw ContractError("column group list does not match matrix width");
    std::vector<double> omega(matrix.rows());
    for (std::size_t i = 0; i < matrix.rows(); ++i) omega[i] = news_weight(row_group_counts(matrix, i, groups), coeffs);
    return omega;
}

inline WeightVector weight_vector(const InteractionMatrix& matrix, const std::vector<ParticipationProfile>& profiles,
                                  const GroupCoefficients& coeffs, double alpha, NormKind kind = NormKind::l2)
{
    if (alpha < 0.0) throw ContractError("alpha must be >= 0");
    WeightVector wv;
    wv.omega = news_weights(matrix, column_groups(matrix, profiles), coeffs);
    wv.norm = omega_norm(wv.omega, kind);
    wv.alpha = alpha;
    return wv;
}

/// Scales every stored entry of row i by (1 + omega_i / norm)^alpha. The input is untouched.
inline InteractionMatrix edge_reweight(const InteractionMatrix& matrix, const WeightVector& wv)
{
    if (wv.omega.size() != matrix.rows()) throw ContractError("weight vector does not match matrix rows");
    InteractionMatrix out = matrix;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        const double f = wv.factor(i);
        for (std::size_t k = out.row_ptr[i]; k < out.row_ptr[i + 1]; ++k) out.val[k] = matrix.val[k] * f;
    }
    return out;
}

/// Loss multipliers for one minibatch given each sample's omega; the norm is over the batch.
inline std::vector<double> batch_factors(std::span<const double> batch_omega, double alpha,
                                         NormKind kind = NormKind::l2)
{
    if (batch_omega.empty()) throw ContractError("batch must be nonempty");
    const double norm = omega_norm(batch_omega, kind);
    std::vector<double> out(batch_omega.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = reweight_factor(batch_omega[i], norm, alpha);
    return out;
}

inline std::vector<double> batch_sample_weights(std::span<const std::size_t> batch_rows,
                                                const InteractionMatrix& matrix,
                                                const std::vector<ParticipationProfile>& profiles,
                                                const GroupCoefficients& coeffs, double alpha,
                                                NormKind kind = NormKind::l2)
{
    const auto groups = column_groups(matrix, profiles);
    std::vector<double> omega;
    omega.reserve(batch_rows.size());
    for (auto r : batch_rows) omega.push_back(news_weight(row_group_counts(matrix, r, groups), coeffs));
    return batch_factors(omega, alpha, kind);
}

inline constexpr double probability_epsilon = 1e-7;

inline double clamp_probability(double p)
{
    return std::clamp(p, probability_epsilon, 1.0 - probability_epsilon);
}

/// y log(p) + (1 - y) log(1 - p) with p clamped; nonpositive. The sign flip lives in balanced_loss.
inline double ce_loss(int y, double y_hat)
{
    const double p = clamp_probability(y_hat);
    return y * std::log(p) + (1 - y) * std::log(1.0 - p);
}

/// -(1/M) sum_i factor_i * ce_loss(y_i, y_hat_i)
inline double balanced_loss(std::span<const int> y, std::span<const double> y_hat, std::span<const double> factors)
{
    if (y.size() != y_hat.size() || y.size() != factors.size()) {
        throw ContractError("balanced_loss: labels, predictions and factors differ in length");
    }
    if (y.empty()) throw ContractError("balanced_loss: empty batch");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += factors[i] * ce_loss(y[i], y_hat[i]);
    return -s / static_cast<double>(y.size());
}

}  // namespace echoweight
