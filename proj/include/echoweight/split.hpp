#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "echoweight/error.hpp"
#include "echoweight/random.hpp"

namespace echoweight {

struct SplitIndices {
    std::vector<std::size_t> first;   // ascending
    std::vector<std::size_t> second;  // ascending
};

/// Seeded label-stratified split. |first| = floor(ratio * n); each class contributes
/// floor(ratio * n_class) items and the leftover slots go to the classes with the largest
/// fractional remainders (ties to the lower label).
inline SplitIndices stratified_split(std::span<const int> labels, double ratio, std::uint64_t seed)
{
    if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("split ratio must lie in (0, 1)");
    std::vector<std::size_t> cls[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ContractError("labels must be 0 or 1");
        cls[labels[i]].push_back(i);
    }
    if (cls[0].empty() || cls[1].empty()) throw ValidationError("stratified split needs both labels present");

    const auto n = labels.size();
    const auto target = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    std::size_t take[2];
    double rem[2];
    for (int c = 0; c < 2; ++c) {
        const double exact = ratio * static_cast<double>(cls[c].size());
        take[c] = static_cast<std::size_t>(std::floor(exact));
        rem[c] = exact - std::floor(exact);
    }
    std::size_t missing = target - std::min(target, take[0] + take[1]);
    const int order[2] = {rem[1] > rem[0] ? 1 : 0, rem[1] > rem[0] ? 0 : 1};
    for (int k = 0; k < 2 && missing > 0; ++k) {
        const int c = order[k];
        if (take[c] < cls[c].size()) {
            ++take[c];
            --missing;
        }
    }

    Rng rng(seed);
    SplitIndices out;
    for (int c = 0; c < 2; ++c) {
        rng.shuffle(cls[c]);
        out.first.insert(out.first.end(), cls[c].begin(), cls[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
        out.second.insert(out.second.end(), cls[c].begin() + static_cast<std::ptrdiff_t>(take[c]), cls[c].end());
    }
    std::sort(out.first.begin(), out.first.end());
    std::sort(out.second.begin(), out.second.end());
    return out;
}

}  // namespace echoweight
