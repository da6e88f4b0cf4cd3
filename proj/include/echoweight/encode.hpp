#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "echoweight/error.hpp"
#include "echoweight/jsonl.hpp"

namespace echoweight {

/// Sparse real vector with sorted, unique indices.
struct SparseVector {
    std::size_t dim = 0;
    std::vector<std::uint32_t> index;
    std::vector<double> value;

    std::size_t nnz() const { return index.size(); }
    bool is_zero() const { return index.empty(); }

    double norm() const
    {
        double s = 0.0;
        for (double v : value) s += v * v;
        return std::sqrt(s);
    }

    std::vector<double> to_dense() const
    {
        std::vector<double> out(dim, 0.0);
        for (std::size_t k = 0; k < index.size(); ++k) out[index[k]] = value[k];
        return out;
    }

    bool operator==(const SparseVector&) const = default;
};

/// Encoder output: either all-zero or unit L2 norm.
using EmbeddingVector = SparseVector;

using TokenSequence = std::vector<std::string>;

inline std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint32_t bucket_of(std::string_view token, std::size_t dim)
{
    return static_cast<std::uint32_t>(fnv1a64(token) % dim);
}

namespace detail {

inline bool is_url(std::string_view tok)
{
    std::string lower(tok);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return lower.find("://") != std::string::npos || lower.rfind("www.", 0) == 0;
}

inline bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

}  // namespace detail

/// Lowercases, drops URLs / #hashtags / @mentions, and splits the rest on whitespace and
/// ASCII punctuation. Non-ASCII bytes are kept as word characters.
inline TokenSequence preprocess(std::string_view raw)
{
    TokenSequence out;
    std::size_t i = 0;
    while (i < raw.size()) {
        while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
        std::size_t j = i;
        while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
        if (j == i) break;
        const std::string_view chunk = raw.substr(i, j - i);
        i = j;
        if (chunk.front() == '#' || chunk.front() == '@' || detail::is_url(chunk)) continue;

        std::string word;
        for (unsigned char c : chunk) {
            if (detail::is_word_byte(c)) {
                word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
            } else if (!word.empty()) {
                out.push_back(std::move(word));
                word.clear();
            }
        }
        if (!word.empty()) out.push_back(std::move(word));
    }
    return out;
}

/// Smoothed inverse document frequency per hash bucket plus the training vocabulary.
/// Tokens outside the vocabulary are dropped at encode time.
class IdfTable {
public:
    IdfTable() = default;

    static IdfTable fit(std::span<const TokenSequence> documents, std::size_t dim)
    {
        if (dim == 0) throw ValidationError("encoder dim must be positive");
        IdfTable t;
        t.dim_ = dim;
        t.documents_ = documents.size();
        std::map<std::uint32_t, std::size_t> df;
        for (const auto& doc : documents) {
            std::vector<std::uint32_t> buckets;
            buckets.reserve(doc.size());
            for (const auto& tok : doc) {
                t.vocabulary_.insert(tok);
                buckets.push_back(bucket_of(tok, dim));
            }
            std::sort(buckets.begin(), buckets.end());
            buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
            for (auto b : buckets) ++df[b];
        }
        const double n = static_cast<double>(t.documents_);
        for (const auto& [b, count] : df) t.idf_[b] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
        return t;
    }

    /// Hand-built table, used for fixtures.
    static IdfTable from_values(std::size_t dim, std::map<std::uint32_t, double> idf,
                                std::unordered_set<std::string> vocabulary, std::size_t documents = 0)
    {
        IdfTable t;
        t.dim_ = dim;
        t.idf_ = std::move(idf);
        t.vocabulary_ = std::move(vocabulary);
        t.documents_ = documents;
        return t;
    }

    std::size_t dim() const { return dim_; }
    std::size_t documents() const { return documents_; }
    bool in_vocabulary(const std::string& token) const { return vocabulary_.count(token) != 0; }

    double idf(std::uint32_t bucket) const
    {
        auto it = idf_.find(bucket);
        if (it != idf_.end()) return it->second;
        return std::log(1.0 + static_cast<double>(documents_)) + 1.0;
    }

    jsonl::json to_json() const
    {
        jsonl::json buckets = jsonl::json::object();
        for (const auto& [b, v] : idf_) buckets[std::to_string(b)] = v;
        std::vector<std::string> vocab(vocabulary_.begin(), vocabulary_.end());
        std::sort(vocab.begin(), vocab.end());
        return {{"dim", dim_}, {"hash", "fnv1a64"}, {"documents", documents_}, {"idf", buckets}, {"vocabulary", vocab}};
    }

    static IdfTable from_json(const jsonl::json& j)
    {
        if (j.value("hash", std::string("fnv1a64")) != "fnv1a64") throw ValidationError("unsupported hash in idf table");
        IdfTable t;
        t.dim_ = j.at("dim").get<std::size_t>();
        t.documents_ = j.value("documents", std::size_t{0});
        for (const auto& [k, v] : j.at("idf").items()) t.idf_[static_cast<std::uint32_t>(std::stoul(k))] = v.get<double>();
        for (const auto& w : j.at("vocabulary")) t.vocabulary_.insert(w.get<std::string>());
        return t;
    }

    bool operator==(const IdfTable&) const = default;

private:
    std::size_t dim_ = 0;
    std::size_t documents_ = 0;
    std::map<std::uint32_t, double> idf_;
    std::unordered_set<std::string> vocabulary_;
};

namespace detail {

inline void l2_normalize(SparseVector& v)
{
    const double n = v.norm();
    if (n == 0.0) {
        v.index.clear();
        v.value.clear();
        return;
    }
    for (double& x : v.value) x /= n;
}

}  // namespace detail

/// Hashed bag of words, TF-IDF weighted, unit L2 norm (or zero for no in-vocabulary tokens).
inline EmbeddingVector encode_news(const TokenSequence& tokens, const IdfTable& idf)
{
    std::map<std::uint32_t, double> tf;
    for (const auto& tok : tokens) {
        if (idf.in_vocabulary(tok)) tf[bucket_of(tok, idf.dim())] += 1.0;
    }
    EmbeddingVector v;
    v.dim = idf.dim();
    for (const auto& [b, count] : tf) {
        v.index.push_back(b);
        v.value.push_back(count * idf.idf(b));
    }
    detail::l2_normalize(v);
    return v;
}

/// Mean of the per-comment encodings, re-normalized to unit L2.
inline EmbeddingVector encode_comments(std::span<const TokenSequence> comments, const IdfTable& idf)
{
    std::map<std::uint32_t, double> acc;
    for (const auto& c : comments) {
        const auto e = encode_news(c, idf);
        for (std::size_t k = 0; k < e.nnz(); ++k) acc[e.index[k]] += e.value[k];
    }
    EmbeddingVector v;
    v.dim = idf.dim();
    const double m = comments.empty() ? 1.0 : static_cast<double>(comments.size());
    for (const auto& [b, s] : acc) {
        if (s == 0.0) continue;
        v.index.push_back(b);
        v.value.push_back(s / m);
    }
    detail::l2_normalize(v);
    return v;
}

}  // namespace echoweight
