#pragma once

/** \file embedder.hpp
 *  \brief Dense paper and reference-title embeddings.
 *
 * Two providers satisfy the same contract: `ShallowProvider` runs the
 * built-in linear encoder over hashed bag-of-words features, and
 * `StoreProvider` serves vectors precomputed by an external encoder.
 * Vectors are never normalized here; cosine similarity normalizes at
 * comparison time.
 */

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rmc/corpus.hpp"
#include "rmc/error.hpp"
#include "rmc/rng.hpp"
#include "rmc/textproc.hpp"

namespace rmc {

using Vector = std::vector<double>;

inline constexpr std::uint32_t kDefaultFeatureDim = 1U << 18;
inline constexpr std::uint32_t kDefaultEmbedDim = 64;

/// Linear map from hashed token counts to embeddings: a row-major
/// feature_dim x embed_dim projection, no bias.
class ShallowModel {
public:
    ShallowModel() = default;

    ShallowModel(std::uint32_t feature_dim, std::uint32_t embed_dim)
        : feature_dim_(feature_dim),
          embed_dim_(embed_dim),
          projection_(static_cast<std::size_t>(feature_dim) * embed_dim, 0.0) {
        if (!is_power_of_two(feature_dim)) throw Error(ErrorCode::BadDim, "feature_dim " + std::to_string(feature_dim));
        if (embed_dim == 0) throw Error(ErrorCode::BadDim, "embed_dim 0");
    }

    /// Entries i.i.d. uniform in [-1/sqrt(feature_dim), 1/sqrt(feature_dim)].
    static ShallowModel random(std::uint32_t feature_dim, std::uint32_t embed_dim, std::uint64_t seed) {
        ShallowModel model(feature_dim, embed_dim);
        Rng rng(seed);
        const double bound = 1.0 / std::sqrt(static_cast<double>(feature_dim));
        for (auto& w : model.projection_) w = rng.uniform(-bound, bound);
        return model;
    }

    [[nodiscard]] std::uint32_t feature_dim() const noexcept { return feature_dim_; }
    [[nodiscard]] std::uint32_t embed_dim() const noexcept { return embed_dim_; }

    [[nodiscard]] std::span<const double> row(std::uint32_t bucket) const {
        return {projection_.data() + static_cast<std::size_t>(bucket) * embed_dim_, embed_dim_};
    }
    [[nodiscard]] std::span<double> row(std::uint32_t bucket) {
        return {projection_.data() + static_cast<std::size_t>(bucket) * embed_dim_, embed_dim_};
    }

    [[nodiscard]] std::span<const double> weights() const noexcept { return projection_; }
    [[nodiscard]] std::span<double> weights() noexcept { return projection_; }

    friend bool operator==(const ShallowModel&, const ShallowModel&) = default;

private:
    std::uint32_t feature_dim_ = 0;
    std::uint32_t embed_dim_ = 0;
    std::vector<double> projection_;
};

/// Sum of projection rows of the occupied buckets, weighted by count.
inline Vector shallow_embed(const ShallowModel& model, const SparseFeatureVector& features) {
    if (features.dim() != 0 && features.dim() != model.feature_dim()) {
        throw Error(ErrorCode::DimMismatch, "feature dim " + std::to_string(features.dim()) + " vs model " +
                                                std::to_string(model.feature_dim()));
    }
    Vector v(model.embed_dim(), 0.0);
    for (const auto& [bucket, count] : features.entries()) {
        const auto r = model.row(bucket);
        const double c = count;
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += c * r[j];
    }
    return v;
}

/// Features of text fields joined with a space.
inline SparseFeatureVector text_features(std::span<const std::string_view> fields, std::uint32_t feature_dim) {
    std::string joined;
    for (const auto field : fields) {
        if (!joined.empty()) joined.push_back(' ');
        joined += field;
    }
    return hash_features(tokenize(joined), feature_dim);
}

inline SparseFeatureVector content_features(const PaperRecord& rec, std::uint32_t feature_dim) {
    const std::string_view fields[] = {rec.title, rec.abstract};
    return text_features(fields, feature_dim);
}

inline SparseFeatureVector reference_features(std::string_view title, std::uint32_t feature_dim) {
    const std::string_view fields[] = {title};
    return text_features(fields, feature_dim);
}

inline Vector shallow_embed(const ShallowModel& model, std::span<const std::string_view> fields) {
    return shallow_embed(model, text_features(fields, model.feature_dim()));
}

/// Id-keyed vectors of one dimension, kept in insertion order so that
/// serialization is deterministic.
class EmbeddingStore {
public:
    EmbeddingStore() = default;
    explicit EmbeddingStore(std::uint32_t dim) : dim_(dim) {
        if (dim == 0) throw Error(ErrorCode::BadDim, "store dim 0");
    }

    void insert(std::string id, std::span<const float> values) {
        if (values.size() != dim_) {
            throw Error(ErrorCode::DimMismatch, id + ": " + std::to_string(values.size()) + " != " + std::to_string(dim_));
        }
        if (id.size() > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "id longer than 65535 bytes");
        for (const float x : values) {
            if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, id + ": non-finite entry");
        }
        if (!index_.emplace(id, ids_.size()).second) throw Error(ErrorCode::DuplicateId, id);
        ids_.push_back(std::move(id));
        data_.insert(data_.end(), values.begin(), values.end());
    }

    void insert(std::string id, std::span<const double> values) {
        std::vector<float> narrowed(values.begin(), values.end());
        insert(std::move(id), std::span<const float>(narrowed));
    }

    [[nodiscard]] std::uint32_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }
    [[nodiscard]] bool contains(std::string_view id) const { return index_.contains(std::string(id)); }

    [[nodiscard]] std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

    /// Stored vector widened to double.
    [[nodiscard]] Vector get(std::string_view id) const {
        const auto it = index_.find(std::string(id));
        if (it == index_.end()) throw Error(ErrorCode::MissingVector, std::string(id));
        const auto r = row(it->second);
        return {r.begin(), r.end()};
    }

    friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
        return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.data_ == b.data_;
    }

private:
    std::uint32_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> index_;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    /// Embedding of a paper's title and abstract.
    [[nodiscard]] virtual Vector content(const PaperRecord& paper) const = 0;
    /// Embedding of one reference title.
    [[nodiscard]] virtual Vector reference_title(std::string_view title) const = 0;
};

class ShallowProvider final : public EmbeddingProvider {
public:
    explicit ShallowProvider(const ShallowModel& model) : model_(&model) {}

    [[nodiscard]] std::size_t dim() const override { return model_->embed_dim(); }

    [[nodiscard]] Vector content(const PaperRecord& paper) const override {
        return shallow_embed(*model_, content_features(paper, model_->feature_dim()));
    }

    [[nodiscard]] Vector reference_title(std::string_view title) const override {
        return shallow_embed(*model_, reference_features(title, model_->feature_dim()));
    }

    [[nodiscard]] const ShallowModel& model() const noexcept { return *model_; }

private:
    const ShallowModel* model_;
};

/// Content vectors keyed by paper id, reference vectors keyed by
/// `normalize_title(title)`.
class StoreProvider final : public EmbeddingProvider {
public:
    StoreProvider(EmbeddingStore content, EmbeddingStore references)
        : content_(std::move(content)), references_(std::move(references)) {
        if (references_.size() > 0 && references_.dim() != content_.dim()) {
            throw Error(ErrorCode::DimMismatch, "content store dim " + std::to_string(content_.dim()) +
                                                    " vs reference store dim " + std::to_string(references_.dim()));
        }
    }

    [[nodiscard]] std::size_t dim() const override { return content_.dim(); }

    [[nodiscard]] Vector content(const PaperRecord& paper) const override { return content_.get(paper.id); }

    [[nodiscard]] Vector reference_title(std::string_view title) const override {
        return references_.get(normalize_title(title));
    }

private:
    EmbeddingStore content_;
    EmbeddingStore references_;
};

}  // namespace rmc
