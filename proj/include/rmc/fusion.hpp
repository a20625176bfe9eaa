#pragma once

/** \file fusion.hpp
 *  \brief Attentive reference encoder.
 *
 * A paper's reference titles are embedded and pooled with weights
 * softmax(V_refs^T v_content) (raw dot products, no scaling, no learned
 * parameters). The pooled reference vector v_R is blended with the
 * content vector as (1 - alpha) v_content + alpha v_R.
 *
 * Ablations: `AttentionMode::AveragePooling` replaces the softmax weights
 * with 1/n, and `CombineMode::Concatenation` returns [v_content | v_R]
 * instead of the blend (alpha is ignored).
 *
 * A paper without references fuses to v_content (linear) or
 * [v_content | 0] (concatenation).
 */

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rmc/corpus.hpp"
#include "rmc/embedder.hpp"
#include "rmc/error.hpp"

namespace rmc {

enum class AttentionMode { Attention, AveragePooling };
enum class CombineMode { Linear, Concatenation };

inline AttentionMode parse_attention_mode(std::string_view s) {
    if (s == "attention") return AttentionMode::Attention;
    if (s == "average" || s == "average_pooling" || s == "average-pooling") return AttentionMode::AveragePooling;
    throw Error(ErrorCode::InvalidArgument, "attention mode " + std::string(s));
}

inline CombineMode parse_combine_mode(std::string_view s) {
    if (s == "linear") return CombineMode::Linear;
    if (s == "concat" || s == "concatenation") return CombineMode::Concatenation;
    throw Error(ErrorCode::InvalidArgument, "combine mode " + std::string(s));
}

inline std::string_view to_string(AttentionMode m) {
    return m == AttentionMode::Attention ? "attention" : "average_pooling";
}

inline std::string_view to_string(CombineMode m) { return m == CombineMode::Linear ? "linear" : "concatenation"; }

struct FusionConfig {
    double alpha = 0.6;
    AttentionMode attention = AttentionMode::Attention;
    CombineMode combine = CombineMode::Linear;

    void validate() const {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be in [0,1]");
    }
};

struct FusedEmbedding {
    Vector values;
    CombineMode mode = CombineMode::Linear;

    friend bool operator==(const FusedEmbedding&, const FusedEmbedding&) = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimMismatch, std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    const double d = dot(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    return d / (na * nb);
}

/// Max-subtracted softmax.
inline Vector softmax(std::span<const double> logits) {
    if (logits.empty()) return {};
    const double peak = *std::max_element(logits.begin(), logits.end());
    Vector out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (auto& x : out) x /= total;
    return out;
}

inline void check_reference_dims(std::size_t dim, const std::vector<Vector>& refs) {
    for (const auto& r : refs) {
        if (r.size() != dim) {
            throw Error(ErrorCode::DimMismatch, "reference dim " + std::to_string(r.size()) + " vs " + std::to_string(dim));
        }
    }
}

inline Vector attention_weights(std::span<const double> v_content, const std::vector<Vector>& refs) {
    if (refs.empty()) throw Error(ErrorCode::EmptyReferences, "no reference embeddings");
    check_reference_dims(v_content.size(), refs);
    Vector logits(refs.size());
    for (std::size_t x = 0; x < refs.size(); ++x) logits[x] = dot(refs[x], v_content);
    return softmax(logits);
}

inline Vector uniform_weights(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyReferences, "no reference embeddings");
    return Vector(n, 1.0 / static_cast<double>(n));
}

/// v_R = sum_x w_x v_{r_x}
inline Vector reference_embedding(std::span<const double> weights, const std::vector<Vector>& refs) {
    if (weights.size() != refs.size()) {
        throw Error(ErrorCode::DimMismatch, std::to_string(weights.size()) + " weights for " +
                                                std::to_string(refs.size()) + " references");
    }
    if (refs.empty()) throw Error(ErrorCode::EmptyReferences, "no reference embeddings");
    check_reference_dims(refs.front().size(), refs);
    Vector v(refs.front().size(), 0.0);
    for (std::size_t x = 0; x < refs.size(); ++x) {
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += weights[x] * refs[x][j];
    }
    return v;
}

inline FusedEmbedding fuse(std::span<const double> v_content, std::span<const double> v_ref, const FusionConfig& config) {
    config.validate();
    if (v_content.size() != v_ref.size()) {
        throw Error(ErrorCode::DimMismatch, std::to_string(v_content.size()) + " vs " + std::to_string(v_ref.size()));
    }
    FusedEmbedding out;
    out.mode = config.combine;
    if (config.combine == CombineMode::Concatenation) {
        out.values.assign(v_content.begin(), v_content.end());
        out.values.insert(out.values.end(), v_ref.begin(), v_ref.end());
        return out;
    }
    if (config.alpha == 0.0) {
        out.values.assign(v_content.begin(), v_content.end());
    } else if (config.alpha == 1.0) {
        out.values.assign(v_ref.begin(), v_ref.end());
    } else {
        out.values.resize(v_content.size());
        for (std::size_t j = 0; j < v_content.size(); ++j) {
            out.values[j] = (1.0 - config.alpha) * v_content[j] + config.alpha * v_ref[j];
        }
    }
    return out;
}

/// Intermediate values of one forward pass.
struct FusionTrace {
    Vector weights;  // empty when the paper has no references
    Vector v_ref;    // empty when the paper has no references
    FusedEmbedding fused;
};

inline FusionTrace fuse_paper(const Vector& v_content, const std::vector<Vector>& refs, const FusionConfig& config) {
    FusionTrace trace;
    if (refs.empty()) {
        config.validate();
        trace.fused.mode = config.combine;
        trace.fused.values = v_content;
        if (config.combine == CombineMode::Concatenation) trace.fused.values.resize(2 * v_content.size(), 0.0);
        return trace;
    }
    trace.weights = config.attention == AttentionMode::Attention ? attention_weights(v_content, refs)
                                                                  : uniform_weights(refs.size());
    trace.v_ref = reference_embedding(trace.weights, refs);
    trace.fused = fuse(v_content, trace.v_ref, config);
    return trace;
}

inline FusedEmbedding encode_paper(const EmbeddingProvider& provider, const PaperRecord& paper,
                                   const FusionConfig& config) {
    const Vector v_content = provider.content(paper);
    std::vector<Vector> refs;
    refs.reserve(paper.references.size());
    for (const auto& title : paper.references) refs.push_back(provider.reference_title(title));
    return fuse_paper(v_content, refs, config).fused;
}

}  // namespace rmc
