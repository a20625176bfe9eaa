#pragma once

/** \file trainer.hpp
 *  \brief Triplet-margin training of the shallow encoder.
 *
 * Loss for a (query, positive, negative) triplet of fused embeddings:
 *
 *     L = max(cos(q, n) - cos(q, p) + margin, 0)
 *
 * Gradients are propagated analytically through the cosines, the
 * content/reference blend, the attention softmax, the weighted reference
 * sum and the linear encoder, for all three papers and for both the
 * content and the reference-title paths. At the hinge kink the gradient
 * is zero.
 *
 * Negatives are either easy (uniform over the candidate pool minus golds
 * and the query) or hard (uniform over the query's current K_n nearest
 * non-gold candidates). The hard-negative table is rebuilt at every epoch
 * start and every `refresh_every` optimizer steps. Updates are AdamW with
 * batch size 1.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rmc/corpus.hpp"
#include "rmc/embedder.hpp"
#include "rmc/encoding.hpp"
#include "rmc/error.hpp"
#include "rmc/eval.hpp"
#include "rmc/fusion.hpp"
#include "rmc/rng.hpp"

namespace rmc {

/// Papers per training unit: positives, hard negatives, easy negatives.
struct SamplingRatio {
    std::uint32_t positives = 1;
    std::uint32_t hard = 1;
    std::uint32_t easy = 1;

    friend bool operator==(const SamplingRatio&, const SamplingRatio&) = default;
};

inline SamplingRatio parse_ratio(std::string_view s) {
    SamplingRatio r;
    std::uint32_t parts[3] = {0, 0, 0};
    std::size_t idx = 0;
    bool have_digit = false;
    for (const char c : s) {
        if (c == ':') {
            if (!have_digit || ++idx > 2) throw Error(ErrorCode::InvalidArgument, "ratio " + std::string(s));
            have_digit = false;
        } else if (c >= '0' && c <= '9') {
            parts[idx] = parts[idx] * 10 + static_cast<std::uint32_t>(c - '0');
            have_digit = true;
            if (parts[idx] > 1000) throw Error(ErrorCode::InvalidArgument, "ratio " + std::string(s));
        } else {
            throw Error(ErrorCode::InvalidArgument, "ratio " + std::string(s));
        }
    }
    if (idx != 2 || !have_digit) throw Error(ErrorCode::InvalidArgument, "ratio " + std::string(s));
    r.positives = parts[0];
    r.hard = parts[1];
    r.easy = parts[2];
    if (r.positives < 1) throw Error(ErrorCode::InvalidArgument, "ratio needs at least one positive");
    return r;
}

inline std::string to_string(const SamplingRatio& r) {
    return std::to_string(r.positives) + ":" + std::to_string(r.hard) + ":" + std::to_string(r.easy);
}

struct TrainConfig {
    double margin = 0.05;
    FusionConfig fusion;
    std::size_t k_n = 100;
    std::size_t refresh_every = 5000;  // optimizer steps between hard-negative refreshes
    SamplingRatio ratio;
    std::size_t epochs = 5;
    double learning_rate = 2e-5;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    Scope scope = Scope::Core;
    bool exclude_cited = false;
    std::size_t threads = 1;
    std::optional<Split> monitor_split;  // evaluated after every epoch when set
    std::size_t monitor_k = kDefaultRecallK;

    void validate() const {
        fusion.validate();
        if (!(margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be >= 0");
        if (k_n < 1) throw Error(ErrorCode::InvalidArgument, "K_n must be >= 1");
        if (refresh_every < 1) throw Error(ErrorCode::InvalidArgument, "refresh_every must be >= 1");
        if (ratio.positives < 1) throw Error(ErrorCode::InvalidArgument, "ratio needs at least one positive");
        if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "learning rate and weight decay must be >= 0");
        }
    }
};

enum class NegativeKind { Easy, Hard };

struct TripletInstance {
    std::string query_id;
    std::string positive_id;
    std::string negative_id;
    NegativeKind kind = NegativeKind::Easy;

    friend bool operator==(const TripletInstance&, const TripletInstance&) = default;
};

/// Query id -> up to K_n nearest non-gold candidates, nearest first.
using HardNegativeTable = std::map<std::string, std::vector<std::string>>;

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

inline double triplet_loss(std::span<const double> v_query, std::span<const double> v_pos,
                           std::span<const double> v_neg, double margin) {
    const double s_pos = cosine_similarity(v_query, v_pos);
    const double s_neg = cosine_similarity(v_query, v_neg);
    return std::max(s_neg - s_pos + margin, 0.0);
}

// ---------------------------------------------------------------------------
// Features and gradients
// ---------------------------------------------------------------------------

struct PaperFeatures {
    SparseFeatureVector content;
    std::vector<SparseFeatureVector> references;
};

/// Hashed features of every corpus record, computed once per training run.
class FeatureCache {
public:
    FeatureCache(const Corpus& corpus, std::uint32_t feature_dim) {
        features_.reserve(corpus.size());
        for (const auto& rec : corpus.records()) {
            PaperFeatures pf;
            pf.content = content_features(rec, feature_dim);
            for (const auto& ref : rec.references) pf.references.push_back(reference_features(ref, feature_dim));
            index_.emplace(rec.id, features_.size());
            features_.push_back(std::move(pf));
        }
    }

    [[nodiscard]] const PaperFeatures& at(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) throw Error(ErrorCode::UnknownPaper, id);
        return features_[it->second];
    }

    [[nodiscard]] const std::vector<PaperFeatures>& all() const noexcept { return features_; }

private:
    std::vector<PaperFeatures> features_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Forward pass of one paper, keeping what the backward pass needs.
struct PaperForward {
    Vector v_content;
    std::vector<Vector> v_refs;
    FusionTrace trace;
};

inline PaperForward forward_paper(const ShallowModel& model, const PaperFeatures& pf, const FusionConfig& config) {
    PaperForward f;
    f.v_content = shallow_embed(model, pf.content);
    f.v_refs.reserve(pf.references.size());
    for (const auto& r : pf.references) f.v_refs.push_back(shallow_embed(model, r));
    f.trace = fuse_paper(f.v_content, f.v_refs, config);
    return f;
}

/// Gradient w.r.t. the projection, stored by row (bucket).
class SparseGradient {
public:
    explicit SparseGradient(std::uint32_t embed_dim = 0) : embed_dim_(embed_dim) {}

    /// row[bucket] += scale * g
    void add(std::uint32_t bucket, double scale, std::span<const double> g) {
        auto [it, inserted] = rows_.try_emplace(bucket);
        if (inserted) it->second.assign(embed_dim_, 0.0);
        for (std::size_t j = 0; j < g.size(); ++j) it->second[j] += scale * g[j];
    }

    void add_features(const SparseFeatureVector& features, std::span<const double> g) {
        for (const auto& [bucket, count] : features.entries()) add(bucket, static_cast<double>(count), g);
    }

    [[nodiscard]] const std::map<std::uint32_t, Vector>& rows() const noexcept { return rows_; }
    [[nodiscard]] bool empty() const noexcept { return rows_.empty(); }

    /// Dense row-major copy, feature_dim x embed_dim.
    [[nodiscard]] std::vector<double> dense(std::uint32_t feature_dim) const {
        std::vector<double> out(static_cast<std::size_t>(feature_dim) * embed_dim_, 0.0);
        for (const auto& [bucket, g] : rows_) {
            std::copy(g.begin(), g.end(), out.begin() + static_cast<std::ptrdiff_t>(bucket) * embed_dim_);
        }
        return out;
    }

private:
    std::uint32_t embed_dim_;
    std::map<std::uint32_t, Vector> rows_;
};

namespace detail {

/// d cos(a, b) / d a
inline Vector cosine_grad(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    const double cos = dot(a, b) / (na * nb);
    Vector g(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) g[i] = b[i] / (na * nb) - cos * a[i] / (na * na);
    return g;
}

inline void backward_paper(const PaperFeatures& pf, const PaperForward& f, std::span<const double> g_fused,
                           const FusionConfig& config, SparseGradient& grad) {
    const std::size_t dim = f.v_content.size();
    Vector g_content(dim, 0.0);
    Vector g_ref(dim, 0.0);
    const bool concat = config.combine == CombineMode::Concatenation;

    if (f.v_refs.empty()) {
        std::copy_n(g_fused.begin(), dim, g_content.begin());
        grad.add_features(pf.content, g_content);
        return;
    }
    if (concat) {
        std::copy_n(g_fused.begin(), dim, g_content.begin());
        std::copy_n(g_fused.begin() + static_cast<std::ptrdiff_t>(dim), dim, g_ref.begin());
    } else if (config.alpha == 0.0) {
        std::copy_n(g_fused.begin(), dim, g_content.begin());
    } else if (config.alpha == 1.0) {
        std::copy_n(g_fused.begin(), dim, g_ref.begin());
    } else {
        for (std::size_t j = 0; j < dim; ++j) {
            g_content[j] = (1.0 - config.alpha) * g_fused[j];
            g_ref[j] = config.alpha * g_fused[j];
        }
    }

    const auto& w = f.trace.weights;
    const std::size_t n = f.v_refs.size();
    std::vector<Vector> g_refs(n, Vector(dim, 0.0));
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t j = 0; j < dim; ++j) g_refs[x][j] = w[x] * g_ref[j];
    }
    if (config.attention == AttentionMode::Attention) {
        // softmax backward: dz_x = w_x (dw_x - sum_y w_y dw_y), z_x = v_x . v_content
        Vector g_w(n);
        double mean = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            g_w[x] = dot(g_ref, f.v_refs[x]);
            mean += w[x] * g_w[x];
        }
        for (std::size_t x = 0; x < n; ++x) {
            const double g_z = w[x] * (g_w[x] - mean);
            for (std::size_t j = 0; j < dim; ++j) {
                g_refs[x][j] += g_z * f.v_content[j];
                g_content[j] += g_z * f.v_refs[x][j];
            }
        }
    }
    grad.add_features(pf.content, g_content);
    for (std::size_t x = 0; x < n; ++x) grad.add_features(pf.references[x], g_refs[x]);
}

}  // namespace detail

struct TripletGradient {
    double loss = 0.0;
    SparseGradient gradient;
};

/// Loss of one instance under `model`.
inline double instance_loss(const TripletInstance& inst, const ShallowModel& model, const FeatureCache& features,
                            const FusionConfig& fusion, double margin) {
    const auto q = forward_paper(model, features.at(inst.query_id), fusion);
    const auto p = forward_paper(model, features.at(inst.positive_id), fusion);
    const auto n = forward_paper(model, features.at(inst.negative_id), fusion);
    return triplet_loss(q.trace.fused.values, p.trace.fused.values, n.trace.fused.values, margin);
}

/// Loss and exact gradient w.r.t. the projection matrix.
inline TripletGradient loss_gradients(const TripletInstance& inst, const ShallowModel& model,
                                      const FeatureCache& features, const FusionConfig& fusion, double margin) {
    const auto& fq = features.at(inst.query_id);
    const auto& fp = features.at(inst.positive_id);
    const auto& fn = features.at(inst.negative_id);
    const auto q = forward_paper(model, fq, fusion);
    const auto p = forward_paper(model, fp, fusion);
    const auto n = forward_paper(model, fn, fusion);
    const auto& vq = q.trace.fused.values;
    const auto& vp = p.trace.fused.values;
    const auto& vn = n.trace.fused.values;

    TripletGradient out{0.0, SparseGradient(model.embed_dim())};
    const double hinge = cosine_similarity(vq, vn) - cosine_similarity(vq, vp) + margin;
    if (!(hinge > 0.0)) return out;
    out.loss = hinge;

    // dL/dq = dcos(q,n)/dq - dcos(q,p)/dq ; dL/dp = -dcos(q,p)/dp ; dL/dn = dcos(q,n)/dn
    Vector g_q = detail::cosine_grad(vq, vn);
    const Vector g_q_pos = detail::cosine_grad(vq, vp);
    for (std::size_t i = 0; i < g_q.size(); ++i) g_q[i] -= g_q_pos[i];
    Vector g_p = detail::cosine_grad(vp, vq);
    for (auto& x : g_p) x = -x;
    const Vector g_n = detail::cosine_grad(vn, vq);

    detail::backward_paper(fq, q, g_q, fusion, out.gradient);
    detail::backward_paper(fp, p, g_p, fusion, out.gradient);
    detail::backward_paper(fn, n, g_n, fusion, out.gradient);
    return out;
}

inline TripletGradient loss_gradients(const TripletInstance& inst, const ShallowModel& model, const Corpus& corpus,
                                      const TrainConfig& config) {
    return loss_gradients(inst, model, FeatureCache(corpus, model.feature_dim()), config.fusion, config.margin);
}

// ---------------------------------------------------------------------------
// Negative sampling
// ---------------------------------------------------------------------------

/// Candidate pool of a query minus its golds.
inline std::vector<std::string> negative_pool(const Corpus& corpus, const LabelEntry& entry, Scope scope,
                                              bool exclude_cited) {
    const GoldSet golds = gold_set(entry);
    std::vector<std::string> out;
    for (auto& id : candidate_pool(corpus, entry.submission_id, scope, exclude_cited)) {
        if (!golds.contains(id)) out.push_back(std::move(id));
    }
    return out;
}

namespace detail {

/// `count` uniform draws from `pool`, distinct while the pool allows it.
inline std::vector<std::string> draw(const std::vector<std::string>& pool, std::size_t count, Rng& rng) {
    std::vector<std::string> out;
    if (count == 0) return out;
    if (pool.empty()) throw Error(ErrorCode::ExhaustedPool, "no eligible negative");
    std::set<std::uint64_t> used;
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t idx = rng.uniform_index(pool.size());
        if (used.size() < pool.size()) {
            while (used.contains(idx)) idx = rng.uniform_index(pool.size());
        }
        used.insert(idx);
        out.push_back(pool[static_cast<std::size_t>(idx)]);
    }
    return out;
}

}  // namespace detail

/// Triplets for one group of positives of one query: `ratio.hard` hard and
/// `ratio.easy` easy negatives are drawn for the group and paired with each
/// positive in it.
inline std::vector<TripletInstance> sample_group(const LabelEntry& entry, std::span<const std::string> positives,
                                                 const std::vector<std::string>& easy_pool,
                                                 const HardNegativeTable& table, const SamplingRatio& ratio, Rng& rng) {
    static const std::vector<std::string> kNoRow;
    const auto it = table.find(entry.submission_id);
    const auto& hard_pool = it == table.end() ? kNoRow : it->second;
    if (easy_pool.empty() && (ratio.hard > 0 || ratio.easy > 0)) {
        throw Error(ErrorCode::ExhaustedPool, entry.submission_id);
    }
    if (ratio.hard > 0 && hard_pool.empty()) throw Error(ErrorCode::ExhaustedPool, entry.submission_id);
    const auto hard = detail::draw(hard_pool, ratio.hard, rng);
    const auto easy = detail::draw(easy_pool, ratio.easy, rng);
    std::vector<TripletInstance> out;
    for (const auto& pos : positives) {
        for (const auto& neg : hard) out.push_back({entry.submission_id, pos, neg, NegativeKind::Hard});
        for (const auto& neg : easy) out.push_back({entry.submission_id, pos, neg, NegativeKind::Easy});
    }
    return out;
}

/// All triplets of one pass over the training split, in label order.
inline std::vector<TripletInstance> sample_instances(const LabelSet& labels, const Corpus& corpus,
                                                     const HardNegativeTable& table, const SamplingRatio& ratio,
                                                     Rng& rng, Scope scope = Scope::Core, bool exclude_cited = false) {
    std::vector<TripletInstance> out;
    for (const auto* entry : labels.in_split(Split::Train)) {
        const auto pool = negative_pool(corpus, *entry, scope, exclude_cited);
        const std::span<const std::string> golds(entry->gold_ids);
        for (std::size_t start = 0; start < golds.size(); start += ratio.positives) {
            const auto group = golds.subspan(start, std::min<std::size_t>(ratio.positives, golds.size() - start));
            auto part = sample_group(*entry, group, pool, table, ratio, rng);
            out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hard negatives
// ---------------------------------------------------------------------------

/// Nearest non-gold candidates of every training query under the given
/// fused embeddings. Ties go to the smaller id.
inline HardNegativeTable hard_negatives_from(const EncodedCorpus& encoded, const Corpus& corpus,
                                             const LabelSet& labels, std::size_t k_n, Scope scope,
                                             bool exclude_cited, std::size_t threads = 1) {
    if (k_n < 1) throw Error(ErrorCode::InvalidArgument, "K_n must be >= 1");
    const auto queries = labels.in_split(Split::Train);
    std::vector<std::vector<std::string>> rows(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) {
        const auto& entry = *queries[i];
        const auto pool = negative_pool(corpus, entry, scope, exclude_cited);
        const auto ranked = make_ranked_list(
            [&] {
                std::vector<ScoredId> items;
                items.reserve(pool.size());
                const auto& q = encoded.at(entry.submission_id);
                for (const auto& id : pool) items.push_back({id, cosine_similarity(q, encoded.at(id))});
                return items;
            }(),
            k_n);
        rows[i].reserve(ranked.size());
        for (const auto& s : ranked) rows[i].push_back(s.id);
    });
    HardNegativeTable table;
    for (std::size_t i = 0; i < queries.size(); ++i) table.emplace(queries[i]->submission_id, std::move(rows[i]));
    return table;
}

inline HardNegativeTable refresh_hard_negatives(const EmbeddingProvider& provider, const Corpus& corpus,
                                                const LabelSet& labels, std::size_t k_n, const TrainConfig& config) {
    const auto encoded = encode_corpus(provider, corpus, config.fusion, config.threads);
    return hard_negatives_from(encoded, corpus, labels, k_n, config.scope, config.exclude_cited, config.threads);
}

/// Fused embeddings of every record under `model`, reusing cached features.
inline EncodedCorpus encode_with_features(const ShallowModel& model, const Corpus& corpus,
                                          const FeatureCache& features, const FusionConfig& fusion,
                                          std::size_t threads) {
    std::vector<Vector> vectors(corpus.size());
    parallel_for(corpus.size(), threads, [&](std::size_t i) {
        vectors[i] = forward_paper(model, features.all()[i], fusion).trace.fused.values;
    });
    return {corpus, std::move(vectors)};
}

// ---------------------------------------------------------------------------
// Optimizer and training loop
// ---------------------------------------------------------------------------

/// AdamW with decoupled weight decay: w -= lr * wd * w, then the usual
/// bias-corrected Adam step.
class AdamW {
public:
    AdamW(std::size_t size, const TrainConfig& config)
        : m_(size, 0.0), v_(size, 0.0), lr_(config.learning_rate), wd_(config.weight_decay),
          beta1_(config.beta1), beta2_(config.beta2), eps_(config.epsilon), threads_(config.threads) {}

    void step(ShallowModel& model, const SparseGradient& grad) {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        const std::uint32_t dim = model.embed_dim();
        auto weights = model.weights();
        const auto& rows = grad.rows();

        // Every parameter moves, gradient or not: moments decay and weight
        // decay applies everywhere.
        const std::size_t feature_dim = model.feature_dim();
        const std::size_t blocks = std::max<std::size_t>(1, std::min<std::size_t>(threads_, 64));
        const std::size_t block_rows = (feature_dim + blocks - 1) / blocks;
        parallel_for(blocks, threads_, [&](std::size_t b) {
            const std::size_t row_begin = b * block_rows;
            const std::size_t row_end = std::min(feature_dim, row_begin + block_rows);
            auto next = rows.lower_bound(static_cast<std::uint32_t>(row_begin));
            for (std::size_t r = row_begin; r < row_end; ++r) {
                const double* g = nullptr;
                if (next != rows.end() && next->first == r) {
                    g = next->second.data();
                    ++next;
                }
                for (std::uint32_t j = 0; j < dim; ++j) {
                    const std::size_t i = r * dim + j;
                    const double gi = g != nullptr ? g[j] : 0.0;
                    weights[i] -= lr_ * wd_ * weights[i];
                    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gi;
                    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gi * gi;
                    const double m_hat = m_[i] / bc1;
                    const double v_hat = v_[i] / bc2;
                    weights[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
                }
            }
        });
    }

    [[nodiscard]] std::uint64_t steps() const noexcept { return t_; }

private:
    std::vector<double> m_;
    std::vector<double> v_;
    double lr_, wd_, beta1_, beta2_, eps_;
    std::size_t threads_;
    std::uint64_t t_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    std::size_t instances = 0;
    std::size_t hard_instances = 0;
    std::size_t refreshes = 0;  // hard-negative rebuilds during the epoch
    std::optional<MetricsReport> monitor;
};

struct TrainResult {
    ShallowModel model;
    std::vector<EpochRecord> history;
};

inline TrainResult train(const TrainConfig& config, const Corpus& corpus, const LabelSet& labels,
                         ShallowModel initial) {
    config.validate();
    const auto train_queries = labels.in_split(Split::Train);
    if (train_queries.empty()) throw Error(ErrorCode::EmptySplit, "train");

    TrainResult result{std::move(initial), {}};
    ShallowModel& model = result.model;
    const FeatureCache features(corpus, model.feature_dim());
    AdamW optimizer(model.weights().size(), config);
    Rng rng(config.seed);

    std::vector<std::vector<std::string>> easy_pools;
    easy_pools.reserve(train_queries.size());
    for (const auto* entry : train_queries) {
        easy_pools.push_back(negative_pool(corpus, *entry, config.scope, config.exclude_cited));
    }

    struct Unit {
        std::size_t query;
        std::size_t first_positive;
        std::size_t positives;
    };
    std::vector<Unit> units;
    for (std::size_t q = 0; q < train_queries.size(); ++q) {
        const std::size_t golds = train_queries[q]->gold_ids.size();
        for (std::size_t start = 0; start < golds; start += config.ratio.positives) {
            units.push_back({q, start, std::min<std::size_t>(config.ratio.positives, golds - start)});
        }
    }

    const auto rebuild_table = [&] {
        const auto encoded = encode_with_features(model, corpus, features, config.fusion, config.threads);
        return hard_negatives_from(encoded, corpus, labels, config.k_n, config.scope, config.exclude_cited,
                                   config.threads);
    };

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        EpochRecord record;
        record.epoch = epoch;
        HardNegativeTable table;
        if (config.ratio.hard > 0) {
            table = rebuild_table();
            ++record.refreshes;
        }
        rng.shuffle(std::span<Unit>(units));
        double loss_sum = 0.0;
        for (const auto& unit : units) {
            const auto& entry = *train_queries[unit.query];
            const std::span<const std::string> positives(entry.gold_ids.data() + unit.first_positive, unit.positives);
            const auto instances = sample_group(entry, positives, easy_pools[unit.query], table, config.ratio, rng);
            for (const auto& inst : instances) {
                const auto step = loss_gradients(inst, model, features, config.fusion, config.margin);
                optimizer.step(model, step.gradient);
                loss_sum += step.loss;
                ++record.instances;
                if (inst.kind == NegativeKind::Hard) ++record.hard_instances;
                if (optimizer.steps() % config.refresh_every == 0 && config.ratio.hard > 0) {
                    table = rebuild_table();
                    ++record.refreshes;
                }
            }
        }
        record.mean_loss = record.instances > 0 ? loss_sum / static_cast<double>(record.instances) : 0.0;
        if (config.monitor_split && !labels.in_split(*config.monitor_split).empty()) {
            const auto encoded = encode_with_features(model, corpus, features, config.fusion, config.threads);
            EvalOptions opts;
            opts.split = *config.monitor_split;
            opts.scope = config.scope;
            opts.k = config.monitor_k;
            opts.exclude_cited = config.exclude_cited;
            opts.threads = config.threads;
            record.monitor = evaluate_encoded(encoded, corpus, labels, opts);
        }
        result.history.push_back(std::move(record));
    }
    return result;
}

}  // namespace rmc
