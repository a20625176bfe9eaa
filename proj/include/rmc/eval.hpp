#pragma once

/** \file eval.hpp
 *  \brief Ranking metrics and split evaluation.
 *
 * Metrics are computed per query and macro-averaged. `dcg_paper` is the
 * gain/discount sum sum_i (2^r(i) - 1) / log2(i + 1) over the whole ranked
 * list with binary relevance and no ideal normalization, so it exceeds 1
 * when a query has several golds. `ndcg_normalized` divides it by the
 * value obtained with every gold at the top.
 *
 * Queries whose golds are all outside the candidate pool score 0 and are
 * counted (`unreachable_queries`).
 */

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rmc/corpus.hpp"
#include "rmc/embedder.hpp"
#include "rmc/encoding.hpp"
#include "rmc/error.hpp"
#include "rmc/fusion.hpp"
#include "rmc/ranking.hpp"
#include "rmc/sparse_index.hpp"

namespace rmc {

inline constexpr std::size_t kDefaultRecallK = 10;

using GoldSet = std::unordered_set<std::string>;

namespace detail {
inline void require_golds(const GoldSet& golds) {
    if (golds.empty()) throw Error(ErrorCode::EmptyGolds, "no gold ids");
}
}  // namespace detail

inline double average_precision(const RankedList& ranked, const GoldSet& golds) {
    detail::require_golds(golds);
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (golds.contains(ranked[i].id)) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(golds.size());
}

inline double reciprocal_rank(const RankedList& ranked, const GoldSet& golds) {
    detail::require_golds(golds);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (golds.contains(ranked[i].id)) return 1.0 / static_cast<double>(i + 1);
    }
    return 0.0;
}

inline double dcg_paper(const RankedList& ranked, const GoldSet& golds) {
    detail::require_golds(golds);
    double sum = 0.0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (golds.contains(ranked[i].id)) sum += 1.0 / std::log2(static_cast<double>(i + 2));
    }
    return sum;
}

inline double ndcg_normalized(const RankedList& ranked, const GoldSet& golds) {
    const double dcg = dcg_paper(ranked, golds);
    const std::size_t ideal_hits = std::min(golds.size(), ranked.size());
    double ideal = 0.0;
    for (std::size_t i = 0; i < ideal_hits; ++i) ideal += 1.0 / std::log2(static_cast<double>(i + 2));
    return ideal == 0.0 ? 0.0 : dcg / ideal;
}

inline double recall_at_k(const RankedList& ranked, const GoldSet& golds, std::size_t k) {
    detail::require_golds(golds);
    if (k < 1) throw Error(ErrorCode::BadK, std::to_string(k));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (golds.contains(ranked[i].id)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(golds.size());
}

struct QueryMetrics {
    std::string query_id;
    double average_precision = 0.0;
    double reciprocal_rank = 0.0;
    double ndcg_paper = 0.0;
    double ndcg_normalized = 0.0;
    double recall = 0.0;
    bool reachable = true;  // at least one gold is in the candidate pool

    friend bool operator==(const QueryMetrics&, const QueryMetrics&) = default;
};

struct MetricsReport {
    std::size_t k = kDefaultRecallK;
    double map = 0.0;
    double mrr = 0.0;
    double ndcg_paper = 0.0;
    double ndcg_normalized = 0.0;
    double recall = 0.0;
    std::size_t unreachable_queries = 0;
    std::vector<QueryMetrics> per_query;  // sorted by query id

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

enum class NdcgReport { Paper, Normalized, Both };

inline NdcgReport parse_ndcg_report(std::string_view s) {
    if (s == "paper") return NdcgReport::Paper;
    if (s == "normalized") return NdcgReport::Normalized;
    if (s == "both") return NdcgReport::Both;
    throw Error(ErrorCode::InvalidArgument, "ndcg " + std::string(s));
}

inline QueryMetrics score_query(std::string query_id, const RankedList& ranked, const GoldSet& golds, std::size_t k) {
    QueryMetrics m;
    m.query_id = std::move(query_id);
    m.average_precision = average_precision(ranked, golds);
    m.reciprocal_rank = reciprocal_rank(ranked, golds);
    m.ndcg_paper = dcg_paper(ranked, golds);
    m.ndcg_normalized = ndcg_normalized(ranked, golds);
    m.recall = recall_at_k(ranked, golds, k);
    m.reachable = std::any_of(ranked.begin(), ranked.end(), [&](const ScoredId& s) { return golds.contains(s.id); });
    return m;
}

/// Macro average in ascending query-id order.
inline MetricsReport aggregate(std::vector<QueryMetrics> per_query, std::size_t k) {
    if (per_query.empty()) throw Error(ErrorCode::EmptySplit, "no queries to aggregate");
    std::sort(per_query.begin(), per_query.end(),
              [](const QueryMetrics& a, const QueryMetrics& b) { return a.query_id < b.query_id; });
    MetricsReport r;
    r.k = k;
    for (const auto& m : per_query) {
        r.map += m.average_precision;
        r.mrr += m.reciprocal_rank;
        r.ndcg_paper += m.ndcg_paper;
        r.ndcg_normalized += m.ndcg_normalized;
        r.recall += m.recall;
        if (!m.reachable) ++r.unreachable_queries;
    }
    const auto n = static_cast<double>(per_query.size());
    r.map /= n;
    r.mrr /= n;
    r.ndcg_paper /= n;
    r.ndcg_normalized /= n;
    r.recall /= n;
    r.per_query = std::move(per_query);
    return r;
}

struct EvalOptions {
    Split split = Split::Test;
    Scope scope = Scope::Core;
    std::size_t k = kDefaultRecallK;
    bool exclude_cited = false;
    std::size_t threads = 1;
};

inline GoldSet gold_set(const LabelEntry& entry) { return {entry.gold_ids.begin(), entry.gold_ids.end()}; }

/// Evaluates every query of a split against precomputed fused embeddings.
inline MetricsReport evaluate_encoded(const EncodedCorpus& encoded, const Corpus& corpus, const LabelSet& labels,
                                      const EvalOptions& options) {
    if (options.k < 1) throw Error(ErrorCode::BadK, std::to_string(options.k));
    const auto queries = labels.in_split(options.split);
    if (queries.empty()) throw Error(ErrorCode::EmptySplit, std::string(to_string(options.split)));
    std::vector<QueryMetrics> per_query(queries.size());
    parallel_for(queries.size(), options.threads, [&](std::size_t i) {
        const auto& entry = *queries[i];
        const auto pool = candidate_pool(corpus, entry.submission_id, options.scope, options.exclude_cited);
        const auto ranked = rank_against(encoded.at(entry.submission_id), pool, encoded);
        per_query[i] = score_query(entry.submission_id, ranked, gold_set(entry), options.k);
    });
    return aggregate(std::move(per_query), options.k);
}

inline MetricsReport evaluate(const EmbeddingProvider& provider, const Corpus& corpus, const LabelSet& labels,
                              const FusionConfig& fusion, const EvalOptions& options) {
    if (labels.in_split(options.split).empty()) {
        throw Error(ErrorCode::EmptySplit, std::string(to_string(options.split)));
    }
    const auto encoded = encode_corpus(provider, corpus, fusion, options.threads);
    return evaluate_encoded(encoded, corpus, labels, options);
}

/// BM25 baseline: the query text is the submission's title, abstract and
/// reference titles.
inline MetricsReport evaluate_bm25(const Bm25Index& index, const Corpus& corpus, const LabelSet& labels,
                                   const EvalOptions& options) {
    if (options.k < 1) throw Error(ErrorCode::BadK, std::to_string(options.k));
    const auto queries = labels.in_split(options.split);
    if (queries.empty()) throw Error(ErrorCode::EmptySplit, std::string(to_string(options.split)));
    std::vector<QueryMetrics> per_query(queries.size());
    parallel_for(queries.size(), options.threads, [&](std::size_t i) {
        const auto& entry = *queries[i];
        const auto& query = corpus.at(entry.submission_id);
        const auto pool = candidate_pool(corpus, query, options.scope, options.exclude_cited);
        const auto ranked = index.rank(tokenize(indexed_text(query)), pool);
        per_query[i] = score_query(entry.submission_id, ranked, gold_set(entry), options.k);
    });
    return aggregate(std::move(per_query), options.k);
}

inline nlohmann::ordered_json to_json(const MetricsReport& r, NdcgReport ndcg = NdcgReport::Both,
                                      bool include_per_query = true) {
    nlohmann::ordered_json j;
    j["k"] = r.k;
    j["queries"] = r.per_query.size();
    j["MAP"] = r.map;
    j["MRR"] = r.mrr;
    if (ndcg != NdcgReport::Normalized) j["NDCG_paper"] = r.ndcg_paper;
    if (ndcg != NdcgReport::Paper) j["NDCG_normalized"] = r.ndcg_normalized;
    j["Recall@K"] = r.recall;
    j["unreachable_queries"] = r.unreachable_queries;
    if (include_per_query) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& m : r.per_query) {
            nlohmann::ordered_json row;
            row["query_id"] = m.query_id;
            row["AP"] = m.average_precision;
            row["RR"] = m.reciprocal_rank;
            if (ndcg != NdcgReport::Normalized) row["NDCG_paper"] = m.ndcg_paper;
            if (ndcg != NdcgReport::Paper) row["NDCG_normalized"] = m.ndcg_normalized;
            row["Recall@K"] = m.recall;
            row["reachable"] = m.reachable;
            rows.push_back(std::move(row));
        }
        j["per_query"] = std::move(rows);
    }
    return j;
}

}  // namespace rmc
