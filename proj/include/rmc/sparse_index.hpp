#pragma once

/** \file sparse_index.hpp
 *  \brief Okapi BM25 inverted index, the sparse retrieval baseline.
 *
 * Documents are the concatenation of title, abstract and every reference
 * title. idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)), which is never
 * negative.
 */

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rmc/corpus.hpp"
#include "rmc/error.hpp"
#include "rmc/ranking.hpp"
#include "rmc/textproc.hpp"

namespace rmc {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    void validate() const {
        if (!(k1 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "k1 must be >= 0");
        if (!(b >= 0.0 && b <= 1.0)) throw Error(ErrorCode::InvalidArgument, "b must be in [0,1]");
    }
};

/// Text indexed for a paper.
inline std::string indexed_text(const PaperRecord& rec) {
    std::string text = rec.title;
    text += ' ';
    text += rec.abstract;
    for (const auto& ref : rec.references) {
        text += ' ';
        text += ref;
    }
    return text;
}

class Bm25Index {
public:
    struct Posting {
        std::uint32_t doc;  // dense document number
        std::uint32_t tf;
    };

    /// Indexes pre-tokenized documents. `ids` and `docs` are parallel.
    Bm25Index(std::vector<std::string> ids, const std::vector<TokenSequence>& docs, Bm25Params params)
        : params_(params), ids_(std::move(ids)) {
        params_.validate();
        if (ids_.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents");
        if (ids_.size() != docs.size()) throw Error(ErrorCode::InvalidArgument, "ids/docs size mismatch");
        doc_lengths_.reserve(docs.size());
        double total = 0.0;
        for (std::uint32_t d = 0; d < docs.size(); ++d) {
            if (!doc_number_.emplace(ids_[d], d).second) throw Error(ErrorCode::DuplicateId, ids_[d]);
            std::unordered_map<std::string_view, std::uint32_t> tf;
            for (const auto& tok : docs[d]) ++tf[tok];
            for (const auto& tok : docs[d]) {
                const auto it = tf.find(tok);
                if (it->second == 0) continue;  // already posted
                postings_[tok].push_back({d, it->second});
                it->second = 0;
            }
            doc_lengths_.push_back(static_cast<std::uint32_t>(docs[d].size()));
            total += static_cast<double>(docs[d].size());
        }
        avg_doc_length_ = total / static_cast<double>(docs.size());
    }

    [[nodiscard]] std::size_t doc_count() const noexcept { return ids_.size(); }
    [[nodiscard]] double avg_doc_length() const noexcept { return avg_doc_length_; }
    [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }
    [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }

    [[nodiscard]] std::uint32_t doc_length(std::string_view id) const { return doc_lengths_[doc_number(id)]; }

    [[nodiscard]] std::uint32_t doc_number(std::string_view id) const {
        const auto it = doc_number_.find(std::string(id));
        if (it == doc_number_.end()) throw Error(ErrorCode::UnknownDoc, std::string(id));
        return it->second;
    }

    [[nodiscard]] const std::vector<Posting>* postings(std::string_view term) const {
        const auto it = postings_.find(std::string(term));
        return it == postings_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] double idf(std::string_view term) const {
        const auto* list = postings(term);
        if (list == nullptr) return 0.0;
        const auto n = static_cast<double>(doc_count());
        const auto df = static_cast<double>(list->size());
        return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    }

    /// Contribution of one query term occurring `tf` times in a document of
    /// length `doc_len`.
    [[nodiscard]] double term_score(double idf, std::uint32_t tf, std::uint32_t doc_len) const {
        const double f = static_cast<double>(tf);
        const double norm = params_.k1 * (1.0 - params_.b + params_.b * doc_len / avg_doc_length_);
        return idf * f * (params_.k1 + 1.0) / (f + norm);
    }

    /// Score of one document; query terms are a multiset.
    [[nodiscard]] double score(const TokenSequence& query, std::string_view id) const {
        const std::uint32_t d = doc_number(id);
        double total = 0.0;
        for (const auto& term : query) {
            const auto* list = postings(term);
            if (list == nullptr) continue;
            for (const auto& p : *list) {
                if (p.doc == d) {
                    total += term_score(idf(term), p.tf, doc_lengths_[d]);
                    break;
                }
            }
        }
        return total;
    }

    /// Scores every document term-at-a-time. Accumulation runs in query
    /// order, so each entry equals `score(query, id)` exactly.
    [[nodiscard]] std::vector<double> score_all(const TokenSequence& query) const {
        std::vector<double> scores(doc_count(), 0.0);
        for (const auto& term : query) {
            const auto* list = postings(term);
            if (list == nullptr) continue;
            const double term_idf = idf(term);
            for (const auto& p : *list) scores[p.doc] += term_score(term_idf, p.tf, doc_lengths_[p.doc]);
        }
        return scores;
    }

    /// Best `k` documents not in `exclude`. Zero-score documents are ranked
    /// too, so a large `k` returns the whole index.
    [[nodiscard]] RankedList top_k(const TokenSequence& query, std::size_t k,
                                   const std::unordered_set<std::string>& exclude = {}) const {
        if (k < 1) throw Error(ErrorCode::BadK, std::to_string(k));
        const auto scores = score_all(query);
        std::vector<ScoredId> items;
        items.reserve(scores.size());
        for (std::size_t d = 0; d < scores.size(); ++d) {
            if (!exclude.contains(ids_[d])) items.push_back({ids_[d], scores[d]});
        }
        return make_ranked_list(std::move(items), k);
    }

    /// Full ranking restricted to `candidates`.
    [[nodiscard]] RankedList rank(const TokenSequence& query, const CandidateSet& candidates) const {
        const auto scores = score_all(query);
        std::vector<ScoredId> items;
        items.reserve(candidates.size());
        for (const auto& id : candidates) items.push_back({id, scores[doc_number(id)]});
        return make_ranked_list(std::move(items));
    }

private:
    Bm25Params params_;
    std::vector<std::string> ids_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
    std::unordered_map<std::string, std::uint32_t> doc_number_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
};

inline Bm25Index build_index(const Corpus& corpus, Bm25Params params = {}) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "corpus has no records");
    std::vector<std::string> ids;
    std::vector<TokenSequence> docs;
    ids.reserve(corpus.size());
    docs.reserve(corpus.size());
    for (const auto& rec : corpus.records()) {
        ids.push_back(rec.id);
        docs.push_back(tokenize(indexed_text(rec)));
    }
    return Bm25Index(std::move(ids), docs, params);
}

}  // namespace rmc
