#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rmc/corpus.hpp"
#include "rmc/embedder.hpp"
#include "rmc/fusion.hpp"
#include "rmc/ranking.hpp"

namespace rmc {

/// Runs fn(i) for i in [0, n) on up to `threads` threads. Each index is
/// handled exactly once, so results written per index do not depend on the
/// thread count. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
}

/// Fused embeddings of every corpus record, indexed like `corpus.records()`.
class EncodedCorpus {
public:
    EncodedCorpus() = default;
    EncodedCorpus(const Corpus& corpus, std::vector<Vector> vectors) : vectors_(std::move(vectors)) {
        index_.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) index_.emplace(corpus.records()[i].id, i);
    }

    [[nodiscard]] const Vector& at(const std::string& id) const {
        const auto it = index_.find(id);
        if (it == index_.end()) throw Error(ErrorCode::UnknownPaper, id);
        return vectors_[it->second];
    }

    [[nodiscard]] const std::vector<Vector>& vectors() const noexcept { return vectors_; }

private:
    std::vector<Vector> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline EncodedCorpus encode_corpus(const EmbeddingProvider& provider, const Corpus& corpus,
                                   const FusionConfig& config, std::size_t threads = 1) {
    std::vector<Vector> vectors(corpus.size());
    parallel_for(corpus.size(), threads, [&](std::size_t i) {
        vectors[i] = encode_paper(provider, corpus.records()[i], config).values;
    });
    return {corpus, std::move(vectors)};
}

/// Full ranking of `candidates` by cosine to `query`.
inline RankedList rank_against(const Vector& query, const CandidateSet& candidates, const EncodedCorpus& encoded) {
    std::vector<ScoredId> items;
    items.reserve(candidates.size());
    for (const auto& id : candidates) items.push_back({id, cosine_similarity(query, encoded.at(id))});
    return make_ranked_list(std::move(items));
}

/// Encodes the query and every candidate, then ranks by cosine.
inline RankedList rank_candidates(const EmbeddingProvider& provider, const Corpus& corpus, const PaperRecord& query,
                                  const CandidateSet& candidates, const FusionConfig& config) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidates");
    const Vector q = encode_paper(provider, query, config).values;
    std::vector<ScoredId> items;
    items.reserve(candidates.size());
    for (const auto& id : candidates) {
        if (id == query.id) throw Error(ErrorCode::InvalidArgument, "candidate set contains the query");
        items.push_back({id, cosine_similarity(q, encode_paper(provider, corpus.at(id), config).values)});
    }
    return make_ranked_list(std::move(items));
}

}  // namespace rmc
