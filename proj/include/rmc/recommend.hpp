#pragma once

/** \file recommend.hpp
 *  \brief One-shot recommendation for a submission, shared by the CLI and
 *  the HTTP service.
 *
 * Request object: `title` (required), `abstract`, `references`, `k`
 * (default 10) and an optional `id`. The id excludes the paper itself from
 * the candidates and is how store-backed providers find its content vector.
 */

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmc/corpus.hpp"
#include "rmc/embedder.hpp"
#include "rmc/encoding.hpp"
#include "rmc/error.hpp"
#include "rmc/fusion.hpp"

namespace rmc {

struct RecommendRequest {
    std::optional<std::string> id;
    std::string title;
    std::string abstract;
    std::vector<std::string> references;
    std::size_t k = 10;
};

struct Recommendation {
    std::string id;
    double score = 0.0;
    std::string title;

    friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct RecommendResponse {
    std::vector<Recommendation> results;

    friend bool operator==(const RecommendResponse&, const RecommendResponse&) = default;
};

inline RecommendRequest request_from_json(const nlohmann::json& obj) {
    const std::string where = "request";
    if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, where + ": not an object");
    RecommendRequest req;
    req.title = detail::required_string(obj, "title", where);
    if (req.title.empty()) throw Error(ErrorCode::MalformedRecord, where + ": empty title");
    if (const auto* v = detail::optional_field(obj, "id")) {
        if (!v->is_string()) throw Error(ErrorCode::MalformedRecord, where + ": 'id' is not a string");
        req.id = v->get<std::string>();
    }
    if (const auto* v = detail::optional_field(obj, "abstract")) {
        if (!v->is_string()) throw Error(ErrorCode::MalformedRecord, where + ": 'abstract' is not a string");
        req.abstract = v->get<std::string>();
    }
    if (const auto* v = detail::optional_field(obj, "references")) {
        req.references = detail::string_array(*v, "references", where);
    }
    if (const auto* v = detail::optional_field(obj, "k")) {
        if (!v->is_number_integer()) throw Error(ErrorCode::MalformedRecord, where + ": 'k' is not an integer");
        if (v->get<long long>() < 1) throw Error(ErrorCode::BadK, v->dump());
        req.k = v->get<std::size_t>();
    }
    return req;
}

inline RecommendRequest parse_request(std::string_view text) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        throw Error(ErrorCode::MalformedRecord, "request: invalid syntax");
    }
    return request_from_json(obj);
}

inline nlohmann::ordered_json to_json(const RecommendResponse& resp) {
    auto results = nlohmann::ordered_json::array();
    for (const auto& r : resp.results) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["score"] = r.score;
        j["title"] = r.title;
        results.push_back(std::move(j));
    }
    nlohmann::ordered_json out;
    out["results"] = std::move(results);
    return out;
}

/// Ranks the corpus for ad-hoc submissions. Every candidate is encoded once
/// at construction; `recommend` is const and safe to call concurrently.
class Recommender {
public:
    Recommender(const Corpus& corpus, const EmbeddingProvider& provider, FusionConfig fusion,
                Scope scope = Scope::Core, bool exclude_cited = false, std::size_t threads = 1)
        : corpus_(&corpus),
          provider_(&provider),
          fusion_(fusion),
          scope_(scope),
          exclude_cited_(exclude_cited),
          encoded_(encode_corpus(provider, corpus, fusion, threads)) {
        fusion_.validate();
    }

    [[nodiscard]] RecommendResponse recommend(const RecommendRequest& req) const {
        if (req.k < 1) throw Error(ErrorCode::BadK, std::to_string(req.k));
        PaperRecord query;
        query.id = req.id.value_or("");
        query.title = req.title;
        query.abstract = req.abstract;
        query.references = req.references;

        const auto pool = candidate_pool(*corpus_, query, scope_, exclude_cited_);
        const Vector q = encode_paper(*provider_, query, fusion_).values;
        auto ranked = rank_against(q, pool, encoded_);
        if (ranked.size() > req.k) ranked.resize(req.k);

        RecommendResponse resp;
        resp.results.reserve(ranked.size());
        for (auto& s : ranked) {
            resp.results.push_back({s.id, s.score, corpus_->at(s.id).title});
        }
        return resp;
    }

private:
    const Corpus* corpus_;
    const EmbeddingProvider* provider_;
    FusionConfig fusion_;
    Scope scope_;
    bool exclude_cited_;
    EncodedCorpus encoded_;
};

}  // namespace rmc
