#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace rmc {

struct ScoredId {
    std::string id;
    double score = 0.0;

    friend bool operator==(const ScoredId&, const ScoredId&) = default;
};

/// Descending score, ties by ascending id.
struct RankOrder {
    bool operator()(const ScoredId& a, const ScoredId& b) const {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    }
};

using RankedList = std::vector<ScoredId>;

inline RankedList make_ranked_list(std::vector<ScoredId> items) {
    std::sort(items.begin(), items.end(), RankOrder{});
    return items;
}

/// Keeps the first `k` entries of the ranking of `items`.
inline RankedList make_ranked_list(std::vector<ScoredId> items, std::size_t k) {
    if (k < items.size()) {
        std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k), items.end(),
                          RankOrder{});
        items.resize(k);
        return items;
    }
    return make_ranked_list(std::move(items));
}

}  // namespace rmc
