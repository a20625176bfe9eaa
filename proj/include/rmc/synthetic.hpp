#pragma once

// Seeded generator of a planted-topic corpus for smoke runs and tests.
//
// Papers belong to a topic cluster. Inside a cluster, papers come in threads:
// one submission plus its gold recommendations. Consecutive threads are
// grouped into subtopics. Tokens are drawn from the thread pool, the subtopic
// pool, the cluster pool or a shared background pool. A few filler papers per
// cluster belong to no thread and are tagged extended.
// Within a cluster, thread t gets split kSplitCycle[t % 6], so every subtopic
// of two threads holds a training thread.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rmc/corpus.hpp"
#include "rmc/rng.hpp"

namespace rmc {

struct SyntheticSpec {
    std::size_t clusters = 10;
    std::size_t threads_per_cluster = 6;
    std::size_t threads_per_subtopic = 2;
    std::size_t fillers_per_cluster = 2;
    std::size_t golds_per_submission = 2;
    std::size_t thread_vocab = 12;
    std::size_t subtopic_vocab = 12;
    std::size_t cluster_vocab = 30;
    std::size_t shared_vocab = 500;
    double p_thread = 0.25;
    double p_subtopic = 0.2;
    double p_cluster = 0.25;
    std::size_t title_tokens = 8;
    std::size_t abstract_tokens = 40;
    std::size_t reference_tokens = 6;
    std::size_t min_references = 2;
    std::size_t max_references = 4;
    std::uint64_t seed = 7;
};

struct SyntheticDataset {
    Corpus corpus;
    LabelSet labels;
    std::vector<std::size_t> cluster_of;  // parallel to corpus.records()
};

inline SyntheticDataset make_synthetic(const SyntheticSpec& spec) {
    if (spec.golds_per_submission == 0 || spec.clusters == 0 || spec.threads_per_cluster == 0 || spec.threads_per_subtopic == 0 ||
        spec.min_references > spec.max_references) {
        throw Error(ErrorCode::InvalidArgument, "degenerate synthetic spec");
    }
    Rng rng(spec.seed);

    // thread < 0 draws filler text with no thread or subtopic pool
    const auto draw_text = [&](std::size_t cluster, long thread, std::size_t length) {
        const double cut_thread = thread >= 0 ? spec.p_thread : 0.0;
        const double cut_subtopic = thread >= 0 ? spec.p_thread + spec.p_subtopic : 0.0;
        const double cut_cluster = spec.p_thread + spec.p_subtopic + spec.p_cluster;
        const std::string c = "c" + std::to_string(cluster);
        std::string text;
        for (std::size_t i = 0; i < length; ++i) {
            const double u = rng.uniform01();
            std::string token;
            if (u < cut_thread) {
                token = c + "t" + std::to_string(thread) + "w" + std::to_string(rng.uniform_index(spec.thread_vocab));
            } else if (u < cut_subtopic) {
                token = c + "s" + std::to_string(static_cast<std::size_t>(thread) / spec.threads_per_subtopic) + "w" +
                        std::to_string(rng.uniform_index(spec.subtopic_vocab));
            } else if (u >= spec.p_thread + spec.p_subtopic && u < cut_cluster) {
                token = c + "w" + std::to_string(rng.uniform_index(spec.cluster_vocab));
            } else {
                token = "g" + std::to_string(rng.uniform_index(spec.shared_vocab));
            }
            if (!text.empty()) text.push_back(' ');
            text += token;
        }
        return text;
    };
    const auto make_paper = [&](std::string id, std::size_t cluster, long thread, Role role) {
        PaperRecord rec;
        rec.id = std::move(id);
        rec.title = draw_text(cluster, thread, spec.title_tokens);
        rec.abstract = draw_text(cluster, thread, spec.abstract_tokens);
        const std::size_t refs = spec.min_references + rng.uniform_index(spec.max_references - spec.min_references + 1);
        for (std::size_t r = 0; r < refs; ++r) rec.references.push_back(draw_text(cluster, thread, spec.reference_tokens));
        rec.year = 2015 + static_cast<int>(rng.uniform_index(8));
        rec.role = role;
        return rec;
    };

    static constexpr Split kSplitCycle[] = {Split::Train, Split::Test, Split::Train,
                                            Split::Test,  Split::Train, Split::Train};

    SyntheticDataset data;
    std::vector<LabelEntry> entries;
    for (std::size_t c = 0; c < spec.clusters; ++c) {
        const std::string prefix = "c" + std::to_string(c);
        for (std::size_t t = 0; t < spec.threads_per_cluster; ++t) {
            const std::string tp = prefix + "-t" + std::to_string(t);
            LabelEntry entry;
            entry.submission_id = tp + "-q";
            entry.split = kSplitCycle[t % 6];
            data.corpus.add(make_paper(entry.submission_id, c, static_cast<long>(t), Role::Submission));
            data.cluster_of.push_back(c);
            for (std::size_t g = 0; g < spec.golds_per_submission; ++g) {
                entry.gold_ids.push_back(tp + "-g" + std::to_string(g));
                data.corpus.add(make_paper(entry.gold_ids.back(), c, static_cast<long>(t), Role::Recommended));
                data.cluster_of.push_back(c);
            }
            entries.push_back(std::move(entry));
        }
        for (std::size_t f = 0; f < spec.fillers_per_cluster; ++f) {
            data.corpus.add(make_paper(prefix + "-x" + std::to_string(f), c, -1, Role::Extended));
            data.cluster_of.push_back(c);
        }
    }
    data.labels = LabelSet(std::move(entries));
    return data;
}

}  // namespace rmc
