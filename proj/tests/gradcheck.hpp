#pragma once

// Central finite differences over every projection entry, compared with the
// analytic gradient as a norm-wise relative error.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rmc/trainer.hpp"

namespace gradcheck {

struct Fixture {
    rmc::Corpus corpus;
    std::vector<rmc::TripletInstance> instances;
};

// Papers over a 40-word vocabulary with 0..max_refs reference titles each.
inline Fixture random_fixture(rmc::Rng& rng, std::size_t papers, std::size_t max_refs) {
    Fixture fx;
    const auto text = [&](std::size_t n) {
        std::string s;
        for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(rng.uniform_index(40)) + " ";
        return s;
    };
    for (std::size_t i = 0; i < papers; ++i) {
        rmc::PaperRecord r;
        r.id = "p" + std::to_string(i);
        r.title = text(2 + rng.uniform_index(4));
        r.abstract = text(rng.uniform_index(8));
        for (auto k = rng.uniform_index(max_refs + 1); k > 0; --k) r.references.push_back(text(1 + rng.uniform_index(3)));
        fx.corpus.add(std::move(r));
    }
    return fx;
}

inline rmc::TripletInstance random_instance(rmc::Rng& rng, std::size_t papers) {
    std::size_t ids[3];
    ids[0] = rng.uniform_index(papers);
    do ids[1] = rng.uniform_index(papers); while (ids[1] == ids[0]);
    do ids[2] = rng.uniform_index(papers); while (ids[2] == ids[0] || ids[2] == ids[1]);
    return {"p" + std::to_string(ids[0]), "p" + std::to_string(ids[1]), "p" + std::to_string(ids[2])};
}

struct Result {
    double loss = 0.0;
    double hinge = 0.0;  // signed margin violation; near 0 means near the kink
    double rel_error = 0.0;
};

inline double hinge_value(const rmc::TripletInstance& inst, const rmc::ShallowModel& model,
                          const rmc::FeatureCache& features, const rmc::FusionConfig& fusion, double margin) {
    const auto q = rmc::forward_paper(model, features.at(inst.query_id), fusion).trace.fused.values;
    const auto p = rmc::forward_paper(model, features.at(inst.positive_id), fusion).trace.fused.values;
    const auto n = rmc::forward_paper(model, features.at(inst.negative_id), fusion).trace.fused.values;
    return rmc::cosine_similarity(q, n) - rmc::cosine_similarity(q, p) + margin;
}

inline Result check(const rmc::TripletInstance& inst, rmc::ShallowModel& model, const rmc::FeatureCache& features,
                    const rmc::FusionConfig& fusion, double margin, double step = 1e-4) {
    Result r;
    r.hinge = hinge_value(inst, model, features, fusion, margin);
    const auto analytic = rmc::loss_gradients(inst, model, features, fusion, margin);
    r.loss = analytic.loss;
    const auto dense = analytic.gradient.dense(model.feature_dim());
    auto w = model.weights();
    double diff2 = 0.0, fd2 = 0.0, an2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double keep = w[i];
        w[i] = keep + step;
        const double up = rmc::instance_loss(inst, model, features, fusion, margin);
        w[i] = keep - step;
        const double down = rmc::instance_loss(inst, model, features, fusion, margin);
        w[i] = keep;
        const double fd = (up - down) / (2 * step);
        diff2 += (fd - dense[i]) * (fd - dense[i]);
        fd2 += fd * fd;
        an2 += dense[i] * dense[i];
    }
    const double scale = std::max(std::sqrt(fd2), std::sqrt(an2));
    r.rel_error = scale > 0 ? std::sqrt(diff2) / scale : 0.0;
    return r;
}

}  // namespace gradcheck
