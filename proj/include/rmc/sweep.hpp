#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rmc/embedder.hpp"
#include "rmc/error.hpp"
#include "rmc/eval.hpp"
#include "rmc/fusion.hpp"
#include "rmc/trainer.hpp"

namespace rmc {

/// "lo:hi:step" -> lo, lo + step, ..., hi. The last value is exactly `hi`
/// when the range divides evenly (within 1e-9 steps).
inline std::vector<double> parse_grid(std::string_view spec) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = spec.find(':', start);
        const auto piece = std::string(spec.substr(start, colon == std::string_view::npos ? spec.npos : colon - start));
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(piece, &used));
            if (used != piece.size()) throw std::invalid_argument(piece);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "grid " + std::string(spec));
        }
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        throw Error(ErrorCode::InvalidArgument, "grid " + std::string(spec));
    }
    const double lo = parts[0];
    const double hi = parts[1];
    const double step = parts[2];
    const double span = (hi - lo) / step;
    const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<double> values;
    values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) values.push_back(lo + static_cast<double>(i) * step);
    if (std::abs(span - std::round(span)) < 1e-9) values.back() = hi;
    return values;
}

struct SweepRow {
    std::string parameter;  // "alpha" or "ratio"
    std::string value;      // printed parameter value
    double alpha = 0.0;
    SamplingRatio ratio;
    MetricsReport report;
};

/// Re-evaluates with a different fusion alpha per row; no retraining.
inline std::vector<SweepRow> sweep_alpha(const EmbeddingProvider& provider, const Corpus& corpus,
                                         const LabelSet& labels, FusionConfig base, const std::vector<double>& alphas,
                                         const EvalOptions& options) {
    std::vector<SweepRow> rows;
    rows.reserve(alphas.size());
    for (const double alpha : alphas) {
        base.alpha = alpha;
        base.validate();
        SweepRow row;
        row.parameter = "alpha";
        nlohmann::json v = alpha;
        row.value = v.dump();
        row.alpha = alpha;
        row.report = evaluate(provider, corpus, labels, base, options);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Retrains from `initial` once per sampling ratio and evaluates the result.
inline std::vector<SweepRow> sweep_ratio(TrainConfig config, const Corpus& corpus, const LabelSet& labels,
                                         const ShallowModel& initial, const std::vector<SamplingRatio>& ratios,
                                         const EvalOptions& options) {
    std::vector<SweepRow> rows;
    rows.reserve(ratios.size());
    for (const auto& ratio : ratios) {
        config.ratio = ratio;
        const auto trained = train(config, corpus, labels, initial);
        const ShallowProvider provider(trained.model);
        SweepRow row;
        row.parameter = "ratio";
        row.value = to_string(ratio);
        row.alpha = config.fusion.alpha;
        row.ratio = ratio;
        row.report = evaluate(provider, corpus, labels, config.fusion, options);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows, NdcgReport ndcg = NdcgReport::Both) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json j;
        j["parameter"] = row.parameter;
        j["value"] = row.value;
        j["metrics"] = to_json(row.report, ndcg, false);
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace rmc
