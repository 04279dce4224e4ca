#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fsn/affine.hpp"
#include "fsn/classifier.hpp"
#include "fsn/episode.hpp"

namespace fsn {

// Per-episode accuracies (percent) and confusion counts, rows = true class,
// columns = predicted, both in classifier column order.
struct EvalReport {
    double novel_acc = 0.0;
    double base_acc = 0.0;
    double all_acc_mean = 0.0;   // (novel_acc + base_acc) / 2
    double all_acc_joint = 0.0;  // pooled query accuracy
    std::vector<double> per_class_acc;
    std::vector<std::vector<std::uint64_t>> confusion;
    double base_to_novel_rate = 0.0;  // base queries predicted as any novel class
    double novel_to_base_rate = 0.0;
};

// Cross-episode mean and 95% half-width (1.96 * s / sqrt(T), sample std).
struct MetricAggregate {
    double mean = 0.0;
    std::optional<double> half_width;  // absent when T < 2
};

struct EpisodeAggregate {
    MetricAggregate novel_acc;
    MetricAggregate base_acc;
    MetricAggregate all_acc_mean;
    MetricAggregate all_acc_joint;
    MetricAggregate base_to_novel_rate;
    std::size_t episodes = 0;
};

// Argmax over affine-adjusted logits; ties break to the lowest column index.
std::uint32_t predict(const LinearClassifier& clf, const AffineParams* params,
                      const FeatureVector& f, LogitMode mode = LogitMode::linear,
                      double cosine_scale = 10.0);

EvalReport evaluate(const LinearClassifier& clf, const AffineParams* params,
                    const Episode& episode, LogitMode mode = LogitMode::linear,
                    double cosine_scale = 10.0);

EpisodeAggregate aggregate(const std::vector<EvalReport>& reports);

// Conditional accuracy bounds: base classifier restricted to base classes on
// base_query, and a novel-only classifier on novel_query.
std::pair<double, double> upper_bounds(const LinearClassifier& pretrained,
                                       const LinearClassifier& novel_only,
                                       const Episode& episode);

}  // namespace fsn
