#include "fsn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "fsn/error.hpp"

namespace fsn {

void TrainConfig::validate() const {
    if (learning_rate < 0.0) throw UsageError("learning rate must be non-negative");
    if (momentum < 0.0 || momentum >= 1.0) throw UsageError("momentum must be in [0,1)");
    if (weight_decay < 0.0 || l1_coefficient < 0.0)
        throw UsageError("regularization coefficients must be non-negative");
    if (iterations == 0) throw UsageError("iterations must be >= 1");
    if (init_scale && *init_scale < 0.0) throw UsageError("init scale must be non-negative");
}

TrainConfig TrainConfig::finetune_defaults(std::uint32_t k_shot) {
    TrainConfig cfg;
    cfg.iterations = 500;
    cfg.batch_size = kFullBatch;
    if (k_shot <= 1)
        cfg.learning_rate = 0.005;
    else if (k_shot <= 5)
        cfg.learning_rate = 0.003;
    else
        cfg.learning_rate = 0.001;
    return cfg;
}

void sgd_step(LinearClassifier& clf, const std::vector<double>& grad, SgdState& state,
              const TrainConfig& cfg, const std::vector<bool>* column_mask) {
    const std::uint32_t d = clf.dim;
    const std::uint32_t n = clf.class_count();
    if (grad.size() != clf.weights.size() || state.velocity.size() != clf.weights.size())
        throw DataError("gradient/classifier shape mismatch");
    for (std::uint32_t i = 0; i < n; ++i) {
        if (column_mask && (*column_mask)[i]) continue;
        double* w = clf.weights.data() + static_cast<std::size_t>(i) * d;
        double* v = state.velocity.data() + static_cast<std::size_t>(i) * d;
        const double* g = grad.data() + static_cast<std::size_t>(i) * d;
        for (std::uint32_t j = 0; j < d; ++j) {
            double gj = g[j];
            if (cfg.regularizer == Regularizer::l2_decay)
                gj += cfg.weight_decay * w[j];
            else if (cfg.regularizer == Regularizer::l1)
                gj += cfg.l1_coefficient * (w[j] > 0.0 ? 1.0 : (w[j] < 0.0 ? -1.0 : 0.0));
            v[j] = cfg.momentum * v[j] + gj;
            w[j] -= cfg.learning_rate * v[j];
        }
    }
}

namespace {

void check_finite(const LinearClassifier& clf) {
    for (double v : clf.weights)
        if (!std::isfinite(v)) throw NumericError("NaN/Inf in classifier weights");
}

// Averaged full-gradient over the given sample indices.
std::vector<double> batch_gradient(const LinearClassifier& clf,
                                   const std::vector<LabeledFeature>& samples,
                                   const std::vector<std::size_t>& batch,
                                   const std::unordered_map<std::uint32_t, std::uint32_t>& col_of,
                                   bool cosine, double cosine_scale) {
    std::vector<double> acc(clf.weights.size(), 0.0);
    for (auto si : batch) {
        const auto& s = samples[si];
        const std::uint32_t label = col_of.at(s.label);
        const auto z = logits(clf, s.feature, cosine ? LogitMode::cosine : LogitMode::linear,
                              cosine_scale);
        const auto p = softmax(z);
        const auto g = cosine
                           ? ce_gradient_cosine(clf, s.feature, p, label, cosine_scale)
                           : ce_gradient(s.feature, p, label, clf.dim);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& v : acc) v *= inv;
    return acc;
}

}  // namespace

LinearClassifier train_base(const FeatureDataset& base, const TrainConfig& cfg) {
    cfg.validate();
    if (base.samples.empty()) throw DataError("empty base dataset");

    LinearClassifier clf;
    clf.dim = base.dim;
    clf.base_class_count = static_cast<std::uint32_t>(base.classes.size());
    clf.novel_class_count = 0;
    clf.class_map = base.classes;
    clf.weights.resize(static_cast<std::size_t>(clf.dim) * clf.base_class_count);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> init(
        0.0, cfg.init_scale.value_or(1.0 / std::sqrt(static_cast<double>(clf.dim))));
    for (auto& w : clf.weights) w = init(rng);

    std::unordered_map<std::uint32_t, std::uint32_t> col_of;
    for (std::uint32_t i = 0; i < clf.class_map.size(); ++i) col_of[clf.class_map[i]] = i;

    const std::size_t n = base.samples.size();
    const std::size_t bs = cfg.batch_size == kFullBatch
                               ? n
                               : std::min<std::size_t>(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    SgdState state(clf.weights.size());
    std::size_t cursor = n;  // force an initial shuffle
    std::vector<std::size_t> batch;
    for (std::uint32_t it = 0; it < cfg.iterations; ++it) {
        if (cursor + bs > n) {
            if (bs < n) std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
        }
        batch.assign(order.begin() + cursor, order.begin() + cursor + bs);
        cursor += bs;
        const auto grad = batch_gradient(clf, base.samples, batch, col_of, false, 0.0);
        sgd_step(clf, grad, state, cfg, nullptr);
    }
    check_finite(clf);
    return clf;
}

LinearClassifier extend_classifier(const LinearClassifier& clf, std::uint32_t n_novel,
                                   std::uint64_t seed, std::optional<double> init_scale) {
    if (clf.novel_class_count != 0)
        throw UsageError("classifier already extended");
    if (n_novel == 0) throw UsageError("nothing to extend");

    LinearClassifier out = clf;
    out.novel_class_count = n_novel;
    const double scale =
        init_scale.value_or(1.0 / std::sqrt(static_cast<double>(clf.dim)));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> init(0.0, scale);
    out.weights.resize(static_cast<std::size_t>(out.dim) * out.class_count());
    for (std::size_t j = static_cast<std::size_t>(out.dim) * clf.base_class_count;
         j < out.weights.size(); ++j)
        out.weights[j] = init(rng);
    out.class_map.resize(out.class_count(), UINT32_MAX);
    return out;
}

LinearClassifier finetune(const LinearClassifier& clf, const Episode& episode,
                          const TrainConfig& cfg, const NormalizationConfig& hooks) {
    cfg.validate();
    hooks.validate();
    if (clf.novel_class_count != episode.class_map.size())
        throw DataError("classifier not extended to match episode novel classes");

    LinearClassifier out = clf;
    for (std::uint32_t i = 0; i < out.novel_class_count; ++i)
        out.class_map[out.base_class_count + i] = episode.class_map[i];

    std::unordered_map<std::uint32_t, std::uint32_t> col_of;
    for (std::uint32_t i = 0; i < out.class_map.size(); ++i) col_of[out.class_map[i]] = i;

    std::vector<LabeledFeature> trainset = episode.novel_support.samples;
    if (episode.base_support)
        trainset.insert(trainset.end(), episode.base_support->samples.begin(),
                        episode.base_support->samples.end());
    for (const auto& s : trainset)
        if (!col_of.count(s.label))
            throw DataError("episode/classifier class mismatch for class " +
                            std::to_string(s.label));

    std::vector<bool> mask;
    if (hooks.freeze_base) {
        mask.assign(out.class_count(), false);
        for (std::uint32_t i = 0; i < out.base_class_count; ++i) mask[i] = true;
    }

    std::mt19937_64 rng(cfg.seed);
    const std::size_t n = trainset.size();
    const std::size_t bs = cfg.batch_size == kFullBatch
                               ? n
                               : std::min<std::size_t>(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    SgdState state(out.weights.size());
    std::size_t cursor = n;
    std::vector<std::size_t> batch;
    for (std::uint32_t it = 0; it < cfg.iterations; ++it) {
        if (cursor + bs > n) {
            if (bs < n) std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
        }
        batch.assign(order.begin() + cursor, order.begin() + cursor + bs);
        cursor += bs;
        const auto grad = batch_gradient(out, trainset, batch, col_of, hooks.cosine_mode,
                                         hooks.cosine_scale);
        sgd_step(out, grad, state, cfg, hooks.freeze_base ? &mask : nullptr);

        if (hooks.mean_centering == MeanCentering::novel_only)
            mean_center(out, CenteringScope::novel_only);
        else if (hooks.mean_centering == MeanCentering::both)
            mean_center(out, CenteringScope::both);

        if (hooks.variance_balancing == VarianceBalancing::in_training)
            variance_balance(out, compute_stats(out));
    }
    check_finite(out);
    return out;
}

}  // namespace fsn
