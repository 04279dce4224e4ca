#include "fsn/affine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fsn/error.hpp"

namespace fsn {

PostOptConfig PostOptConfig::defaults(std::uint32_t k_shot) {
    PostOptConfig cfg;
    cfg.train = TrainConfig::finetune_defaults(k_shot);
    cfg.train.regularizer = Regularizer::none;
    if (k_shot <= 1)
        cfg.train.iterations = 500;
    else if (k_shot <= 5)
        cfg.train.iterations = 50;
    else
        cfg.train.iterations = 5;
    return cfg;
}

AffineParams init_affine(const LinearClassifier& clf) {
    AffineParams p;
    p.gamma.assign(clf.class_count(), 1.0);
    p.beta.assign(clf.class_count(), 0.0);
    return p;
}

std::vector<double> apply_affine(const AffineParams& params, const std::vector<double>& z) {
    if (params.gamma.size() != z.size() || params.beta.size() != z.size())
        throw DataError("affine parameter / logit length mismatch");
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = params.gamma[i] * z[i] + params.beta[i];
    return out;
}

AffineParams train_affine(const LinearClassifier& clf, const Episode& episode,
                          const PostOptConfig& cfg, LogitMode mode, double cosine_scale) {
    if (cfg.train.iterations > 0) cfg.train.validate();  // 0 iterations = identity
    AffineParams params = init_affine(clf);
    const std::size_t n_cls = params.size();

    const auto& samples = episode.novel_support.samples;
    if (samples.empty()) throw DataError("empty novel support");
    std::vector<std::uint32_t> labels(samples.size());
    std::vector<std::vector<double>> base_logits(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        labels[i] = clf.column_of(samples[i].label);
        base_logits[i] = logits(clf, samples[i].feature, mode, cosine_scale);
    }

    std::vector<double> vg(n_cls, 0.0), vb(n_cls, 0.0);
    std::vector<double> gg(n_cls), gb(n_cls);
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (std::uint32_t it = 0; it < cfg.train.iterations; ++it) {
        std::fill(gg.begin(), gg.end(), 0.0);
        std::fill(gb.begin(), gb.end(), 0.0);
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const auto p = softmax(apply_affine(params, base_logits[s]));
            for (std::size_t i = 0; i < n_cls; ++i) {
                const double coeff = p[i] - (i == labels[s] ? 1.0 : 0.0);
                gg[i] += coeff * base_logits[s][i];
                gb[i] += coeff;
            }
        }
        const std::size_t first = cfg.novel_params_only ? clf.base_class_count : 0;
        for (std::size_t i = first; i < n_cls; ++i) {
            vg[i] = cfg.train.momentum * vg[i] + gg[i] * inv;
            vb[i] = cfg.train.momentum * vb[i] + gb[i] * inv;
            params.gamma[i] -= cfg.train.learning_rate * vg[i];
            params.beta[i] -= cfg.train.learning_rate * vb[i];
        }
    }
    for (std::size_t i = 0; i < n_cls; ++i)
        if (!std::isfinite(params.gamma[i]) || !std::isfinite(params.beta[i]))
            throw NumericError("NaN/Inf in affine parameters");
    return params;
}

}  // namespace fsn
