#pragma once

#include <cstdint>
#include <vector>

#include "fsn/classifier.hpp"
#include "fsn/episode.hpp"
#include "fsn/train.hpp"

namespace fsn {

// Per-class logit scale/offset trained with the classifier frozen:
// z'_i = gamma_i * z_i + beta_i. Identity at init.
struct AffineParams {
    std::vector<double> gamma;
    std::vector<double> beta;

    std::size_t size() const { return gamma.size(); }
};

struct PostOptConfig {
    TrainConfig train;
    bool novel_params_only = false;  // restrict training to novel-class gamma/beta

    // Per-shot default schedules: 500 / 50 / 5 iterations for
    // 1 / 5 / 10-shot, same learning rate as fine-tuning.
    static PostOptConfig defaults(std::uint32_t k_shot);
};

AffineParams init_affine(const LinearClassifier& clf);

std::vector<double> apply_affine(const AffineParams& params, const std::vector<double>& z);

// SGD on CE of softmax(apply_affine(params, logits)) over novel_support only.
// The classifier is read-only.
AffineParams train_affine(const LinearClassifier& clf, const Episode& episode,
                          const PostOptConfig& cfg,
                          LogitMode mode = LogitMode::linear, double cosine_scale = 10.0);

}  // namespace fsn
