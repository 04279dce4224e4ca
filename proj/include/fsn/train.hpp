#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fsn/classifier.hpp"
#include "fsn/episode.hpp"
#include "fsn/normalization.hpp"

namespace fsn {

enum class Regularizer { l2_decay, l1, none };

constexpr std::uint32_t kFullBatch = 0;

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::uint32_t iterations = 500;
    std::uint32_t batch_size = kFullBatch;  // kFullBatch = whole training set
    Regularizer regularizer = Regularizer::l2_decay;
    double l1_coefficient = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> init_scale;  // Gaussian init std; default 1/sqrt(d)

    void validate() const;

    // Per-shot fine-tuning defaults: lr 0.005 / 0.003 / 0.001
    // for 1 / 5 / 10-shot, 500 iterations, momentum 0.9, decay 5e-4.
    static TrainConfig finetune_defaults(std::uint32_t k_shot);
};

// Momentum buffers, one velocity entry per weight.
struct SgdState {
    std::vector<double> velocity;
    explicit SgdState(std::size_t n) : velocity(n, 0.0) {}
};

// v <- momentum*v + (grad + decay terms); theta <- theta - lr*v.
// Columns with mask[i] == true are left untouched.
void sgd_step(LinearClassifier& clf, const std::vector<double>& grad, SgdState& state,
              const TrainConfig& cfg, const std::vector<bool>* column_mask = nullptr);

// Mini-batch SGD base pretraining. Weight init: Gaussian, std 1/sqrt(d),
// seeded. novel_class_count of the result is 0.
LinearClassifier train_base(const FeatureDataset& base, const TrainConfig& cfg);

// Appends n_novel Gaussian columns (zero mean, std init_scale, default
// 1/sqrt(d)). Base columns unchanged.
LinearClassifier extend_classifier(const LinearClassifier& clf, std::uint32_t n_novel,
                                   std::uint64_t seed,
                                   std::optional<double> init_scale = std::nullopt);

// Zero-base (or balanced) fine-tuning with normalization hooks applied after
// every optimizer step. Uses novel_support only, plus base_support when the
// episode carries one.
LinearClassifier finetune(const LinearClassifier& clf, const Episode& episode,
                          const TrainConfig& cfg, const NormalizationConfig& hooks);

}  // namespace fsn
