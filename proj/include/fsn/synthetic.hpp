#pragma once

#include <cstdint>

#include "fsn/dataset.hpp"

namespace fsn {

// Desk-scale generator of ReLU-like (non-negative) feature clusters. Each
// class gets a prototype |N(0, prototype_scale^2)|^d; samples are the
// prototype plus N(0, within_class_std^2) noise clamped at zero.
struct SyntheticConfig {
    std::uint32_t dim = 32;
    std::uint32_t n_base_classes = 20;
    std::uint32_t n_novel_classes = 10;
    std::uint32_t samples_per_class = 100;
    double prototype_scale = 1.0;
    double within_class_std = 0.3;
    std::uint64_t seed = 0;
};

// Deterministic for a given config. Class ids are 0..n_base-1 (base) followed
// by n_base..n_base+n_novel-1 (novel).
FeatureDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace fsn
