#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fsn/dataset.hpp"

namespace fsn {

struct EpisodeSpec {
    std::uint32_t n_way = 5;
    std::uint32_t k_shot = 5;
    std::uint32_t query_per_class = 15;
    std::uint64_t seed = 0;
};

enum class BaseMode { zero_base, undersampled_balanced };

// One sampled N-way K-shot task. Episode class indexing: base classes keep
// their pretraining column order, novel columns follow in class_map order.
struct Episode {
    FeatureDataset novel_support;
    FeatureDataset novel_query;
    FeatureDataset base_query;
    std::optional<FeatureDataset> base_support;  // only in undersampled_balanced mode
    std::vector<std::uint32_t> class_map;        // episode novel index -> source class id
};

// Deterministic for a given (inputs, spec.seed). Novel classes are chosen by
// seeded shuffle of the class table; per-class samples are drawn without
// replacement, first k_shot as support, next query_per_class as query.
// base_query is the full base sample pool.
Episode sample_episode(const FeatureDataset& base, const FeatureDataset& novel,
                       const EpisodeSpec& spec, BaseMode mode = BaseMode::zero_base);

}  // namespace fsn
