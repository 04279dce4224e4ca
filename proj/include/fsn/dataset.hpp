#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

namespace fsn {

using FeatureVector = std::vector<float>;

struct LabeledFeature {
    FeatureVector feature;
    std::uint32_t label = 0;
};

// Labeled frozen-feature dataset with an ordered class table.
struct FeatureDataset {
    std::uint32_t dim = 0;
    std::vector<std::uint32_t> classes;  // ordered class table
    std::vector<LabeledFeature> samples;
    bool relu_constraint = false;
    std::string name;

    std::size_t class_count() const { return classes.size(); }
    std::size_t sample_count() const { return samples.size(); }
    bool has_class(std::uint32_t id) const;

    // Indices of samples belonging to `id`, in dataset order.
    std::vector<std::size_t> indices_of(std::uint32_t id) const;

    // Throws DataError on any invariant violation.
    void validate() const;
};

// Partitions `ds` into (base, novel) by class id. `novel_class_ids` must be a
// nonempty proper subset of the class table.
std::pair<FeatureDataset, FeatureDataset> split_base_novel(
    const FeatureDataset& ds, const std::unordered_set<std::uint32_t>& novel_class_ids);

}  // namespace fsn
