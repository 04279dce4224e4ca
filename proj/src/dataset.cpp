#include "fsn/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "fsn/error.hpp"

namespace fsn {

bool FeatureDataset::has_class(std::uint32_t id) const {
    return std::find(classes.begin(), classes.end(), id) != classes.end();
}

std::vector<std::size_t> FeatureDataset::indices_of(std::uint32_t id) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (samples[i].label == id) out.push_back(i);
    return out;
}

void FeatureDataset::validate() const {
    if (dim == 0) throw DataError("zero dimensionality");
    std::unordered_set<std::uint32_t> table(classes.begin(), classes.end());
    if (table.size() != classes.size()) throw DataError("duplicate class id in table");
    std::vector<std::size_t> counts(classes.size(), 0);
    for (std::size_t row = 0; row < samples.size(); ++row) {
        const auto& s = samples[row];
        if (s.feature.size() != dim)
            throw DataError("dimension mismatch at row " + std::to_string(row));
        if (!table.count(s.label))
            throw DataError("unknown class id " + std::to_string(s.label) + " at row " +
                            std::to_string(row));
        for (float v : s.feature) {
            if (!std::isfinite(v))
                throw DataError("non-finite value at row " + std::to_string(row));
            if (relu_constraint && v < 0.0f)
                throw DataError("negative activation at row " + std::to_string(row));
        }
        auto it = std::find(classes.begin(), classes.end(), s.label);
        counts[static_cast<std::size_t>(it - classes.begin())]++;
    }
    for (std::size_t c = 0; c < classes.size(); ++c)
        if (counts[c] == 0)
            throw DataError("class with zero samples: " + std::to_string(classes[c]));
}

std::pair<FeatureDataset, FeatureDataset> split_base_novel(
    const FeatureDataset& ds, const std::unordered_set<std::uint32_t>& novel_class_ids) {
    if (novel_class_ids.empty()) throw DataError("novel class set is empty");
    for (auto id : novel_class_ids)
        if (!ds.has_class(id)) throw DataError("unknown class " + std::to_string(id));
    if (novel_class_ids.size() >= ds.classes.size())
        throw DataError("novel class set must be a proper subset of the class table");

    FeatureDataset base, novel;
    base.dim = novel.dim = ds.dim;
    base.relu_constraint = novel.relu_constraint = ds.relu_constraint;
    base.name = ds.name + "/base";
    novel.name = ds.name + "/novel";
    for (auto id : ds.classes)
        (novel_class_ids.count(id) ? novel : base).classes.push_back(id);
    for (const auto& s : ds.samples)
        (novel_class_ids.count(s.label) ? novel : base).samples.push_back(s);
    return {std::move(base), std::move(novel)};
}

}  // namespace fsn
