#include "fsn/episode.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "fsn/error.hpp"

namespace fsn {

namespace {

FeatureDataset empty_like(const FeatureDataset& ds, const char* suffix) {
    FeatureDataset out;
    out.dim = ds.dim;
    out.relu_constraint = ds.relu_constraint;
    out.name = ds.name + suffix;
    return out;
}

}  // namespace

Episode sample_episode(const FeatureDataset& base, const FeatureDataset& novel,
                       const EpisodeSpec& spec, BaseMode mode) {
    if (spec.n_way == 0 || spec.k_shot == 0 || spec.query_per_class == 0)
        throw UsageError("episode spec counts must be positive");
    if (spec.n_way > novel.classes.size())
        throw DataError("insufficient novel classes: need " + std::to_string(spec.n_way) +
                        ", have " + std::to_string(novel.classes.size()));

    std::mt19937_64 rng(spec.seed);

    std::vector<std::uint32_t> order = novel.classes;
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(spec.n_way);

    Episode ep;
    ep.novel_support = empty_like(novel, "/support");
    ep.novel_query = empty_like(novel, "/query");
    ep.class_map = order;

    const std::size_t need = spec.k_shot + spec.query_per_class;
    for (auto cid : order) {
        auto idx = novel.indices_of(cid);
        if (idx.size() < need)
            throw DataError("class " + std::to_string(cid) + " has " +
                            std::to_string(idx.size()) + " samples, need " +
                            std::to_string(need));
        std::shuffle(idx.begin(), idx.end(), rng);
        ep.novel_support.classes.push_back(cid);
        ep.novel_query.classes.push_back(cid);
        for (std::uint32_t i = 0; i < spec.k_shot; ++i)
            ep.novel_support.samples.push_back(novel.samples[idx[i]]);
        for (std::uint32_t i = 0; i < spec.query_per_class; ++i)
            ep.novel_query.samples.push_back(novel.samples[idx[spec.k_shot + i]]);
    }

    ep.base_query = base;
    ep.base_query.name = base.name + "/query";

    if (mode == BaseMode::undersampled_balanced) {
        FeatureDataset bs = empty_like(base, "/support");
        for (auto cid : base.classes) {
            auto idx = base.indices_of(cid);
            if (idx.size() < spec.k_shot)
                throw DataError("base class " + std::to_string(cid) +
                                " has too few samples for balanced mode");
            std::shuffle(idx.begin(), idx.end(), rng);
            bs.classes.push_back(cid);
            for (std::uint32_t i = 0; i < spec.k_shot; ++i)
                bs.samples.push_back(base.samples[idx[i]]);
        }
        ep.base_support = std::move(bs);
    }
    return ep;
}

}  // namespace fsn
