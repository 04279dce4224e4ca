#include "fsn/synthetic.hpp"

#include <cmath>
#include <random>

#include "fsn/error.hpp"

namespace fsn {

FeatureDataset generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.dim == 0 || cfg.n_base_classes + cfg.n_novel_classes == 0 ||
        cfg.samples_per_class == 0)
        throw UsageError("synthetic config counts must be positive");
    if (cfg.prototype_scale <= 0.0 || cfg.within_class_std < 0.0)
        throw UsageError("synthetic config scales must be positive");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    const std::uint32_t n_classes = cfg.n_base_classes + cfg.n_novel_classes;
    FeatureDataset ds;
    ds.dim = cfg.dim;
    ds.relu_constraint = true;
    ds.name = "synthetic";
    for (std::uint32_t c = 0; c < n_classes; ++c) ds.classes.push_back(c);
    ds.samples.reserve(static_cast<std::size_t>(n_classes) * cfg.samples_per_class);

    for (std::uint32_t c = 0; c < n_classes; ++c) {
        std::vector<double> proto(cfg.dim);
        for (auto& p : proto) p = std::abs(unit(rng)) * cfg.prototype_scale;
        for (std::uint32_t s = 0; s < cfg.samples_per_class; ++s) {
            LabeledFeature lf;
            lf.label = c;
            lf.feature.resize(cfg.dim);
            for (std::uint32_t j = 0; j < cfg.dim; ++j) {
                double v = proto[j] + unit(rng) * cfg.within_class_std;
                lf.feature[j] = static_cast<float>(std::max(v, 0.0));
            }
            ds.samples.push_back(std::move(lf));
        }
    }
    return ds;
}

}  // namespace fsn
