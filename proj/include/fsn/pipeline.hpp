#pragma once

#include <string>
#include <vector>

#include "fsn/evaluation.hpp"
#include "fsn/train.hpp"

namespace fsn {

// Named pipeline variants mirroring the ablation and baseline grid.
enum class Ablation {
    none,          // plain linear fine-tuning
    mc,            // online mean centering (novel only)
    mc_vb,         // + offline variance balancing
    mc_vb_lo,      // + post linear optimization
    cosine,        // cosine-logit classifier
    freeze_base,   // base columns frozen during fine-tuning
    l1,            // L1 regularization baseline
    l2,            // strong L2 regularization baseline
    norm_eq,       // offline weight-norm equalization
    vb_in_training,
    mc_both,       // mean centering on base and novel
    balanced,      // undersampled balanced fine-tuning (uses base data)
};

Ablation parse_ablation(const std::string& name);
std::string ablation_name(Ablation a);

struct PipelineConfig {
    TrainConfig finetune;
    NormalizationConfig hooks;
    PostOptConfig post_opt;
    bool enable_post_opt = false;
    bool offline_variance_balancing = false;
    bool offline_norm_equalization = false;
    BaseMode base_mode = BaseMode::zero_base;
    std::uint64_t init_seed = 0;  // novel-column init; episode index is mixed in

    // Fine-tuning/post-opt defaults for k_shot with the named ablation wired in.
    static PipelineConfig for_ablation(Ablation a, std::uint32_t k_shot);
};

// sample -> extend -> finetune (hooks) -> offline normalization -> post-opt ->
// evaluate. Deterministic given (datasets, spec.seed, cfg.init_seed).
EvalReport run_episode(const LinearClassifier& pretrained, const FeatureDataset& base,
                       const FeatureDataset& novel, const EpisodeSpec& spec,
                       const PipelineConfig& cfg);

// Runs `episodes` tasks with seeds spec.seed + t, fanned out over `workers`
// threads. Output order is by episode index.
std::vector<EvalReport> run_episodes(const LinearClassifier& pretrained,
                                     const FeatureDataset& base,
                                     const FeatureDataset& novel, const EpisodeSpec& spec,
                                     const PipelineConfig& cfg, std::size_t episodes,
                                     std::size_t workers = 1);

}  // namespace fsn
