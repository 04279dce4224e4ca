#include "fsn/pipeline.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "fsn/error.hpp"

namespace fsn {

Ablation parse_ablation(const std::string& name) {
    if (name == "none") return Ablation::none;
    if (name == "mc") return Ablation::mc;
    if (name == "mc+vb") return Ablation::mc_vb;
    if (name == "mc+vb+lo") return Ablation::mc_vb_lo;
    if (name == "cosine") return Ablation::cosine;
    if (name == "freeze-base") return Ablation::freeze_base;
    if (name == "l1") return Ablation::l1;
    if (name == "l2") return Ablation::l2;
    if (name == "norm-eq") return Ablation::norm_eq;
    if (name == "vb-in-training") return Ablation::vb_in_training;
    if (name == "mc-both") return Ablation::mc_both;
    if (name == "balanced") return Ablation::balanced;
    throw UsageError("unknown ablation '" + name + "'");
}

std::string ablation_name(Ablation a) {
    switch (a) {
        case Ablation::none: return "none";
        case Ablation::mc: return "mc";
        case Ablation::mc_vb: return "mc+vb";
        case Ablation::mc_vb_lo: return "mc+vb+lo";
        case Ablation::cosine: return "cosine";
        case Ablation::freeze_base: return "freeze-base";
        case Ablation::l1: return "l1";
        case Ablation::l2: return "l2";
        case Ablation::norm_eq: return "norm-eq";
        case Ablation::vb_in_training: return "vb-in-training";
        case Ablation::mc_both: return "mc-both";
        case Ablation::balanced: return "balanced";
    }
    throw UsageError("unknown ablation value");
}

PipelineConfig PipelineConfig::for_ablation(Ablation a, std::uint32_t k_shot) {
    PipelineConfig cfg;
    cfg.finetune = TrainConfig::finetune_defaults(k_shot);
    cfg.post_opt = PostOptConfig::defaults(k_shot);
    switch (a) {
        case Ablation::none:
            break;
        case Ablation::mc:
            cfg.hooks.mean_centering = MeanCentering::novel_only;
            break;
        case Ablation::mc_vb:
            cfg.hooks.mean_centering = MeanCentering::novel_only;
            cfg.offline_variance_balancing = true;
            break;
        case Ablation::mc_vb_lo:
            cfg.hooks.mean_centering = MeanCentering::novel_only;
            cfg.offline_variance_balancing = true;
            cfg.enable_post_opt = true;
            break;
        case Ablation::cosine:
            cfg.hooks.cosine_mode = true;
            break;
        case Ablation::freeze_base:
            cfg.hooks.freeze_base = true;
            break;
        case Ablation::l1:
            cfg.finetune.regularizer = Regularizer::l1;
            cfg.finetune.l1_coefficient = 1e-3;
            break;
        case Ablation::l2:
            cfg.finetune.regularizer = Regularizer::l2_decay;
            cfg.finetune.weight_decay = 1e-2;
            break;
        case Ablation::norm_eq:
            cfg.offline_norm_equalization = true;
            break;
        case Ablation::vb_in_training:
            cfg.hooks.variance_balancing = VarianceBalancing::in_training;
            break;
        case Ablation::mc_both:
            cfg.hooks.mean_centering = MeanCentering::both;
            break;
        case Ablation::balanced:
            cfg.base_mode = BaseMode::undersampled_balanced;
            break;
    }
    return cfg;
}

EvalReport run_episode(const LinearClassifier& pretrained, const FeatureDataset& base,
                       const FeatureDataset& novel, const EpisodeSpec& spec,
                       const PipelineConfig& cfg) {
    const Episode ep = sample_episode(base, novel, spec, cfg.base_mode);
    auto extended = extend_classifier(pretrained, spec.n_way, cfg.init_seed ^ spec.seed);
    auto clf = finetune(extended, ep, cfg.finetune, cfg.hooks);

    if (cfg.offline_variance_balancing) variance_balance(clf, compute_stats(clf));
    if (cfg.offline_norm_equalization) norm_equalize(clf);

    const LogitMode mode = cfg.hooks.cosine_mode ? LogitMode::cosine : LogitMode::linear;
    AffineParams params = init_affine(clf);
    if (cfg.enable_post_opt)
        params = train_affine(clf, ep, cfg.post_opt, mode, cfg.hooks.cosine_scale);
    return evaluate(clf, &params, ep, mode, cfg.hooks.cosine_scale);
}

std::vector<EvalReport> run_episodes(const LinearClassifier& pretrained,
                                     const FeatureDataset& base,
                                     const FeatureDataset& novel, const EpisodeSpec& spec,
                                     const PipelineConfig& cfg, std::size_t episodes,
                                     std::size_t workers) {
    std::vector<EvalReport> reports(episodes);
    if (workers <= 1) {
        for (std::size_t t = 0; t < episodes; ++t) {
            EpisodeSpec s = spec;
            s.seed = spec.seed + t;
            reports[t] = run_episode(pretrained, base, novel, s, cfg);
        }
        return reports;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1);
                if (t >= episodes) return;
                try {
                    EpisodeSpec s = spec;
                    s.seed = spec.seed + t;
                    reports[t] = run_episode(pretrained, base, novel, s, cfg);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
    return reports;
}

}  // namespace fsn
