// fsn: zero-base generalized few-shot learning on frozen feature spaces.
//
// Subcommands:
//   synth    --config <json> --out <file> [--format binary|text]
//   pretrain --data <file> --config <json> --out <ckpt>
//   run      --data <file> [--ckpt <ckpt>] --out <dir> [--config <json>]
//            [--episodes N] [--shots K] [--ways N] [--seed S]
//            [--ablation NAME] [--workers W] [--mode zero-base|balanced]
//   analyze  --ckpt <ckpt> --out <prefix>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "fsn/error.hpp"
#include "fsn/io.hpp"
#include "fsn/pipeline.hpp"
#include "fsn/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int log_level() {
    const char* env = std::getenv("FSN_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[fsn] " << msg << "\n";
}

json load_json(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw fsn::DataError("cannot open config " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw fsn::UsageError("bad config " + path.string() + ": " + e.what());
    }
    return j;
}

fsn::SyntheticConfig parse_synth_config(const json& j) {
    fsn::SyntheticConfig cfg;
    cfg.dim = j.value("dim", cfg.dim);
    cfg.n_base_classes = j.value("n_base_classes", cfg.n_base_classes);
    cfg.n_novel_classes = j.value("n_novel_classes", cfg.n_novel_classes);
    cfg.samples_per_class = j.value("samples_per_class", cfg.samples_per_class);
    cfg.prototype_scale = j.value("prototype_scale", cfg.prototype_scale);
    cfg.within_class_std = j.value("within_class_std", cfg.within_class_std);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

void parse_train_config(const json& j, fsn::TrainConfig& cfg) {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.momentum = j.value("momentum", cfg.momentum);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.l1_coefficient = j.value("l1_coefficient", cfg.l1_coefficient);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("init_scale")) cfg.init_scale = j["init_scale"].get<double>();
    if (j.contains("regularizer")) {
        const std::string r = j["regularizer"];
        if (r == "l2_decay")
            cfg.regularizer = fsn::Regularizer::l2_decay;
        else if (r == "l1")
            cfg.regularizer = fsn::Regularizer::l1;
        else if (r == "none")
            cfg.regularizer = fsn::Regularizer::none;
        else
            throw fsn::UsageError("unknown regularizer '" + r + "'");
    }
}

void check_weights_finite(const fsn::LinearClassifier& clf) {
    for (double v : clf.weights)
        if (!std::isfinite(v)) throw fsn::NumericError("NaN in classifier weights");
}

int cmd_synth(const fs::path& config, const fs::path& out, const std::string& format) {
    const auto cfg = parse_synth_config(load_json(config));
    const auto ds = fsn::generate_synthetic(cfg);
    fsn::save_dataset(ds, out,
                      format == "text" ? fsn::DatasetFormat::text
                                       : fsn::DatasetFormat::binary);
    log_info("wrote " + std::to_string(ds.sample_count()) + " samples to " + out.string());
    return 0;
}

// Shared base/novel split rule: explicit "novel_classes" from the config, or
// by default the last third of the class table.
std::unordered_set<std::uint32_t> novel_split(const fsn::FeatureDataset& ds,
                                              const json& cfg_json) {
    std::unordered_set<std::uint32_t> novel_ids;
    if (cfg_json.contains("novel_classes")) {
        for (auto id : cfg_json["novel_classes"]) novel_ids.insert(id.get<std::uint32_t>());
    } else {
        const std::size_t n_novel = std::max<std::size_t>(1, ds.classes.size() / 3);
        for (std::size_t i = ds.classes.size() - n_novel; i < ds.classes.size(); ++i)
            novel_ids.insert(ds.classes[i]);
    }
    return novel_ids;
}

int cmd_pretrain(const fs::path& data, const fs::path& config, const fs::path& out) {
    const auto full = fsn::load_dataset(data, fsn::DatasetFormat::binary);
    json cfg_json = json::object();
    if (!config.empty()) cfg_json = load_json(config);
    auto [ds, novel] = fsn::split_base_novel(full, novel_split(full, cfg_json));
    (void)novel;
    fsn::TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.iterations = 2000;
    cfg.batch_size = 60;
    parse_train_config(cfg_json, cfg);

    const auto clf = fsn::train_base(ds, cfg);
    check_weights_finite(clf);
    fsn::save_checkpoint({clf, std::nullopt}, out);

    std::uint64_t hit = 0;
    for (const auto& s : ds.samples)
        if (clf.class_map[fsn::predict(clf, nullptr, s.feature)] == s.label) hit++;
    json log = {{"checkpoint", out.string()},
                {"classes", clf.base_class_count},
                {"samples", ds.sample_count()},
                {"train_accuracy", 100.0 * hit / ds.sample_count()}};
    std::cout << log.dump(2) << "\n";
    return 0;
}

int cmd_run(const fs::path& data, const fs::path& ckpt_path, const fs::path& out,
            const fs::path& config, std::size_t episodes, std::uint32_t shots,
            std::uint32_t ways, std::uint64_t seed, const std::string& ablation,
            std::size_t workers, const std::string& mode) {
    const auto ds = fsn::load_dataset(data, fsn::DatasetFormat::binary);

    json cfg_json = json::object();
    if (!config.empty()) cfg_json = load_json(config);

    auto [base, novel] = fsn::split_base_novel(ds, novel_split(ds, cfg_json));

    fsn::LinearClassifier pretrained;
    if (!ckpt_path.empty()) {
        auto ckpt = fsn::load_checkpoint(ckpt_path);
        pretrained = std::move(ckpt.classifier);
        if (pretrained.dim != ds.dim || pretrained.novel_class_count != 0 ||
            pretrained.base_class_count != base.classes.size())
            throw fsn::DataError("checkpoint does not match the base split");
        pretrained.class_map = base.classes;
    } else {
        fsn::TrainConfig pre;
        pre.learning_rate = 0.1;
        pre.iterations = 2000;
        pre.batch_size = 60;
        if (cfg_json.contains("pretrain")) parse_train_config(cfg_json["pretrain"], pre);
        log_info("pretraining base classifier (" + std::to_string(pre.iterations) +
                 " iterations)");
        pretrained = fsn::train_base(base, pre);
    }
    check_weights_finite(pretrained);

    auto pipeline =
        fsn::PipelineConfig::for_ablation(fsn::parse_ablation(ablation), shots);
    if (mode == "balanced") pipeline.base_mode = fsn::BaseMode::undersampled_balanced;
    if (cfg_json.contains("finetune")) parse_train_config(cfg_json["finetune"], pipeline.finetune);
    if (cfg_json.contains("post_opt")) parse_train_config(cfg_json["post_opt"], pipeline.post_opt.train);
    pipeline.init_seed = cfg_json.value("init_seed", seed * 0x9e3779b97f4a7c15ULL);

    fsn::EpisodeSpec spec;
    spec.n_way = ways;
    spec.k_shot = shots;
    spec.query_per_class = cfg_json.value("query_per_class", 15u);
    spec.seed = seed;

    log_info("running " + std::to_string(episodes) + " episodes, ablation " + ablation);
    const auto reports =
        fsn::run_episodes(pretrained, base, novel, spec, pipeline, episodes, workers);
    const auto agg = fsn::aggregate(reports);

    fs::create_directories(out);
    {
        std::ofstream os(out / "aggregate.csv");
        os << "shot,novel,base,all_mean,all_joint,novel_pm,base_pm,all_mean_pm\n";
        os.precision(10);
        auto pm = [](const fsn::MetricAggregate& m) { return m.half_width.value_or(0.0); };
        os << shots << "," << agg.novel_acc.mean << "," << agg.base_acc.mean << ","
           << agg.all_acc_mean.mean << "," << agg.all_acc_joint.mean << ","
           << pm(agg.novel_acc) << "," << pm(agg.base_acc) << "," << pm(agg.all_acc_mean)
           << "\n";
    }
    {
        json eps = json::array();
        for (const auto& r : reports)
            eps.push_back({{"novel_acc", r.novel_acc},
                           {"base_acc", r.base_acc},
                           {"all_acc_mean", r.all_acc_mean},
                           {"all_acc_joint", r.all_acc_joint},
                           {"base_to_novel_rate", r.base_to_novel_rate},
                           {"novel_to_base_rate", r.novel_to_base_rate}});
        std::ofstream os(out / "episodes.json");
        os << json({{"ablation", ablation},
                    {"episodes", episodes},
                    {"shots", shots},
                    {"ways", ways},
                    {"seed", seed},
                    {"reports", eps}})
                  .dump(2)
           << "\n";
    }
    {
        // summed confusion over all episodes
        std::vector<std::vector<std::uint64_t>> sum;
        for (const auto& r : reports) {
            if (sum.empty())
                sum.assign(r.confusion.size(),
                           std::vector<std::uint64_t>(r.confusion.size(), 0));
            for (std::size_t i = 0; i < r.confusion.size(); ++i)
                for (std::size_t j = 0; j < r.confusion.size(); ++j)
                    sum[i][j] += r.confusion[i][j];
        }
        std::ofstream os(out / "confusion.csv");
        for (const auto& row : sum) {
            for (std::size_t j = 0; j < row.size(); ++j)
                os << row[j] << (j + 1 == row.size() ? '\n' : ',');
        }
    }
    std::cout << "novel " << agg.novel_acc.mean << " base " << agg.base_acc.mean
              << " all " << agg.all_acc_mean.mean << "\n";
    return 0;
}

int cmd_analyze(const fs::path& ckpt_path, const fs::path& out) {
    const auto ckpt = fsn::load_checkpoint(ckpt_path);
    check_weights_finite(ckpt.classifier);
    const auto st = fsn::compute_stats(ckpt.classifier);
    {
        std::ofstream os(out.string() + ".csv");
        os << "class_id,partition,mu,sigma,norm\n";
        os.precision(12);
        for (std::uint32_t i = 0; i < ckpt.classifier.class_count(); ++i)
            os << ckpt.classifier.class_map[i] << ","
               << (ckpt.classifier.is_base_column(i) ? "base" : "novel") << "," << st.mu[i]
               << "," << st.sigma[i] << "," << st.norms[i] << "\n";
    }
    json summary = {{"mu_bar_base", st.mu_bar_base},
                    {"mu_bar_novel", st.mu_bar_novel},
                    {"sigma_bar_base", st.sigma_bar_base},
                    {"sigma_bar_novel", st.sigma_bar_novel}};
    if (st.mu_bar_base != 0.0)
        summary["mu_ratio_novel_over_base"] = st.mu_bar_novel / st.mu_bar_base;
    std::ofstream os(out.string() + ".json");
    os << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zero-base generalized few-shot learning toolkit"};
    app.require_subcommand(1);

    std::string config, data, out, ckpt, format = "binary", ablation = "none",
                mode = "zero-base";
    std::size_t episodes = 600, workers = 1;
    std::uint32_t shots = 5, ways = 5;
    std::uint64_t seed = 0;

    auto* synth = app.add_subcommand("synth", "generate a synthetic feature dataset");
    synth->add_option("--config", config)->required();
    synth->add_option("--out", out)->required();
    synth->add_option("--format", format)->check(CLI::IsMember({"binary", "text"}));

    auto* pretrain = app.add_subcommand("pretrain", "train the base classifier");
    pretrain->add_option("--data", data)->required();
    pretrain->add_option("--config", config);
    pretrain->add_option("--out", out)->required();

    auto* run = app.add_subcommand("run", "episodic evaluation with normalization");
    run->add_option("--data", data)->required();
    run->add_option("--ckpt", ckpt);
    run->add_option("--config", config);
    run->add_option("--out", out)->required();
    run->add_option("--episodes", episodes);
    run->add_option("--shots", shots);
    run->add_option("--ways", ways);
    run->add_option("--seed", seed);
    run->add_option("--ablation", ablation);
    run->add_option("--workers", workers);
    run->add_option("--mode", mode)->check(CLI::IsMember({"zero-base", "balanced"}));

    auto* analyze = app.add_subcommand("analyze", "weight-distribution diagnostics");
    analyze->add_option("--ckpt", ckpt)->required();
    analyze->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
        if (synth->parsed()) return cmd_synth(config, out, format);
        if (pretrain->parsed()) return cmd_pretrain(data, config, out);
        if (run->parsed())
            return cmd_run(data, ckpt, out, config, episodes, shots, ways, seed, ablation,
                           workers, mode);
        if (analyze->parsed()) return cmd_analyze(ckpt, out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const fsn::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fsn::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const fsn::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
