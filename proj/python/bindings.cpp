#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fsn/error.hpp"
#include "fsn/io.hpp"
#include "fsn/pipeline.hpp"
#include "fsn/synthetic.hpp"

namespace py = pybind11;
using namespace fsn;

PYBIND11_MODULE(fsncore, m) {
    m.doc() = "zero-base generalized few-shot learning on frozen feature spaces";

    py::register_exception<UsageError>(m, "FsnUsageError", PyExc_ValueError);
    py::register_exception<DataError>(m, "FsnDataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "FsnNumericError", PyExc_ArithmeticError);

    py::class_<LabeledFeature>(m, "LabeledFeature")
        .def(py::init<>())
        .def_readwrite("feature", &LabeledFeature::feature)
        .def_readwrite("label", &LabeledFeature::label);

    py::class_<FeatureDataset>(m, "FeatureDataset")
        .def(py::init<>())
        .def_readwrite("dim", &FeatureDataset::dim)
        .def_readwrite("classes", &FeatureDataset::classes)
        .def_readwrite("samples", &FeatureDataset::samples)
        .def_readwrite("relu_constraint", &FeatureDataset::relu_constraint)
        .def_readwrite("name", &FeatureDataset::name)
        .def("validate", &FeatureDataset::validate)
        .def("__len__", [](const FeatureDataset& d) { return d.sample_count(); });

    py::class_<SyntheticConfig>(m, "SyntheticConfig")
        .def(py::init<>())
        .def_readwrite("dim", &SyntheticConfig::dim)
        .def_readwrite("n_base_classes", &SyntheticConfig::n_base_classes)
        .def_readwrite("n_novel_classes", &SyntheticConfig::n_novel_classes)
        .def_readwrite("samples_per_class", &SyntheticConfig::samples_per_class)
        .def_readwrite("prototype_scale", &SyntheticConfig::prototype_scale)
        .def_readwrite("within_class_std", &SyntheticConfig::within_class_std)
        .def_readwrite("seed", &SyntheticConfig::seed);

    py::enum_<BaseMode>(m, "BaseMode")
        .value("zero_base", BaseMode::zero_base)
        .value("undersampled_balanced", BaseMode::undersampled_balanced);

    py::class_<EpisodeSpec>(m, "EpisodeSpec")
        .def(py::init<>())
        .def_readwrite("n_way", &EpisodeSpec::n_way)
        .def_readwrite("k_shot", &EpisodeSpec::k_shot)
        .def_readwrite("query_per_class", &EpisodeSpec::query_per_class)
        .def_readwrite("seed", &EpisodeSpec::seed);

    py::class_<Episode>(m, "Episode")
        .def_readonly("novel_support", &Episode::novel_support)
        .def_readonly("novel_query", &Episode::novel_query)
        .def_readonly("base_query", &Episode::base_query)
        .def_readonly("base_support", &Episode::base_support)
        .def_readonly("class_map", &Episode::class_map);

    py::class_<LinearClassifier>(m, "LinearClassifier")
        .def(py::init<>())
        .def_readwrite("dim", &LinearClassifier::dim)
        .def_readwrite("base_class_count", &LinearClassifier::base_class_count)
        .def_readwrite("novel_class_count", &LinearClassifier::novel_class_count)
        .def_readwrite("weights", &LinearClassifier::weights)
        .def_readwrite("class_map", &LinearClassifier::class_map)
        .def_property_readonly("class_count", &LinearClassifier::class_count);

    py::enum_<LogitMode>(m, "LogitMode")
        .value("linear", LogitMode::linear)
        .value("cosine", LogitMode::cosine);

    py::enum_<Regularizer>(m, "Regularizer")
        .value("l2_decay", Regularizer::l2_decay)
        .value("l1", Regularizer::l1)
        .value("none", Regularizer::none);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("weight_decay", &TrainConfig::weight_decay)
        .def_readwrite("iterations", &TrainConfig::iterations)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("regularizer", &TrainConfig::regularizer)
        .def_readwrite("l1_coefficient", &TrainConfig::l1_coefficient)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("init_scale", &TrainConfig::init_scale)
        .def_static("finetune_defaults", &TrainConfig::finetune_defaults);

    py::enum_<MeanCentering>(m, "MeanCentering")
        .value("off", MeanCentering::off)
        .value("novel_only", MeanCentering::novel_only)
        .value("both", MeanCentering::both);

    py::enum_<VarianceBalancing>(m, "VarianceBalancing")
        .value("off", VarianceBalancing::off)
        .value("offline", VarianceBalancing::offline)
        .value("in_training", VarianceBalancing::in_training);

    py::enum_<CenteringScope>(m, "CenteringScope")
        .value("novel_only", CenteringScope::novel_only)
        .value("both", CenteringScope::both);

    py::class_<NormalizationConfig>(m, "NormalizationConfig")
        .def(py::init<>())
        .def_readwrite("mean_centering", &NormalizationConfig::mean_centering)
        .def_readwrite("variance_balancing", &NormalizationConfig::variance_balancing)
        .def_readwrite("cosine_mode", &NormalizationConfig::cosine_mode)
        .def_readwrite("cosine_scale", &NormalizationConfig::cosine_scale)
        .def_readwrite("freeze_base", &NormalizationConfig::freeze_base)
        .def_readwrite("norm_equalization", &NormalizationConfig::norm_equalization);

    py::class_<WeightStats>(m, "WeightStats")
        .def_readonly("mu", &WeightStats::mu)
        .def_readonly("sigma", &WeightStats::sigma)
        .def_readonly("norms", &WeightStats::norms)
        .def_readonly("mu_bar_base", &WeightStats::mu_bar_base)
        .def_readonly("mu_bar_novel", &WeightStats::mu_bar_novel)
        .def_readonly("sigma_bar_base", &WeightStats::sigma_bar_base)
        .def_readonly("sigma_bar_novel", &WeightStats::sigma_bar_novel);

    py::class_<AffineParams>(m, "AffineParams")
        .def_readwrite("gamma", &AffineParams::gamma)
        .def_readwrite("beta", &AffineParams::beta);

    py::class_<PostOptConfig>(m, "PostOptConfig")
        .def(py::init<>())
        .def_readwrite("train", &PostOptConfig::train)
        .def_readwrite("novel_params_only", &PostOptConfig::novel_params_only)
        .def_static("defaults", &PostOptConfig::defaults);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("novel_acc", &EvalReport::novel_acc)
        .def_readonly("base_acc", &EvalReport::base_acc)
        .def_readonly("all_acc_mean", &EvalReport::all_acc_mean)
        .def_readonly("all_acc_joint", &EvalReport::all_acc_joint)
        .def_readonly("per_class_acc", &EvalReport::per_class_acc)
        .def_readonly("confusion", &EvalReport::confusion)
        .def_readonly("base_to_novel_rate", &EvalReport::base_to_novel_rate)
        .def_readonly("novel_to_base_rate", &EvalReport::novel_to_base_rate);

    py::class_<MetricAggregate>(m, "MetricAggregate")
        .def_readonly("mean", &MetricAggregate::mean)
        .def_readonly("half_width", &MetricAggregate::half_width);

    py::class_<EpisodeAggregate>(m, "EpisodeAggregate")
        .def_readonly("novel_acc", &EpisodeAggregate::novel_acc)
        .def_readonly("base_acc", &EpisodeAggregate::base_acc)
        .def_readonly("all_acc_mean", &EpisodeAggregate::all_acc_mean)
        .def_readonly("all_acc_joint", &EpisodeAggregate::all_acc_joint)
        .def_readonly("base_to_novel_rate", &EpisodeAggregate::base_to_novel_rate)
        .def_readonly("episodes", &EpisodeAggregate::episodes);

    py::enum_<Ablation>(m, "Ablation")
        .value("none", Ablation::none)
        .value("mc", Ablation::mc)
        .value("mc_vb", Ablation::mc_vb)
        .value("mc_vb_lo", Ablation::mc_vb_lo)
        .value("cosine", Ablation::cosine)
        .value("freeze_base", Ablation::freeze_base)
        .value("l1", Ablation::l1)
        .value("l2", Ablation::l2)
        .value("norm_eq", Ablation::norm_eq)
        .value("vb_in_training", Ablation::vb_in_training)
        .value("mc_both", Ablation::mc_both)
        .value("balanced", Ablation::balanced);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("finetune", &PipelineConfig::finetune)
        .def_readwrite("hooks", &PipelineConfig::hooks)
        .def_readwrite("post_opt", &PipelineConfig::post_opt)
        .def_readwrite("enable_post_opt", &PipelineConfig::enable_post_opt)
        .def_readwrite("offline_variance_balancing",
                       &PipelineConfig::offline_variance_balancing)
        .def_readwrite("offline_norm_equalization",
                       &PipelineConfig::offline_norm_equalization)
        .def_readwrite("base_mode", &PipelineConfig::base_mode)
        .def_readwrite("init_seed", &PipelineConfig::init_seed)
        .def_static("for_ablation", &PipelineConfig::for_ablation);

    m.def("generate_synthetic", &generate_synthetic);
    m.def("split_base_novel", [](const FeatureDataset& ds, const std::vector<std::uint32_t>& ids) {
        return split_base_novel(ds, {ids.begin(), ids.end()});
    });
    m.def("sample_episode", &sample_episode, py::arg("base"), py::arg("novel"),
          py::arg("spec"), py::arg("mode") = BaseMode::zero_base);
    m.def("load_dataset",
          [](const std::filesystem::path& p, const std::string& fmt) {
              return load_dataset(p, fmt == "text" ? DatasetFormat::text
                                                   : DatasetFormat::binary);
          },
          py::arg("path"), py::arg("format") = "binary");
    m.def("save_dataset",
          [](const FeatureDataset& ds, const std::filesystem::path& p,
             const std::string& fmt) {
              save_dataset(ds, p, fmt == "text" ? DatasetFormat::text
                                                : DatasetFormat::binary);
          },
          py::arg("ds"), py::arg("path"), py::arg("format") = "binary");

    m.def("logits", &logits, py::arg("clf"), py::arg("f"),
          py::arg("mode") = LogitMode::linear, py::arg("cosine_scale") = 10.0);
    m.def("softmax", &softmax);
    m.def("cross_entropy_loss", &cross_entropy_loss);
    m.def("ce_gradient", &ce_gradient);
    m.def("train_base", &train_base);
    m.def("extend_classifier", &extend_classifier, py::arg("clf"), py::arg("n_novel"),
          py::arg("seed"), py::arg("init_scale") = std::nullopt);
    m.def("finetune", &finetune);

    m.def("compute_stats", &compute_stats);
    m.def("mean_center", &mean_center);
    m.def("variance_balance", &variance_balance);
    m.def("norm_equalize", &norm_equalize);
    m.def("proposition1_residual", [](const std::vector<double>& col) {
        return proposition1_residual(std::span<const double>(col));
    });

    m.def("init_affine", &init_affine);
    m.def("apply_affine", &apply_affine);
    m.def("train_affine", &train_affine, py::arg("clf"), py::arg("episode"),
          py::arg("cfg"), py::arg("mode") = LogitMode::linear,
          py::arg("cosine_scale") = 10.0);

    m.def("predict",
          [](const LinearClassifier& clf, const FeatureVector& f, LogitMode mode,
             double scale) { return predict(clf, nullptr, f, mode, scale); },
          py::arg("clf"), py::arg("f"), py::arg("mode") = LogitMode::linear,
          py::arg("cosine_scale") = 10.0);
    m.def("evaluate",
          [](const LinearClassifier& clf, const std::optional<AffineParams>& params,
             const Episode& ep, LogitMode mode, double scale) {
              return evaluate(clf, params ? &*params : nullptr, ep, mode, scale);
          },
          py::arg("clf"), py::arg("params"), py::arg("episode"),
          py::arg("mode") = LogitMode::linear, py::arg("cosine_scale") = 10.0);
    m.def("aggregate", &aggregate);
    m.def("run_episode", &run_episode);
    m.def("run_episodes", &run_episodes, py::arg("pretrained"), py::arg("base"),
          py::arg("novel"), py::arg("spec"), py::arg("cfg"), py::arg("episodes"),
          py::arg("workers") = 1);

    m.def("load_checkpoint", [](const std::filesystem::path& p) {
        auto c = load_checkpoint(p);
        return std::make_pair(c.classifier, c.affine);
    });
    m.def("save_checkpoint",
          [](const LinearClassifier& clf, const std::optional<AffineParams>& ap,
             const std::filesystem::path& p) { save_checkpoint({clf, ap}, p); });
}
