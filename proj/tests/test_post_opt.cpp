#include <doctest.h>

#include <cmath>
#include <random>

#include "fsn/affine.hpp"
#include "fsn/error.hpp"
#include "fsn/evaluation.hpp"
#include "fsn/synthetic.hpp"
#include "fsn/train.hpp"

using namespace fsn;

namespace {

struct Setup {
    FeatureDataset base, novel;
    Episode episode;
    LinearClassifier clf;
};

Setup make_setup(std::uint64_t seed) {
    SyntheticConfig scfg;
    scfg.dim = 12;
    scfg.n_base_classes = 6;
    scfg.n_novel_classes = 8;
    scfg.samples_per_class = 30;
    scfg.seed = seed;
    const auto ds = generate_synthetic(scfg);
    std::unordered_set<std::uint32_t> novel_ids;
    for (std::uint32_t c = 6; c < 14; ++c) novel_ids.insert(c);
    auto [base, novel] = split_base_novel(ds, novel_ids);

    TrainConfig pre;
    pre.learning_rate = 0.1;
    pre.iterations = 300;
    pre.batch_size = kFullBatch;
    pre.seed = seed + 1;
    auto pretrained = train_base(base, pre);

    EpisodeSpec spec;
    spec.n_way = 5;
    spec.k_shot = 5;
    spec.query_per_class = 10;
    spec.seed = seed + 2;
    auto ep = sample_episode(base, novel, spec);

    auto ext = extend_classifier(pretrained, 5, seed + 3);
    NormalizationConfig hooks;
    auto clf = finetune(ext, ep, TrainConfig::finetune_defaults(5), hooks);
    return {std::move(base), std::move(novel), std::move(ep), std::move(clf)};
}

}  // namespace

TEST_CASE("init_affine is the identity transform") {
    const auto s = make_setup(60);
    const auto params = init_affine(s.clf);
    CHECK(params.gamma.size() == s.clf.class_count());
    for (double g : params.gamma) CHECK(g == 1.0);
    for (double b : params.beta) CHECK(b == 0.0);

    for (const auto& q : s.episode.novel_query.samples) {
        const auto z = logits(s.clf, q.feature);
        const auto z2 = apply_affine(params, z);
        CHECK(z2 == z);
        CHECK(predict(s.clf, &params, q.feature) == predict(s.clf, nullptr, q.feature));
    }
}

TEST_CASE("apply_affine arithmetic and argmax behavior") {
    AffineParams p;
    p.gamma = {2.0, 2.0};
    p.beta = {0.0, 0.0};
    auto z = apply_affine(p, {1.0, 3.0});
    CHECK(z[0] == doctest::Approx(2.0));
    CHECK(z[1] == doctest::Approx(6.0));

    // non-uniform gamma can flip the argmax
    p.gamma = {1.0, 0.5};
    z = apply_affine(p, {1.0, 3.0});
    CHECK(z[0] == doctest::Approx(1.0));
    CHECK(z[1] == doctest::Approx(1.5));

    p.gamma = {1.0};
    p.beta = {0.0};
    CHECK_THROWS_AS(apply_affine(p, {1.0, 2.0}), DataError);
}

TEST_CASE("train_affine with zero iterations is a no-op") {
    const auto s = make_setup(61);
    PostOptConfig cfg = PostOptConfig::defaults(5);
    cfg.train.iterations = 0;
    const auto params = train_affine(s.clf, s.episode, cfg);
    for (double g : params.gamma) CHECK(g == 1.0);
    for (double b : params.beta) CHECK(b == 0.0);
}

TEST_CASE("train_affine leaves classifier weights byte-identical") {
    auto s = make_setup(62);
    const auto snapshot = s.clf.weights;
    const auto params = train_affine(s.clf, s.episode, PostOptConfig::defaults(5));
    CHECK(s.clf.weights == snapshot);
    // and it is deterministic
    const auto params2 = train_affine(s.clf, s.episode, PostOptConfig::defaults(5));
    CHECK(params.gamma == params2.gamma);
    CHECK(params.beta == params2.beta);
}

TEST_CASE("affine gradients match finite differences") {
    const auto s = make_setup(63);
    const auto& samples = s.episode.novel_support.samples;

    // mean loss as a function of (gamma, beta)
    auto loss_of = [&](const AffineParams& p) {
        double acc = 0.0;
        for (const auto& q : samples) {
            const auto z = apply_affine(p, logits(s.clf, q.feature));
            acc += cross_entropy_loss(softmax(z), s.clf.column_of(q.label));
        }
        return acc / static_cast<double>(samples.size());
    };

    std::mt19937_64 rng(64);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    AffineParams p = init_affine(s.clf);
    for (auto& g : p.gamma) g += dist(rng);
    for (auto& b : p.beta) b += dist(rng);

    // analytic mean gradient
    const std::size_t n = p.gamma.size();
    std::vector<double> gg(n, 0.0), gb(n, 0.0);
    for (const auto& q : samples) {
        const auto z = logits(s.clf, q.feature);
        const auto probs = softmax(apply_affine(p, z));
        const auto label = s.clf.column_of(q.label);
        for (std::size_t i = 0; i < n; ++i) {
            const double coeff = probs[i] - (i == label ? 1.0 : 0.0);
            gg[i] += coeff * z[i];
            gb[i] += coeff;
        }
    }
    for (auto& v : gg) v /= static_cast<double>(samples.size());
    for (auto& v : gb) v /= static_cast<double>(samples.size());

    const double h = 1e-6;
    for (std::size_t i = 0; i < n; ++i) {
        auto pp = p;
        pp.gamma[i] += h;
        auto pm = p;
        pm.gamma[i] -= h;
        const double fd = (loss_of(pp) - loss_of(pm)) / (2.0 * h);
        CHECK(std::abs(gg[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));

        pp = p;
        pp.beta[i] += h;
        pm = p;
        pm.beta[i] -= h;
        const double fdb = (loss_of(pp) - loss_of(pm)) / (2.0 * h);
        CHECK(std::abs(gb[i] - fdb) <= 1e-6 * std::max(1.0, std::abs(fdb)));
    }
}

TEST_CASE("novel_params_only leaves base-class parameters at identity") {
    const auto s = make_setup(65);
    PostOptConfig cfg = PostOptConfig::defaults(5);
    cfg.novel_params_only = true;
    const auto params = train_affine(s.clf, s.episode, cfg);
    for (std::uint32_t i = 0; i < s.clf.base_class_count; ++i) {
        CHECK(params.gamma[i] == 1.0);
        CHECK(params.beta[i] == 0.0);
    }
    bool any_changed = false;
    for (std::uint32_t i = s.clf.base_class_count; i < s.clf.class_count(); ++i)
        any_changed = any_changed || params.gamma[i] != 1.0 || params.beta[i] != 0.0;
    CHECK(any_changed);
}

TEST_CASE("per-shot post-opt schedules") {
    CHECK(PostOptConfig::defaults(1).train.iterations == 500);
    CHECK(PostOptConfig::defaults(5).train.iterations == 50);
    CHECK(PostOptConfig::defaults(10).train.iterations == 5);
}
