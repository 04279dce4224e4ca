#include <doctest.h>

#include <cmath>
#include <random>

#include "fsn/error.hpp"
#include "fsn/evaluation.hpp"
#include "fsn/synthetic.hpp"
#include "fsn/train.hpp"

using namespace fsn;

namespace {

LinearClassifier identity_clf(std::uint32_t n) {
    LinearClassifier clf;
    clf.dim = n;
    clf.base_class_count = n;
    clf.weights.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (std::uint32_t i = 0; i < n; ++i) clf.weights[i * n + i] = 1.0;
    clf.class_map.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) clf.class_map[i] = i;
    return clf;
}

}  // namespace

TEST_CASE("predict: argmax and tie-break to lowest index") {
    LinearClassifier clf;
    clf.dim = 2;
    clf.base_class_count = 2;
    clf.weights = {1.0, 0.0, 0.0, 1.0};
    clf.class_map = {0, 1};
    CHECK(predict(clf, nullptr, {3.0f, 4.0f}) == 1);
    CHECK(predict(clf, nullptr, {2.0f, 2.0f}) == 0);  // tie
    CHECK_THROWS_AS(predict(clf, nullptr, {1.0f}), DataError);
}

TEST_CASE("evaluate: perfect predictions give 100/100/100 and diagonal confusion") {
    const std::uint32_t n = 4;
    auto clf = identity_clf(n);
    clf.base_class_count = 2;
    clf.novel_class_count = 2;

    Episode ep;
    ep.novel_query.dim = n;
    ep.base_query.dim = n;
    for (std::uint32_t c = 0; c < n; ++c) {
        LabeledFeature s;
        s.label = c;
        s.feature.assign(n, 0.0f);
        s.feature[c] = 1.0f;
        if (c < 2) {
            ep.base_query.classes.push_back(c);
            ep.base_query.samples.push_back(s);
        } else {
            ep.novel_query.classes.push_back(c);
            ep.novel_query.samples.push_back(s);
            ep.class_map.push_back(c);
        }
    }
    const auto rep = evaluate(clf, nullptr, ep);
    CHECK(rep.novel_acc == 100.0);
    CHECK(rep.base_acc == 100.0);
    CHECK(rep.all_acc_mean == 100.0);
    CHECK(rep.all_acc_joint == 100.0);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            CHECK(rep.confusion[i][j] == (i == j ? 1u : 0u));
    CHECK(rep.base_to_novel_rate == 0.0);
}

TEST_CASE("evaluate matches an independent brute-force recount") {
    SyntheticConfig scfg;
    scfg.dim = 10;
    scfg.n_base_classes = 4;
    scfg.n_novel_classes = 6;
    scfg.samples_per_class = 20;
    scfg.within_class_std = 0.8;  // noisy enough to force mistakes
    scfg.seed = 31;
    const auto ds = generate_synthetic(scfg);
    std::unordered_set<std::uint32_t> novel_ids = {4, 5, 6, 7, 8, 9};
    auto [base, novel] = split_base_novel(ds, novel_ids);

    TrainConfig pre;
    pre.learning_rate = 0.05;
    pre.iterations = 50;
    pre.seed = 2;
    auto pretrained = train_base(base, pre);
    EpisodeSpec spec;
    spec.n_way = 3;
    spec.k_shot = 2;
    spec.query_per_class = 5;
    spec.seed = 7;
    const auto ep = sample_episode(base, novel, spec);
    auto ext = extend_classifier(pretrained, 3, 8);
    NormalizationConfig hooks;
    auto cfg = TrainConfig::finetune_defaults(2);
    cfg.iterations = 100;
    const auto clf = finetune(ext, ep, cfg, hooks);

    const auto rep = evaluate(clf, nullptr, ep);

    // recount independently with a naive argmax
    auto naive_pred = [&](const FeatureVector& f) {
        std::uint32_t best = 0;
        double best_z = -1e300;
        for (std::uint32_t i = 0; i < clf.class_count(); ++i) {
            double z = 0.0;
            for (std::uint32_t j = 0; j < clf.dim; ++j) z += clf.column(i)[j] * f[j];
            if (z > best_z) {
                best_z = z;
                best = i;
            }
        }
        return best;
    };
    std::uint64_t nh = 0, bh = 0, b2n = 0;
    for (const auto& s : ep.novel_query.samples)
        nh += clf.class_map[naive_pred(s.feature)] == s.label;
    for (const auto& s : ep.base_query.samples) {
        const auto pred = naive_pred(s.feature);
        bh += clf.class_map[pred] == s.label;
        b2n += pred >= clf.base_class_count;
    }
    CHECK(rep.novel_acc ==
          doctest::Approx(100.0 * nh / ep.novel_query.samples.size()));
    CHECK(rep.base_acc == doctest::Approx(100.0 * bh / ep.base_query.samples.size()));
    CHECK(rep.base_to_novel_rate ==
          doctest::Approx(static_cast<double>(b2n) / ep.base_query.samples.size()));
    CHECK(rep.all_acc_mean == doctest::Approx((rep.novel_acc + rep.base_acc) / 2.0));

    // confusion totals equal the query count; diagonal reproduces accuracy
    std::uint64_t total = 0, diag_novel = 0;
    for (std::size_t i = 0; i < rep.confusion.size(); ++i)
        for (std::size_t j = 0; j < rep.confusion.size(); ++j) total += rep.confusion[i][j];
    CHECK(total == ep.novel_query.samples.size() + ep.base_query.samples.size());
    for (std::uint32_t i = clf.base_class_count; i < clf.class_count(); ++i)
        diag_novel += rep.confusion[i][i];
    CHECK(100.0 * diag_novel / ep.novel_query.samples.size() ==
          doctest::Approx(rep.novel_acc));
}

TEST_CASE("aggregate: closed forms and recomputation oracle") {
    EvalReport a, b;
    a.novel_acc = 40.0;
    b.novel_acc = 60.0;
    auto agg = aggregate({a, b});
    CHECK(agg.novel_acc.mean == doctest::Approx(50.0));
    REQUIRE(agg.novel_acc.half_width.has_value());
    CHECK(*agg.novel_acc.half_width == doctest::Approx(19.6));

    // identical reports: zero half-width
    agg = aggregate({a, a, a});
    CHECK(agg.novel_acc.half_width.has_value());
    CHECK(*agg.novel_acc.half_width == doctest::Approx(0.0));

    // single report: no interval
    agg = aggregate({a});
    CHECK(!agg.novel_acc.half_width.has_value());

    // 600 random reports against an independent recomputation
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    std::vector<EvalReport> reports(600);
    for (auto& r : reports) r.novel_acc = dist(rng);
    agg = aggregate(reports);
    long double sum = 0.0L;
    for (const auto& r : reports) sum += r.novel_acc;
    const long double mean = sum / reports.size();
    long double ss = 0.0L;
    for (const auto& r : reports) ss += (r.novel_acc - mean) * (r.novel_acc - mean);
    const long double hw = 1.96L * sqrtl(ss / (reports.size() - 1)) / sqrtl(600.0L);
    CHECK(std::abs(agg.novel_acc.mean - static_cast<double>(mean)) < 1e-9);
    CHECK(std::abs(*agg.novel_acc.half_width - static_cast<double>(hw)) < 1e-9);

    CHECK_THROWS_AS(aggregate({}), DataError);
}

TEST_CASE("the All column is the midpoint of novel and base accuracy") {
    // fixed vectors from the published table layout
    EvalReport r;
    r.novel_acc = 51.72;
    r.base_acc = 65.81;
    r.all_acc_mean = (r.novel_acc + r.base_acc) / 2.0;
    CHECK(std::round(r.all_acc_mean * 100.0) / 100.0 == doctest::Approx(58.77));
}

TEST_CASE("upper bounds") {
    SyntheticConfig scfg;
    scfg.dim = 16;
    scfg.n_base_classes = 4;
    scfg.n_novel_classes = 5;
    scfg.samples_per_class = 25;
    scfg.prototype_scale = 2.0;
    scfg.within_class_std = 0.1;  // separable
    scfg.seed = 77;
    const auto ds = generate_synthetic(scfg);
    auto [base, novel] = split_base_novel(ds, {4, 5, 6, 7, 8});

    TrainConfig pre;
    pre.learning_rate = 0.1;
    pre.iterations = 300;
    pre.seed = 3;
    const auto pretrained = train_base(base, pre);

    EpisodeSpec spec;
    spec.n_way = 5;
    spec.k_shot = 5;
    spec.query_per_class = 10;
    spec.seed = 12;
    const auto ep = sample_episode(base, novel, spec);

    // novel-only classifier trained on the support set
    LinearClassifier novel_only;
    {
        FeatureDataset sup = ep.novel_support;
        TrainConfig cfg;
        cfg.learning_rate = 0.05;
        cfg.iterations = 300;
        cfg.seed = 4;
        novel_only = train_base(sup, cfg);
    }

    const auto [base_ub, novel_ub] = upper_bounds(pretrained, novel_only, ep);
    CHECK(base_ub == 100.0);  // separable base set
    CHECK(novel_ub > 0.0);

    // joint pipeline accuracy never exceeds the conditional bounds
    auto ext = extend_classifier(pretrained, 5, 5);
    NormalizationConfig hooks;
    hooks.mean_centering = MeanCentering::novel_only;
    const auto clf = finetune(ext, ep, TrainConfig::finetune_defaults(5), hooks);
    const auto rep = evaluate(clf, nullptr, ep);
    CHECK(rep.base_acc <= base_ub + 1e-9);
}

TEST_CASE("single-class novel upper bound is 100") {
    SyntheticConfig scfg;
    scfg.dim = 8;
    scfg.n_base_classes = 3;
    scfg.n_novel_classes = 2;
    scfg.samples_per_class = 10;
    scfg.seed = 13;
    const auto ds = generate_synthetic(scfg);
    auto [base, novel] = split_base_novel(ds, {3, 4});
    EpisodeSpec spec;
    spec.n_way = 1;
    spec.k_shot = 2;
    spec.query_per_class = 3;
    spec.seed = 1;
    const auto ep = sample_episode(base, novel, spec);

    TrainConfig pre;
    pre.iterations = 10;
    pre.learning_rate = 0.05;
    const auto pretrained = train_base(base, pre);
    // a 1-way classifier always predicts its single class
    LinearClassifier single = train_base(ep.novel_support, pre);
    const auto [base_ub, novel_ub] = upper_bounds(pretrained, single, ep);
    CHECK(novel_ub == 100.0);
}
