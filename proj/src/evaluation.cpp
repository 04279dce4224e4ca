#include "fsn/evaluation.hpp"

#include <cmath>

#include "fsn/error.hpp"

namespace fsn {

std::uint32_t predict(const LinearClassifier& clf, const AffineParams* params,
                      const FeatureVector& f, LogitMode mode, double cosine_scale) {
    auto z = logits(clf, f, mode, cosine_scale);
    if (params) z = apply_affine(*params, z);
    std::uint32_t best = 0;
    for (std::uint32_t i = 1; i < z.size(); ++i)
        if (z[i] > z[best]) best = i;
    return best;
}

EvalReport evaluate(const LinearClassifier& clf, const AffineParams* params,
                    const Episode& episode, LogitMode mode, double cosine_scale) {
    const std::uint32_t n = clf.class_count();
    EvalReport rep;
    rep.confusion.assign(n, std::vector<std::uint64_t>(n, 0));

    std::uint64_t novel_total = 0, novel_hit = 0, base_total = 0, base_hit = 0;
    std::uint64_t base_as_novel = 0, novel_as_base = 0;

    auto score = [&](const FeatureDataset& pool, bool is_base_pool) {
        for (const auto& s : pool.samples) {
            const std::uint32_t truth = clf.column_of(s.label);
            const std::uint32_t pred = predict(clf, params, s.feature, mode, cosine_scale);
            rep.confusion[truth][pred]++;
            if (is_base_pool) {
                base_total++;
                if (pred == truth) base_hit++;
                if (!clf.is_base_column(pred)) base_as_novel++;
            } else {
                novel_total++;
                if (pred == truth) novel_hit++;
                if (clf.is_base_column(pred)) novel_as_base++;
            }
        }
    };
    score(episode.novel_query, false);
    score(episode.base_query, true);

    rep.novel_acc = novel_total ? 100.0 * novel_hit / novel_total : 0.0;
    rep.base_acc = base_total ? 100.0 * base_hit / base_total : 0.0;
    rep.all_acc_mean = (rep.novel_acc + rep.base_acc) / 2.0;
    rep.all_acc_joint = (novel_total + base_total)
                            ? 100.0 * (novel_hit + base_hit) / (novel_total + base_total)
                            : 0.0;
    rep.base_to_novel_rate = base_total ? static_cast<double>(base_as_novel) / base_total : 0.0;
    rep.novel_to_base_rate =
        novel_total ? static_cast<double>(novel_as_base) / novel_total : 0.0;

    rep.per_class_acc.assign(n, 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint64_t row = 0;
        for (auto c : rep.confusion[i]) row += c;
        rep.per_class_acc[i] = row ? 100.0 * rep.confusion[i][i] / row : 0.0;
    }
    return rep;
}

namespace {

MetricAggregate agg_metric(const std::vector<EvalReport>& reports,
                           double (*sel)(const EvalReport&)) {
    MetricAggregate out;
    const std::size_t t = reports.size();
    double sum = 0.0;
    for (const auto& r : reports) sum += sel(r);
    out.mean = sum / static_cast<double>(t);
    if (t >= 2) {
        double ss = 0.0;
        for (const auto& r : reports) {
            const double d = sel(r) - out.mean;
            ss += d * d;
        }
        const double s = std::sqrt(ss / static_cast<double>(t - 1));
        out.half_width = 1.96 * s / std::sqrt(static_cast<double>(t));
    }
    return out;
}

}  // namespace

EpisodeAggregate aggregate(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw DataError("no reports to aggregate");
    EpisodeAggregate agg;
    agg.episodes = reports.size();
    agg.novel_acc = agg_metric(reports, [](const EvalReport& r) { return r.novel_acc; });
    agg.base_acc = agg_metric(reports, [](const EvalReport& r) { return r.base_acc; });
    agg.all_acc_mean =
        agg_metric(reports, [](const EvalReport& r) { return r.all_acc_mean; });
    agg.all_acc_joint =
        agg_metric(reports, [](const EvalReport& r) { return r.all_acc_joint; });
    agg.base_to_novel_rate =
        agg_metric(reports, [](const EvalReport& r) { return r.base_to_novel_rate; });
    return agg;
}

std::pair<double, double> upper_bounds(const LinearClassifier& pretrained,
                                       const LinearClassifier& novel_only,
                                       const Episode& episode) {
    std::uint64_t hit = 0, total = 0;
    for (const auto& s : episode.base_query.samples) {
        const std::uint32_t truth = pretrained.column_of(s.label);
        if (predict(pretrained, nullptr, s.feature) == truth) hit++;
        total++;
    }
    const double base_ub = total ? 100.0 * hit / total : 0.0;
    hit = total = 0;
    for (const auto& s : episode.novel_query.samples) {
        const std::uint32_t truth = novel_only.column_of(s.label);
        if (predict(novel_only, nullptr, s.feature) == truth) hit++;
        total++;
    }
    const double novel_ub = total ? 100.0 * hit / total : 0.0;
    return {base_ub, novel_ub};
}

}  // namespace fsn
