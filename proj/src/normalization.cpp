#include "fsn/normalization.hpp"

#include <cmath>

#include "fsn/error.hpp"

namespace fsn {

void NormalizationConfig::validate() const {
    if (cosine_mode && variance_balancing != VarianceBalancing::off)
        throw UsageError("cosine mode and variance balancing are mutually exclusive");
}

namespace {

void column_stats(std::span<const double> col, double& mu, double& sigma, double& norm) {
    const std::size_t d = col.size();
    double sum = 0.0;
    for (double v : col) sum += v;
    mu = sum / static_cast<double>(d);
    double var = 0.0, n2 = 0.0;
    for (double v : col) {
        var += (v - mu) * (v - mu);
        n2 += v * v;
    }
    sigma = std::sqrt(var / static_cast<double>(d));
    norm = std::sqrt(n2);
}

}  // namespace

WeightStats compute_stats(const LinearClassifier& clf) {
    const std::uint32_t n = clf.class_count();
    WeightStats st;
    st.mu.resize(n);
    st.sigma.resize(n);
    st.norms.resize(n);
    for (std::uint32_t i = 0; i < n; ++i)
        column_stats(clf.column(i), st.mu[i], st.sigma[i], st.norms[i]);
    for (std::uint32_t i = 0; i < clf.base_class_count; ++i) {
        st.mu_bar_base += st.mu[i];
        st.sigma_bar_base += st.sigma[i];
    }
    if (clf.base_class_count > 0) {
        st.mu_bar_base /= clf.base_class_count;
        st.sigma_bar_base /= clf.base_class_count;
    }
    for (std::uint32_t i = clf.base_class_count; i < n; ++i) {
        st.mu_bar_novel += st.mu[i];
        st.sigma_bar_novel += st.sigma[i];
    }
    if (clf.novel_class_count > 0) {
        st.mu_bar_novel /= clf.novel_class_count;
        st.sigma_bar_novel /= clf.novel_class_count;
    }
    return st;
}

void mean_center(LinearClassifier& clf, CenteringScope scope) {
    const std::uint32_t first =
        scope == CenteringScope::both ? 0 : clf.base_class_count;
    for (std::uint32_t i = first; i < clf.class_count(); ++i) {
        auto col = clf.column(i);
        double sum = 0.0;
        for (double v : col) sum += v;
        const double mu = sum / static_cast<double>(clf.dim);
        for (auto& v : col) v -= mu;
    }
}

void variance_balance(LinearClassifier& clf, const WeightStats& stats) {
    if (stats.sigma_bar_novel <= 0.0) throw NumericError("untrained novel classifier");
    for (std::uint32_t i = 0; i < clf.base_class_count; ++i) {
        if (stats.sigma[i] <= 0.0)
            throw NumericError("zero-variance base class " + std::to_string(i));
        const double scale = stats.sigma_bar_novel / stats.sigma[i];
        for (auto& v : clf.column(i)) v *= scale;
    }
}

void norm_equalize(LinearClassifier& clf) {
    const std::uint32_t n = clf.class_count();
    std::vector<double> norms(n);
    double mean = 0.0;
    for (std::uint32_t i = 0; i < n; ++i) {
        double n2 = 0.0;
        for (double v : clf.column(i)) n2 += v * v;
        norms[i] = std::sqrt(n2);
        if (norms[i] == 0.0) throw NumericError("zero-norm column " + std::to_string(i));
        mean += norms[i];
    }
    mean /= static_cast<double>(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const double scale = mean / norms[i];
        for (auto& v : clf.column(i)) v *= scale;
    }
}

double proposition1_residual(std::span<const double> column) {
    double mu, sigma, norm;
    column_stats(column, mu, sigma, norm);
    return std::abs(sigma - norm / std::sqrt(static_cast<double>(column.size())));
}

}  // namespace fsn
