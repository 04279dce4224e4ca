#include "fsn/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "fsn/error.hpp"

namespace fsn {

std::uint32_t LinearClassifier::column_of(std::uint32_t class_id) const {
    for (std::uint32_t i = 0; i < class_map.size(); ++i)
        if (class_map[i] == class_id) return i;
    throw DataError("class " + std::to_string(class_id) + " not covered by classifier");
}

std::vector<double> logits(const LinearClassifier& clf, const FeatureVector& f,
                           LogitMode mode, double cosine_scale) {
    if (f.size() != clf.dim) throw DataError("feature/classifier dimension mismatch");
    const std::uint32_t n = clf.class_count();
    std::vector<double> z(n, 0.0);
    if (mode == LogitMode::linear) {
        for (std::uint32_t i = 0; i < n; ++i) {
            auto col = clf.column(i);
            double acc = 0.0;
            for (std::uint32_t j = 0; j < clf.dim; ++j) acc += col[j] * f[j];
            z[i] = acc;
        }
    } else {
        double fn2 = 0.0;
        for (float v : f) fn2 += static_cast<double>(v) * v;
        const double fn = std::sqrt(fn2);
        for (std::uint32_t i = 0; i < n; ++i) {
            auto col = clf.column(i);
            double dot = 0.0, wn2 = 0.0;
            for (std::uint32_t j = 0; j < clf.dim; ++j) {
                dot += col[j] * f[j];
                wn2 += col[j] * col[j];
            }
            const double wn = std::sqrt(wn2);
            z[i] = (wn == 0.0 || fn == 0.0) ? 0.0 : cosine_scale * dot / (wn * fn);
        }
    }
    return z;
}

std::vector<double> softmax(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
    return p;
}

double cross_entropy_loss(const std::vector<double>& p, std::uint32_t label) {
    if (label >= p.size()) throw DataError("label out of range");
    constexpr double kEps = 1e-300;
    return -std::log(std::max(p[label], kEps));
}

std::vector<double> ce_gradient(const FeatureVector& f, const std::vector<double>& p,
                                std::uint32_t label, std::uint32_t dim) {
    if (f.size() != dim) throw DataError("feature dimension mismatch");
    if (label >= p.size()) throw DataError("label out of range");
    std::vector<double> g(static_cast<std::size_t>(dim) * p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double coeff = p[i] - (i == label ? 1.0 : 0.0);
        double* col = g.data() + i * dim;
        for (std::uint32_t j = 0; j < dim; ++j) col[j] = coeff * f[j];
    }
    return g;
}

std::vector<double> ce_gradient_cosine(const LinearClassifier& clf, const FeatureVector& f,
                                       const std::vector<double>& p, std::uint32_t label,
                                       double cosine_scale) {
    const std::uint32_t d = clf.dim;
    const std::uint32_t n = clf.class_count();
    std::vector<double> g(static_cast<std::size_t>(d) * n, 0.0);
    double fn2 = 0.0;
    for (float v : f) fn2 += static_cast<double>(v) * v;
    const double fn = std::sqrt(fn2);
    if (fn == 0.0) return g;
    for (std::uint32_t i = 0; i < n; ++i) {
        const double coeff = p[i] - (i == label ? 1.0 : 0.0);
        auto col = clf.column(i);
        double dot = 0.0, wn2 = 0.0;
        for (std::uint32_t j = 0; j < d; ++j) {
            dot += col[j] * f[j];
            wn2 += col[j] * col[j];
        }
        const double wn = std::sqrt(wn2);
        if (wn == 0.0) continue;
        // d z_i / d theta_i = s * (f / (|w||f|) - dot * w / (|w|^3 |f|))
        double* out = g.data() + static_cast<std::size_t>(i) * d;
        for (std::uint32_t j = 0; j < d; ++j)
            out[j] = coeff * cosine_scale *
                     (f[j] / (wn * fn) - dot * col[j] / (wn * wn * wn * fn));
    }
    return g;
}

}  // namespace fsn
