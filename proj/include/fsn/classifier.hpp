#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fsn/dataset.hpp"

namespace fsn {

enum class LogitMode { linear, cosine };

// Joint linear classifier over frozen features: one d-sized weight column per
// class, base columns first, novel columns appended by extend_classifier.
struct LinearClassifier {
    std::uint32_t dim = 0;
    std::uint32_t base_class_count = 0;
    std::uint32_t novel_class_count = 0;
    std::vector<double> weights;             // column-major, dim x class_count
    std::vector<std::uint32_t> class_map;    // column index -> source class id

    std::uint32_t class_count() const { return base_class_count + novel_class_count; }

    std::span<double> column(std::uint32_t i) {
        return {weights.data() + static_cast<std::size_t>(i) * dim, dim};
    }
    std::span<const double> column(std::uint32_t i) const {
        return {weights.data() + static_cast<std::size_t>(i) * dim, dim};
    }

    bool is_base_column(std::uint32_t i) const { return i < base_class_count; }

    // Episode column index for a source class id; throws DataError if absent.
    std::uint32_t column_of(std::uint32_t class_id) const;
};

// z_i = theta_i . f (linear) or cosine_scale * cos(theta_i, f), with 0 when
// either norm vanishes.
std::vector<double> logits(const LinearClassifier& clf, const FeatureVector& f,
                           LogitMode mode = LogitMode::linear, double cosine_scale = 10.0);

// Max-subtraction stable softmax.
std::vector<double> softmax(const std::vector<double>& z);

// -log p_label, clamped against p = 0.
double cross_entropy_loss(const std::vector<double>& p, std::uint32_t label);

// Loss gradient of CE(softmax(theta^T f)) w.r.t. theta: column i is
// (p_i - y_i) * f. Descent with this gradient pushes the true-class column up
// when f >= 0.
std::vector<double> ce_gradient(const FeatureVector& f, const std::vector<double>& p,
                                std::uint32_t label, std::uint32_t dim);

// Same loss gradient when logits are cosine similarities scaled by
// cosine_scale. Columns with zero norm (or zero-norm f) get zero gradient.
std::vector<double> ce_gradient_cosine(const LinearClassifier& clf, const FeatureVector& f,
                                       const std::vector<double>& p, std::uint32_t label,
                                       double cosine_scale);

}  // namespace fsn
