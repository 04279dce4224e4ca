#pragma once

#include <span>
#include <vector>

#include "fsn/classifier.hpp"

namespace fsn {

// Class-wise weight statistics. Variances use divisor d (population form).
struct WeightStats {
    std::vector<double> mu;     // per-column mean
    std::vector<double> sigma;  // per-column std
    std::vector<double> norms;  // per-column L2 norm
    double mu_bar_base = 0.0;
    double mu_bar_novel = 0.0;
    double sigma_bar_base = 0.0;
    double sigma_bar_novel = 0.0;
};

enum class CenteringScope { novel_only, both };
enum class MeanCentering { off, novel_only, both };
enum class VarianceBalancing { off, offline, in_training };

// Hooks applied during/after fine-tuning. Cosine mode and variance balancing
// both rescale logit magnitudes and are mutually exclusive.
struct NormalizationConfig {
    MeanCentering mean_centering = MeanCentering::off;
    VarianceBalancing variance_balancing = VarianceBalancing::off;
    bool cosine_mode = false;
    double cosine_scale = 10.0;
    bool freeze_base = false;
    bool norm_equalization = false;

    void validate() const;
};

WeightStats compute_stats(const LinearClassifier& clf);

// Subtracts each in-scope column's scalar mean from its entries. Leaves
// per-column sigma untouched.
void mean_center(LinearClassifier& clf, CenteringScope scope);

// Rescales each base column by sigma_bar_novel / sigma_base_i. Novel columns
// untouched. Throws on degenerate (zero-variance) columns.
void variance_balance(LinearClassifier& clf, const WeightStats& stats);

// Baseline: rescales every column to the mean L2 norm.
void norm_equalize(LinearClassifier& clf);

// |sigma - ||theta||_2 / sqrt(d)|; exactly 0 for zero-mean columns.
double proposition1_residual(std::span<const double> column);

}  // namespace fsn
