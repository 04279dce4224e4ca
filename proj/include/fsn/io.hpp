#pragma once

#include <filesystem>
#include <optional>

#include "fsn/affine.hpp"
#include "fsn/classifier.hpp"
#include "fsn/dataset.hpp"

namespace fsn {

enum class DatasetFormat { binary, text };

// Binary "FSF1": magic 'F''S''F''1', LE u32 dim, u32 class_count,
// u32 sample_count, u8 relu_flag, 3 reserved zero bytes, class ids, then
// (u32 label, dim x f32) records. Text: CSV with header label,f0,...,f{d-1}.
FeatureDataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
void save_dataset(const FeatureDataset& ds, const std::filesystem::path& path,
                  DatasetFormat format);

struct Checkpoint {
    LinearClassifier classifier;
    std::optional<AffineParams> affine;
};

// Binary "FSC1": magic, LE u32 dim, u32 base_count, u32 novel_count,
// column-major f64 weights, then an optional trailing affine block
// (u32 count, f64 gamma[], f64 beta[]).
Checkpoint load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

}  // namespace fsn
