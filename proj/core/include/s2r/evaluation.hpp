#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "s2r/dataset.hpp"
#include "s2r/embedder.hpp"
#include "s2r/generator.hpp"
#include "s2r/metrics.hpp"
#include "s2r/palette.hpp"
#include "s2r/run_config.hpp"
#include "s2r/segmenter.hpp"
#include "s2r/training.hpp"

namespace s2r {

// Label source and image reference source of one evaluation split, chosen independently.
struct SplitSpec {
    std::string name;
    DatasetHandle labels;      // paired; generator inputs and mIoU ground truth
    DatasetHandle references;  // images compared against for FID/KID
    std::uint64_t seed = 0;    // noise for label i is drawn from derive_seed(seed, kSeedEval, i)
    std::int64_t max_samples = 0;  // 0 = every label
};

struct EvalOptions {
    int batch_size = 8;
    int kid_subset_size = 100;  // clamped to the smaller set size
    int kid_subsets = 100;
    bool patchwise_generation = false;
    int grid_k_generation = 2;
    int contact_sheet_count = 16;
};

struct MetricsReport {
    std::string split;
    std::string embedder_id;
    std::string segmenter_kind;  // empty when mIoU was not computed
    std::int64_t num_generated = 0;
    std::int64_t num_reference = 0;
    double fid = 0.0;
    KidResult kid;
    std::int64_t kid_subset_size = 0;
    int kid_subsets = 0;
    std::optional<MiouResult> miou;
    std::string miou_note;  // reason mIoU is absent
    std::vector<std::string> class_names;
    std::int64_t checkpoint_step = -1;

    std::string to_json(int indent = 2) const;
    // Aligned plain-text table: summary rows followed by per-class IoU.
    std::string to_table() const;
};

// Generated images (N×3×H×W) for the first n labels of `labels`, with per-index noise.
torch::Tensor generate_for_labels(Generator& g, const DatasetHandle& labels, std::int64_t n, std::uint64_t seed,
                                  const EvalOptions& options);

struct EvalOutput {
    MetricsReport report;
    torch::Tensor generated;  // N×3×H×W
};

// FID/KID of generated images vs the split's references; mIoU of segmenter(generated)
// vs the input labels, omitted and flagged when `segmenter` is null.
EvalOutput evaluate_split(Generator& g, const SplitSpec& split, Embedder& embedder, Segmenter* segmenter,
                          const ClassPalette& palette, const EvalOptions& options = {});

EvalOptions eval_options_for(const RunConfig& config);

// The two evaluation splits:
//   split1: labeled real split, its labels as input and its images as references;
//   split2: held-out synthetic labels as input, real images as references.
// split1 is omitted when the data has no labeled real split.
std::vector<SplitSpec> standard_splits(const ResolvedData& data, std::uint64_t seed, std::int64_t max_samples = 0);

// <out_dir>/<split>.json, <split>.txt and <split>_contact_sheet.png.
void write_report(const EvalOutput& output, const std::filesystem::path& out_dir, int contact_sheet_count = 16);

}  // namespace s2r
