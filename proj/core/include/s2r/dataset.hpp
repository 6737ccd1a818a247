#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "s2r/palette.hpp"

namespace s2r {

enum class DatasetKind { PairedSynthetic, UnpairedReal };

const char* to_string(DatasetKind kind);

struct ImageSize {
    std::int64_t height = 0;
    std::int64_t width = 0;
    bool operator==(const ImageSize&) const = default;
};

struct Sample {
    std::string name;                  // filename stem
    torch::Tensor image;               // 3×H×W float in [-1,1]
    std::optional<torch::Tensor> ids;  // H×W int64; present for paired samples only
};

// Backing store of a dataset. Implementations are immutable after
// construction, so concurrent `load` calls are safe.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::int64_t size() const = 0;
    virtual const std::string& name(std::int64_t index) const = 0;
    virtual bool has_labels() const = 0;
    virtual Sample load(std::int64_t index) const = 0;
};

// Read-only view onto a SampleSource (optionally restricted to an index subset).
class DatasetHandle {
public:
    DatasetHandle(DatasetKind kind, std::shared_ptr<const SampleSource> source);

    DatasetKind kind() const { return kind_; }
    std::int64_t size() const { return static_cast<std::int64_t>(indices_.size()); }
    const std::string& name(std::int64_t index) const;
    // Unpaired-real handles never expose labels.
    Sample sample(std::int64_t index) const;

    // Same samples under a different kind (e.g. a labeled real split viewed as unpaired).
    DatasetHandle as_kind(DatasetKind kind) const;
    DatasetHandle subset(std::int64_t begin, std::int64_t end) const;

    // Stack samples [indices] into batches: images B×3×H×W and ids B×H×W (paired only).
    std::pair<torch::Tensor, std::optional<torch::Tensor>> batch(const std::vector<std::int64_t>& indices) const;

private:
    DatasetHandle(DatasetKind kind, std::shared_ptr<const SampleSource> source, std::vector<std::int64_t> indices);

    DatasetKind kind_;
    std::shared_ptr<const SampleSource> source_;
    std::vector<std::int64_t> indices_;
};

// In-memory source; used for toy domains and tests.
std::shared_ptr<const SampleSource> make_memory_source(std::vector<Sample> samples);

struct LoadOptions {
    std::optional<ImageSize> target_size;  // resize on load when set
};

// Load `<root>/images/*.png` (+ `<root>/labels/*.png` for paired kinds),
// matched by filename stem, lexicographic order. Every label is decoded and
// validated against the palette up front.
DatasetHandle load_dataset(const std::filesystem::path& root, DatasetKind kind, const ClassPalette& palette,
                           const LoadOptions& options = {});

// Write a dataset in the on-disk layout. Labels are written when samples carry them.
void write_dataset(const DatasetHandle& handle, const std::filesystem::path& root, bool with_labels = true);

// Split off the last `test_count` samples (deterministic order) as the test split.
std::pair<DatasetHandle, DatasetHandle> split_synthetic(const DatasetHandle& handle, std::int64_t test_count);

// Bilinear (antialiased) image resampling, nearest-neighbour label resampling.
std::pair<torch::Tensor, torch::Tensor> resize_sample(const torch::Tensor& image, const torch::Tensor& ids,
                                                      ImageSize target);
torch::Tensor resize_image(const torch::Tensor& image, ImageSize target);
torch::Tensor resize_labels(const torch::Tensor& ids, ImageSize target);

}  // namespace s2r
