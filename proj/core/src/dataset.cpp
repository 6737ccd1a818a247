#include "s2r/dataset.hpp"

#include <algorithm>
#include <map>

#include "s2r/errors.hpp"
#include "s2r/image_io.hpp"
#include "s2r/layout.hpp"

namespace fs = std::filesystem;
namespace F = torch::nn::functional;

namespace s2r {

const char* to_string(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::PairedSynthetic: return "paired_synthetic";
        case DatasetKind::UnpairedReal: return "unpaired_real";
    }
    return "unknown";
}

namespace {

class MemorySource final : public SampleSource {
public:
    explicit MemorySource(std::vector<Sample> samples) : samples_(std::move(samples)) {
        labeled_ = !samples_.empty() && std::all_of(samples_.begin(), samples_.end(),
                                                    [](const Sample& s) { return s.ids.has_value(); });
    }
    std::int64_t size() const override { return static_cast<std::int64_t>(samples_.size()); }
    const std::string& name(std::int64_t i) const override { return samples_.at(static_cast<std::size_t>(i)).name; }
    bool has_labels() const override { return labeled_; }
    Sample load(std::int64_t i) const override {
        const auto& s = samples_.at(static_cast<std::size_t>(i));
        return Sample{s.name, s.image, s.ids};
    }

private:
    std::vector<Sample> samples_;
    bool labeled_ = false;
};

class DirectorySource final : public SampleSource {
public:
    struct Entry {
        std::string stem;
        fs::path image;
        std::optional<fs::path> label;
    };

    DirectorySource(std::vector<Entry> entries, std::optional<ImageSize> target, bool labeled)
        : entries_(std::move(entries)), target_(target), labeled_(labeled) {}

    std::int64_t size() const override { return static_cast<std::int64_t>(entries_.size()); }
    const std::string& name(std::int64_t i) const override { return entries_.at(static_cast<std::size_t>(i)).stem; }
    bool has_labels() const override { return labeled_; }

    Sample load(std::int64_t i) const override {
        const auto& e = entries_.at(static_cast<std::size_t>(i));
        Sample s{e.stem, read_rgb_png(e.image), std::nullopt};
        if (labeled_ && e.label) {
            auto ids = read_label_png(*e.label);
            if (ids.sizes() != s.image.sizes().slice(1))
                throw ShapeError("label and image sizes differ for " + e.stem);
            s.ids = ids;
        }
        if (target_) {
            if (s.ids) {
                auto [img, ids] = resize_sample(s.image, *s.ids, *target_);
                s.image = img;
                s.ids = ids;
            } else {
                s.image = resize_image(s.image, *target_);
            }
        }
        return s;
    }

private:
    std::vector<Entry> entries_;
    std::optional<ImageSize> target_;
    bool labeled_;
};

std::map<std::string, fs::path> png_files_by_stem(const fs::path& dir) {
    std::map<std::string, fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
        out.emplace(entry.path().stem().string(), entry.path());
    }
    return out;
}

}  // namespace

std::shared_ptr<const SampleSource> make_memory_source(std::vector<Sample> samples) {
    return std::make_shared<MemorySource>(std::move(samples));
}

DatasetHandle::DatasetHandle(DatasetKind kind, std::shared_ptr<const SampleSource> source)
    : kind_(kind), source_(std::move(source)) {
    if (!source_) throw ArgumentError("dataset: null source");
    if (kind_ == DatasetKind::PairedSynthetic && source_->size() > 0 && !source_->has_labels())
        throw PairingError("paired dataset requires labels for every sample");
    indices_.resize(static_cast<std::size_t>(source_->size()));
    for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = static_cast<std::int64_t>(i);
}

DatasetHandle::DatasetHandle(DatasetKind kind, std::shared_ptr<const SampleSource> source,
                             std::vector<std::int64_t> indices)
    : kind_(kind), source_(std::move(source)), indices_(std::move(indices)) {}

const std::string& DatasetHandle::name(std::int64_t index) const {
    require_arg(index >= 0 && index < size(), "dataset index out of range");
    return source_->name(indices_[static_cast<std::size_t>(index)]);
}

Sample DatasetHandle::sample(std::int64_t index) const {
    require_arg(index >= 0 && index < size(), "dataset index out of range");
    auto s = source_->load(indices_[static_cast<std::size_t>(index)]);
    if (kind_ == DatasetKind::UnpairedReal) s.ids.reset();
    return s;
}

DatasetHandle DatasetHandle::as_kind(DatasetKind kind) const {
    if (kind == DatasetKind::PairedSynthetic && size() > 0 && !source_->has_labels())
        throw PairingError("dataset has no labels; cannot view it as paired");
    return DatasetHandle(kind, source_, indices_);
}

DatasetHandle DatasetHandle::subset(std::int64_t begin, std::int64_t end) const {
    require_arg(0 <= begin && begin <= end && end <= size(), "dataset subset range invalid");
    return DatasetHandle(kind_, source_, {indices_.begin() + begin, indices_.begin() + end});
}

std::pair<torch::Tensor, std::optional<torch::Tensor>> DatasetHandle::batch(
    const std::vector<std::int64_t>& indices) const {
    require_arg(!indices.empty(), "batch: empty index list");
    std::vector<torch::Tensor> images, ids;
    for (auto i : indices) {
        auto s = sample(i);
        images.push_back(s.image);
        if (s.ids) ids.push_back(*s.ids);
    }
    std::optional<torch::Tensor> id_batch;
    if (kind_ == DatasetKind::PairedSynthetic) id_batch = torch::stack(ids);
    return {torch::stack(images), id_batch};
}

DatasetHandle load_dataset(const fs::path& root, DatasetKind kind, const ClassPalette& palette,
                           const LoadOptions& options) {
    if (!fs::is_directory(root / "images"))
        throw Error("dataset root has no images/ directory: " + root.string());
    const auto images = png_files_by_stem(root / "images");
    const bool paired = kind == DatasetKind::PairedSynthetic;
    const auto labels = paired ? png_files_by_stem(root / "labels") : std::map<std::string, fs::path>{};

    std::vector<DirectorySource::Entry> entries;
    entries.reserve(images.size());
    for (const auto& [stem, path] : images) {
        DirectorySource::Entry e{stem, path, std::nullopt};
        if (paired) {
            auto it = labels.find(stem);
            if (it == labels.end()) throw PairingError("no label for synthetic image '" + stem + "'");
            const auto ids = read_label_png(it->second);
            const auto bad = (ids < 0).logical_or(ids >= palette.num_classes());
            if (bad.any().item<bool>()) {
                const auto v = ids.flatten()[bad.flatten().nonzero()[0].item<std::int64_t>()].item<std::int64_t>();
                throw PaletteError("label '" + stem + "' contains class id " + std::to_string(v) +
                                   " unknown to a " + std::to_string(palette.num_classes()) + "-class palette");
            }
            e.label = it->second;
        }
        entries.push_back(std::move(e));
    }
    if (options.target_size) {
        require_arg(options.target_size->height > 0 && options.target_size->width > 0 &&
                        options.target_size->height % 16 == 0 && options.target_size->width % 16 == 0,
                    "load_dataset: target size must be positive and divisible by 16");
    }
    auto source = std::make_shared<DirectorySource>(std::move(entries), options.target_size, paired);
    return DatasetHandle(kind, std::move(source));
}

void write_dataset(const DatasetHandle& handle, const fs::path& root, bool with_labels) {
    fs::create_directories(root / "images");
    if (with_labels) fs::create_directories(root / "labels");
    for (std::int64_t i = 0; i < handle.size(); ++i) {
        const auto s = handle.sample(i);
        write_rgb_png(root / "images" / (s.name + ".png"), s.image);
        if (with_labels && s.ids) write_label_png(root / "labels" / (s.name + ".png"), *s.ids);
    }
}

std::pair<DatasetHandle, DatasetHandle> split_synthetic(const DatasetHandle& handle, std::int64_t test_count) {
    if (test_count < 0 || test_count >= handle.size())
        throw ArgumentError("split_synthetic: test_count " + std::to_string(test_count) +
                            " must be in [0, " + std::to_string(handle.size()) + ")");
    const auto cut = handle.size() - test_count;
    return {handle.subset(0, cut), handle.subset(cut, handle.size())};
}

torch::Tensor resize_image(const torch::Tensor& image, ImageSize target) {
    require_shape(image.dim() == 3, "resize_image: expected C×H×W");
    if (target.height <= 0 || target.width <= 0) throw ArgumentError("resize_image: target size must be positive");
    if (image.size(1) == target.height && image.size(2) == target.width) return image;
    auto out = F::interpolate(image.unsqueeze(0), F::InterpolateFuncOptions()
                                                      .size(std::vector<std::int64_t>{target.height, target.width})
                                                      .mode(torch::kBilinear)
                                                      .align_corners(false)
                                                      .antialias(true));
    return out.squeeze(0).clamp(-1.0, 1.0);
}

torch::Tensor resize_labels(const torch::Tensor& ids, ImageSize target) {
    require_shape(ids.dim() == 2, "resize_labels: expected H×W");
    if (target.height <= 0 || target.width <= 0) throw ArgumentError("resize_labels: target size must be positive");
    if (ids.size(0) == target.height && ids.size(1) == target.width) return ids;
    auto out = F::interpolate(ids.to(torch::kFloat64).unsqueeze(0).unsqueeze(0),
                              F::InterpolateFuncOptions()
                                  .size(std::vector<std::int64_t>{target.height, target.width})
                                  .mode(torch::kNearest));
    return out.squeeze(0).squeeze(0).round().to(ids.scalar_type());
}

std::pair<torch::Tensor, torch::Tensor> resize_sample(const torch::Tensor& image, const torch::Tensor& ids,
                                                      ImageSize target) {
    if (target.height <= 0 || target.width <= 0 || target.height % 16 != 0 || target.width % 16 != 0)
        throw ArgumentError("resize_sample: target " + std::to_string(target.height) + "x" +
                            std::to_string(target.width) + " must be positive and divisible by 16");
    return {resize_image(image, target), resize_labels(ids, target)};
}

}  // namespace s2r
