#pragma once

#include <memory>
#include <string>

#include <torch/torch.h>

#include "s2r/palette.hpp"

namespace s2r {

// Image -> predicted class-id map, for mIoU.
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual std::string kind() const = 0;
    virtual int num_classes() const = 0;
    // images: B×3×H×W in [-1,1]; returns B×H×W int64 ids in [0, num_classes).
    virtual torch::Tensor predict(const torch::Tensor& images) = 0;
};

// Nearest palette color after a box blur that suppresses texture noise.
// Only meaningful for domains whose class appearance is its palette color.
class ColorOracleSegmenter final : public Segmenter {
public:
    explicit ColorOracleSegmenter(const ClassPalette& palette, int blur = 5);
    std::string kind() const override { return "toy_oracle"; }
    int num_classes() const override { return static_cast<int>(colors_.size(0)); }
    torch::Tensor predict(const torch::Tensor& images) override;

private:
    torch::Tensor colors_;  // C×3 in [-1,1]
    int blur_;
};

// TorchScript segmentation network returning B×C×h×w logits for images in [-1,1];
// logits are bilinearly resized to the input size before the argmax.
class TorchScriptSegmenter final : public Segmenter {
public:
    TorchScriptSegmenter(const std::string& path, int num_classes);
    ~TorchScriptSegmenter() override;
    std::string kind() const override { return "torchscript"; }
    int num_classes() const override { return num_classes_; }
    torch::Tensor predict(const torch::Tensor& images) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int num_classes_;
};

// kind: "toy_oracle" | "torchscript" | "none" (returns nullptr).
std::unique_ptr<Segmenter> make_segmenter(const std::string& kind, const std::string& path,
                                          const ClassPalette& palette);

}  // namespace s2r
