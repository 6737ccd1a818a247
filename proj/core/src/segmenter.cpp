#include "s2r/segmenter.hpp"

#include <torch/script.h>

#include "s2r/errors.hpp"

namespace F = torch::nn::functional;

namespace s2r {

ColorOracleSegmenter::ColorOracleSegmenter(const ClassPalette& palette, int blur) : blur_(blur) {
    require_arg(blur >= 1 && blur % 2 == 1, "color oracle: blur must be a positive odd size");
    colors_ = torch::empty({palette.num_classes(), 3}, torch::kFloat32);
    for (int c = 0; c < palette.num_classes(); ++c)
        for (int k = 0; k < 3; ++k) colors_[c][k] = palette.color(c)[static_cast<std::size_t>(k)] / 127.5f - 1.0f;
}

torch::Tensor ColorOracleSegmenter::predict(const torch::Tensor& images) {
    require_shape(images.dim() == 4 && images.size(1) == 3, "segmenter: expected B×3×H×W");
    torch::NoGradGuard guard;
    auto x = images.to(torch::kFloat32);
    if (blur_ > 1)
        x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(blur_).stride(1).padding(blur_ / 2).count_include_pad(false));
    // Squared distance of every pixel to every palette color: B×C×H×W.
    const auto dist = (x.unsqueeze(1) - colors_.view({1, -1, 3, 1, 1})).pow(2).sum(2);
    return dist.argmin(1);
}

struct TorchScriptSegmenter::Impl {
    torch::jit::script::Module module;
};

TorchScriptSegmenter::TorchScriptSegmenter(const std::string& path, int num_classes)
    : impl_(std::make_unique<Impl>()), num_classes_(num_classes) {
    try {
        impl_->module = torch::jit::load(path);
    } catch (const c10::Error& e) {
        throw Error("cannot load segmenter " + path + ": " + e.what_without_backtrace());
    }
    impl_->module.eval();
}

TorchScriptSegmenter::~TorchScriptSegmenter() = default;

torch::Tensor TorchScriptSegmenter::predict(const torch::Tensor& images) {
    torch::NoGradGuard guard;
    auto logits = impl_->module.forward({images.to(torch::kFloat32)}).toTensor();
    require_shape(logits.dim() == 4 && logits.size(1) == num_classes_,
                  "segmenter output must be B×C×h×w with C = num_classes");
    if (logits.size(2) != images.size(2) || logits.size(3) != images.size(3))
        logits = F::interpolate(logits, F::InterpolateFuncOptions()
                                            .size(std::vector<std::int64_t>{images.size(2), images.size(3)})
                                            .mode(torch::kBilinear)
                                            .align_corners(false));
    return logits.argmax(1);
}

std::unique_ptr<Segmenter> make_segmenter(const std::string& kind, const std::string& path,
                                          const ClassPalette& palette) {
    if (kind == "none") return nullptr;
    if (kind == "toy_oracle") return std::make_unique<ColorOracleSegmenter>(palette);
    if (kind == "torchscript") {
        if (path.empty()) return nullptr;
        return std::make_unique<TorchScriptSegmenter>(path, palette.num_classes());
    }
    throw ConfigError("unknown segmenter kind '" + kind + "'");
}

}  // namespace s2r
