#include "s2r/generator.hpp"

#include <algorithm>

#include "s2r/errors.hpp"
#include "s2r/module_utils.hpp"
#include "s2r/patch_ops.hpp"

namespace F = torch::nn::functional;

namespace s2r {

namespace {

torch::nn::Conv2d conv3x3(std::int64_t in, std::int64_t out, bool bias = true) {
    return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).padding(1).bias(bias));
}

torch::Tensor resize_nearest(const torch::Tensor& x, torch::IntArrayRef hw) {
    if (x.size(2) == hw[0] && x.size(3) == hw[1]) return x;
    return F::interpolate(x, F::InterpolateFuncOptions()
                                 .size(std::vector<std::int64_t>{hw[0], hw[1]})
                                 .mode(torch::kNearest));
}

}  // namespace

ImageSize GeneratorConfig::initial_grid() const {
    const auto f = std::int64_t{1} << num_upsampling_stages;
    return {output_size.height / f, output_size.width / f};
}

void GeneratorConfig::validate() const {
    if (num_classes < 2) throw ConfigError("generator.num_classes must be >= 2");
    if (base_width <= 0) throw ConfigError("generator.base_width must be positive");
    if (noise_dim <= 0) throw ConfigError("generator.noise_dim must be positive");
    if (num_upsampling_stages < 0 || num_upsampling_stages > 8)
        throw ConfigError("generator.num_upsampling_stages must be in [0, 8]");
    const auto f = std::int64_t{1} << num_upsampling_stages;
    if (output_size.height <= 0 || output_size.width <= 0 || output_size.height % f != 0 ||
        output_size.width % f != 0)
        throw ConfigError("generator.output_size must be a positive multiple of 2^num_upsampling_stages");
}

GeneratorConfig GeneratorConfig::toy(int num_classes) {
    return GeneratorConfig{num_classes, 32, 4, 16, {64, 128}};
}

GeneratorConfig GeneratorConfig::benchmark(int num_classes) {
    return GeneratorConfig{num_classes, 64, 6, 64, {256, 512}};
}

SpatialAdaptiveNormImpl::SpatialAdaptiveNormImpl(std::int64_t channels, std::int64_t cond_channels,
                                                 std::int64_t hidden) {
    norm_ = register_module("norm", torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(channels).affine(false)));
    shared_ = register_module("shared", conv3x3(cond_channels, hidden));
    gamma_ = register_module("gamma", conv3x3(hidden, channels));
    beta_ = register_module("beta", conv3x3(hidden, channels));
}

torch::Tensor SpatialAdaptiveNormImpl::forward(const torch::Tensor& x, const torch::Tensor& cond) {
    const auto normalized = norm_->forward(x);
    const auto c = resize_nearest(cond, {x.size(2), x.size(3)});
    const auto actv = torch::relu(shared_->forward(c));
    return normalized * (1 + gamma_->forward(actv)) + beta_->forward(actv);
}

SpatialAdaptiveResBlockImpl::SpatialAdaptiveResBlockImpl(std::int64_t in_ch, std::int64_t out_ch,
                                                         std::int64_t cond_channels)
    : learned_shortcut_(in_ch != out_ch) {
    const auto mid = std::min(in_ch, out_ch);
    norm0_ = register_module("norm0", SpatialAdaptiveNorm(in_ch, cond_channels, std::min<std::int64_t>(in_ch, 128)));
    conv0_ = register_module("conv0", conv3x3(in_ch, mid));
    norm1_ = register_module("norm1", SpatialAdaptiveNorm(mid, cond_channels, std::min<std::int64_t>(mid, 128)));
    conv1_ = register_module("conv1", conv3x3(mid, out_ch));
    if (learned_shortcut_) {
        norm_s_ = register_module("norm_s", SpatialAdaptiveNorm(in_ch, cond_channels, std::min<std::int64_t>(in_ch, 128)));
        conv_s_ = register_module("conv_s", torch::nn::Conv2d(torch::nn::Conv2dOptions(in_ch, out_ch, 1).bias(false)));
    }
}

torch::Tensor SpatialAdaptiveResBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& cond) {
    const auto shortcut = learned_shortcut_ ? conv_s_->forward(norm_s_->forward(x, cond)) : x;
    auto dx = conv0_->forward(torch::leaky_relu(norm0_->forward(x, cond), 0.2));
    dx = conv1_->forward(torch::leaky_relu(norm1_->forward(dx, cond), 0.2));
    return shortcut + dx;
}

GeneratorImpl::GeneratorImpl(GeneratorConfig config) : config_(config) {
    config_.validate();
    const auto cond = static_cast<std::int64_t>(config_.num_classes + config_.noise_dim);
    const auto ch = stage_channels();
    head_ = register_module("head", conv3x3(cond, ch.front()));
    blocks_ = register_module("blocks", torch::nn::ModuleList());
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) blocks_->push_back(SpatialAdaptiveResBlock(ch[i], ch[i + 1], cond));
    // Final block at full resolution keeps the width.
    blocks_->push_back(SpatialAdaptiveResBlock(ch.back(), ch.back(), cond));
    out_ = register_module("out", conv3x3(ch.back(), 3));
}

std::vector<std::int64_t> GeneratorImpl::stage_channels() const {
    // Width at stage i (i = 0 is the coarsest grid): base · min(8, 2^(stages - i)).
    std::vector<std::int64_t> ch;
    const int s = config_.num_upsampling_stages;
    for (int i = 0; i <= s; ++i)
        ch.push_back(static_cast<std::int64_t>(config_.base_width) * std::min(8, 1 << (s - i)));
    return ch;
}

torch::Tensor GeneratorImpl::forward(const torch::Tensor& layout, const torch::Tensor& noise) {
    require_shape(layout.dim() == 4 && noise.dim() == 4, "generator: expected 4-D layout and noise");
    if (layout.size(1) != config_.num_classes)
        throw ConfigError("generator: layout has " + std::to_string(layout.size(1)) + " classes, config expects " +
                          std::to_string(config_.num_classes));
    require_shape(noise.size(1) == config_.noise_dim, "generator: noise channels do not match noise_dim");
    require_shape(noise.size(0) == layout.size(0) && noise.size(2) == layout.size(2) &&
                      noise.size(3) == layout.size(3),
                  "generator: noise and layout shapes differ");
    const auto f = std::int64_t{1} << config_.num_upsampling_stages;
    const auto h = layout.size(2), w = layout.size(3);
    if (h % f != 0 || w % f != 0)
        throw ArgumentError("generator: input " + std::to_string(h) + "x" + std::to_string(w) +
                            " is not a multiple of 2^stages");

    const auto cond = torch::cat({layout, noise}, 1);
    auto x = head_->forward(resize_nearest(cond, {h / f, w / f}));
    const auto n = blocks_->size();
    for (std::size_t i = 0; i < n; ++i) {
        x = blocks_[i]->as<SpatialAdaptiveResBlockImpl>()->forward(x, cond);
        if (i + 1 < n)
            x = F::interpolate(x, F::InterpolateFuncOptions()
                                      .scale_factor(std::vector<double>{2.0, 2.0})
                                      .mode(torch::kNearest));
    }
    return torch::tanh(out_->forward(torch::leaky_relu(x, 0.2)));
}

torch::Tensor generate(Generator& g, const torch::Tensor& layout, const torch::Tensor& noise) {
    return g->forward(layout, noise);
}

torch::Tensor generate_patchwise(Generator& g, const torch::Tensor& layout, const torch::Tensor& noise, int grid_k) {
    if (grid_k == 1) return generate(g, layout, noise);
    const auto m = patchify(layout, grid_k);
    const auto z = patchify(noise, grid_k);
    auto out = g->forward(m.data, z.data);
    PatchStack ps{out, grid_k, {layout.size(0), 3, layout.size(2), layout.size(3)}};
    return unpatchify(ps);
}

torch::Tensor sample_noise(std::int64_t batch, int noise_dim, ImageSize size, std::uint64_t seed, torch::Dtype dtype) {
    auto gen = make_generator(seed);
    return at::normal(0.0, 1.0, {batch, noise_dim, size.height, size.width}, gen).to(dtype);
}

}  // namespace s2r
