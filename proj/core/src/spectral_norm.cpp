#include "s2r/spectral_norm.hpp"

#include <cmath>

#include "s2r/errors.hpp"
#include "s2r/module_utils.hpp"

namespace F = torch::nn::functional;

namespace s2r {

namespace {

torch::Tensor unit(const torch::Tensor& x) {
    return x / (x.norm() + 1e-12);
}

}  // namespace

PowerIterationResult top_singular_value(const torch::Tensor& w, int max_iters, double tol, std::uint64_t seed) {
    require_shape(w.dim() == 2, "top_singular_value: expected a matrix");
    torch::NoGradGuard guard;
    const auto m = w.to(torch::kFloat64);
    if (m.abs().max().item<double>() == 0.0) throw ArgumentError("spectral normalization of an all-zero matrix");
    auto gen = make_generator(seed);
    auto v = unit(at::normal(0.0, 1.0, {m.size(1)}, gen).to(torch::kFloat64));
    torch::Tensor u;
    double sigma = 0.0;
    int it = 0;
    for (; it < max_iters; ++it) {
        u = unit(torch::mv(m, v));
        v = unit(torch::mv(m.t(), u));
        const double next = torch::dot(u, torch::mv(m, v)).item<double>();
        const bool done = it > 0 && std::abs(next - sigma) <= tol * std::abs(next);
        sigma = next;
        if (done) break;
    }
    return {sigma, u, v, it + 1};
}

torch::Tensor spectral_normalize(const torch::Tensor& w, int max_iters, double tol) {
    const auto r = top_singular_value(w, max_iters, tol);
    return w / r.sigma;
}

SNConv2dImpl::SNConv2dImpl(torch::nn::Conv2dOptions options, int power_iterations)
    : options_(options), power_iterations_(power_iterations) {
    require_arg(power_iterations >= 1, "SNConv2d: power_iterations must be >= 1");
    // Reuse the stock conv initializer for weight and bias.
    torch::nn::Conv2d proto(options_);
    weight_orig = register_parameter("weight_orig", proto->weight.detach().clone());
    if (options_.bias()) bias = register_parameter("bias", proto->bias.detach().clone());
    const auto rows = weight_orig.size(0);
    const auto cols = weight_orig.numel() / rows;
    u = register_buffer("u", unit(torch::randn({rows})));
    v = register_buffer("v", unit(torch::randn({cols})));
}

void SNConv2dImpl::power_iterate(int n) {
    torch::NoGradGuard guard;
    const auto w = weight_orig.reshape({weight_orig.size(0), -1});
    for (int i = 0; i < n; ++i) {
        v.copy_(unit(torch::mv(w.t(), u)));
        u.copy_(unit(torch::mv(w, v)));
    }
}

torch::Tensor SNConv2dImpl::normalized_weight() const {
    const auto w = weight_orig.reshape({weight_orig.size(0), -1});
    const auto sigma = torch::dot(u, torch::mv(w, v));
    return weight_orig / sigma;
}

torch::Tensor SNConv2dImpl::forward(const torch::Tensor& x) {
    if (is_training()) power_iterate(power_iterations_);
    const auto& pad = options_.padding();
    const auto* explicit_pad = std::get_if<torch::ExpandingArray<2>>(&pad);
    require_arg(explicit_pad != nullptr, "SNConv2d: only explicit padding is supported");
    return F::conv2d(x, normalized_weight(),
                     F::Conv2dFuncOptions().bias(bias).stride(options_.stride()).padding(*explicit_pad));
}

}  // namespace s2r
