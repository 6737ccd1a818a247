#pragma once

#include <cstdint>

#include <torch/torch.h>

namespace s2r {

struct PowerIterationResult {
    double sigma = 0.0;
    torch::Tensor u;  // left singular vector estimate (rows)
    torch::Tensor v;  // right singular vector estimate (cols)
    int iterations = 0;
};

// Top singular value of a 2-D matrix by power iteration, iterated until the
// estimate changes by less than `tol` (relative) or `max_iters` is reached.
PowerIterationResult top_singular_value(const torch::Tensor& w, int max_iters = 1000, double tol = 1e-12,
                                        std::uint64_t seed = 0);

// W / sigma_max(W). Throws ArgumentError for an all-zero matrix.
torch::Tensor spectral_normalize(const torch::Tensor& w, int max_iters = 1000, double tol = 1e-12);

// 2-D convolution whose kernel is divided by a running power-iteration
// estimate of its top singular value (kernel unrolled to out × in·kh·kw).
//
// In training mode each forward advances the persistent u/v estimate by
// `power_iterations` steps; in eval mode the stored estimate is used as is.
class SNConv2dImpl : public torch::nn::Module {
public:
    SNConv2dImpl(torch::nn::Conv2dOptions options, int power_iterations = 1);

    torch::Tensor forward(const torch::Tensor& x);

    // Kernel actually applied: weight_orig / sigma(u, v).
    torch::Tensor normalized_weight() const;
    // Advance the u/v estimate `n` steps without running the convolution.
    void power_iterate(int n);

    torch::Tensor weight_orig;
    torch::Tensor bias;
    torch::Tensor u;
    torch::Tensor v;

private:
    torch::nn::Conv2dOptions options_;
    int power_iterations_;
};
TORCH_MODULE(SNConv2d);

}  // namespace s2r
