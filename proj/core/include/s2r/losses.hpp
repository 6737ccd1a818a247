#pragma once

#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "s2r/backbone.hpp"

namespace s2r {

// Non-saturating logistic objectives over raw logits; σ is the logistic
// function and every log-probability uses the softplus form.

// -E[log σ(real)] - E[log(1 - σ(fake))]; expectations are means over batch and space.
torch::Tensor disc_loss_ensemble(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);

// Same objective for one logit per image.
torch::Tensor disc_loss_whole(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);

// -E[log σ(D_u(x̂))] - Σ_l E[log σ(D_l(φ_l(x̂)))].
torch::Tensor gen_adv_loss(const torch::Tensor& whole_fake_logits, const std::vector<torch::Tensor>& ensemble_fake_logits);

// Channel-unit-normalized squared feature distance, summed over channels,
// averaged over batch and space, summed over layers.
torch::Tensor perceptual_distance(const FeaturePyramid& a, const FeaturePyramid& b);

// Patch-level perceptual alignment between the synthetic guide image and the
// generated image: perceptual_distance(phi(x_syn, k), phi(x_gen, k)).
// x_syn is treated as a constant.
torch::Tensor lpips_patch_align(const FeatureBackbone& backbone, const torch::Tensor& x_syn,
                                const torch::Tensor& x_gen, int grid_k);

// Named scalar losses of one training step.
struct LossBundle {
    double adv_d_u = 0.0;
    std::map<std::string, double> adv_d_ensemble;
    double adv_g = 0.0;
    double align_lpips = 0.0;
    double r1 = 0.0;
    double lambda_adv = 1.0;
    double lambda_lpips = 10.0;

    double total_g() const { return lambda_adv * adv_g + lambda_lpips * align_lpips; }
    double total_d() const;
    bool all_finite() const;
};

}  // namespace s2r
