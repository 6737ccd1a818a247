#include "s2r/losses.hpp"

#include <cmath>

#include "s2r/errors.hpp"
#include "s2r/module_utils.hpp"

namespace s2r {

namespace {

// -log σ(x)
torch::Tensor neg_log_sigmoid(const torch::Tensor& x) { return torch::softplus(-x); }
// -log(1 - σ(x))
torch::Tensor neg_log_one_minus_sigmoid(const torch::Tensor& x) { return torch::softplus(x); }

// eps inside the root keeps the gradient finite at all-zero feature columns.
torch::Tensor unit_channels(const torch::Tensor& f) {
    return f * torch::rsqrt(f.pow(2).sum(1, /*keepdim=*/true) + 1e-20);
}

}  // namespace

torch::Tensor disc_loss_ensemble(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
    require_finite(real_logits, "real logits");
    require_finite(fake_logits, "fake logits");
    return neg_log_sigmoid(real_logits).mean() + neg_log_one_minus_sigmoid(fake_logits).mean();
}

torch::Tensor disc_loss_whole(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
    return disc_loss_ensemble(real_logits, fake_logits);
}

torch::Tensor gen_adv_loss(const torch::Tensor& whole_fake_logits,
                           const std::vector<torch::Tensor>& ensemble_fake_logits) {
    require_finite(whole_fake_logits, "whole-image fake logits");
    auto loss = neg_log_sigmoid(whole_fake_logits).mean();
    for (const auto& l : ensemble_fake_logits) {
        require_finite(l, "ensemble fake logits");
        loss = loss + neg_log_sigmoid(l).mean();
    }
    return loss;
}

torch::Tensor perceptual_distance(const FeaturePyramid& a, const FeaturePyramid& b) {
    require_shape(a.size() == b.size() && a.size() > 0, "perceptual distance: pyramids differ in depth");
    torch::Tensor total;
    for (std::size_t l = 0; l < a.size(); ++l) {
        require_shape(a[l].sizes() == b[l].sizes(), "perceptual distance: layer shapes differ");
        const auto d = (unit_channels(a[l]) - unit_channels(b[l])).pow(2).sum(1).mean();
        total = total.defined() ? total + d : d;
    }
    return total;
}

torch::Tensor lpips_patch_align(const FeatureBackbone& backbone, const torch::Tensor& x_syn,
                                const torch::Tensor& x_gen, int grid_k) {
    require_shape(x_syn.sizes() == x_gen.sizes(), "lpips: synthetic and generated images differ in shape");
    FeaturePyramid guide;
    {
        torch::NoGradGuard guard;
        guide = backbone->phi(x_syn.detach(), grid_k);
    }
    return perceptual_distance(guide, backbone->phi(x_gen, grid_k));
}

double LossBundle::total_d() const {
    double t = adv_d_u + r1;
    for (const auto& [id, v] : adv_d_ensemble) t += v;
    return t;
}

bool LossBundle::all_finite() const {
    bool ok = std::isfinite(adv_d_u) && std::isfinite(adv_g) && std::isfinite(align_lpips) && std::isfinite(r1);
    for (const auto& [id, v] : adv_d_ensemble) ok = ok && std::isfinite(v);
    return ok;
}

}  // namespace s2r
