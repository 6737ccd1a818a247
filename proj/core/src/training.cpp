#include "s2r/training.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>

#include "json.hpp"
#include "s2r/errors.hpp"
#include "s2r/layout.hpp"
#include "s2r/module_utils.hpp"
#include "s2r/patch_ops.hpp"
#include "s2r/toy_domains.hpp"

namespace fs = std::filesystem;

namespace s2r {

ClassPalette palette_for(const DataConfig& config) {
    if (config.palette == "cityscapes34") return ClassPalette::cityscapes34();
    return ClassPalette::toy(config.num_classes);
}

ResolvedData resolve_data(const DataConfig& config) {
    if (config.source == "toy") {
        auto toy = make_toy_domains(config.toy_seed, config.toy_synthetic, config.toy_real, config.num_classes,
                                    config.size);
        auto [train, test] = split_synthetic(toy.synthetic, config.test_count);
        return ResolvedData{toy.palette, train, test, toy.real, toy.real_labeled};
    }
    const auto palette = palette_for(config);
    const LoadOptions opts{config.size};
    if (config.synthetic_root.empty() || config.real_root.empty())
        throw ConfigError("data.synthetic_root and data.real_root are required for directory datasets");
    auto synthetic = load_dataset(config.synthetic_root, DatasetKind::PairedSynthetic, palette, opts);
    auto real = load_dataset(config.real_root, DatasetKind::UnpairedReal, palette, opts);
    if (real.size() == 0) throw Error("real dataset is empty: " + config.real_root);
    auto [train, test] = split_synthetic(synthetic, config.test_count);
    std::optional<DatasetHandle> reference;
    if (!config.reference_root.empty())
        reference = load_dataset(config.reference_root, DatasetKind::PairedSynthetic, palette, opts);
    return ResolvedData{palette, train, test, real, reference};
}

Trainer::Trainer(RunConfig config, DatasetHandle synthetic_train, DatasetHandle real)
    : config_(std::move(config)), synthetic_(std::move(synthetic_train)), real_(std::move(real)) {
    config_.validate();
    if (synthetic_.kind() != DatasetKind::PairedSynthetic)
        throw ArgumentError("trainer: synthetic dataset must be paired");
    if (synthetic_.size() == 0 || real_.size() == 0) throw ArgumentError("trainer: datasets must be non-empty");

    const auto& tc = config_.train;
    torch::manual_seed(derive_seed(tc.seed, kSeedInit));
    generator_ = Generator(config_.generator);
    backbone_ = FeatureBackbone(config_.backbone);
    disc_whole_ = WholeImageDiscriminator(config_.discriminator);
    disc_ensemble_ = DiscriminatorEnsemble(config_.backbone.layer_ids, backbone_->layer_channels(),
                                           config_.discriminator);
    if (tc.ema) {
        ema_generator_ = Generator(config_.generator);
        torch::NoGradGuard guard;
        auto src = generator_->parameters();
        auto dst = ema_generator_->parameters();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i].copy_(src[i]);
        for (auto& p : dst) p.set_requires_grad(false);
        ema_generator_->eval();
    }

    const auto adam = torch::optim::AdamOptions(tc.lr).betas({tc.beta1, tc.beta2});
    opt_g_ = std::make_unique<torch::optim::Adam>(generator_->parameters(), adam);
    auto d_params = disc_whole_->parameters();
    for (auto& p : disc_ensemble_->parameters()) d_params.push_back(p);
    opt_d_ = std::make_unique<torch::optim::Adam>(d_params, adam);
}

TrainBatch Trainer::make_batch(std::int64_t step) const {
    const auto& tc = config_.train;
    std::mt19937_64 rng(derive_seed(tc.seed, kSeedData, static_cast<std::uint64_t>(step)));
    std::uniform_int_distribution<std::int64_t> pick_syn(0, synthetic_.size() - 1);
    std::uniform_int_distribution<std::int64_t> pick_real(0, real_.size() - 1);
    std::vector<std::int64_t> syn_idx, real_idx;
    for (int i = 0; i < tc.batch_size; ++i) syn_idx.push_back(pick_syn(rng));
    for (int i = 0; i < tc.batch_size; ++i) real_idx.push_back(pick_real(rng));
    auto [x_syn, ids] = synthetic_.batch(syn_idx);
    auto x_real = real_.batch(real_idx).first;
    const ImageSize hw{x_syn.size(2), x_syn.size(3)};
    auto noise = sample_noise(tc.batch_size, config_.generator.noise_dim, hw,
                              derive_seed(tc.seed, kSeedNoise, static_cast<std::uint64_t>(step)));
    return TrainBatch{*ids, x_syn, x_real, noise};
}

torch::Tensor Trainer::generate(const torch::Tensor& onehot, const torch::Tensor& noise) {
    const auto& tc = config_.train;
    if (tc.patchwise_generation) return generate_patchwise(generator_, onehot, noise, tc.grid_k_generation);
    return s2r::generate(generator_, onehot, noise);
}

torch::Tensor Trainer::whole_logits(const torch::Tensor& images) {
    return disc_whole_->forward(patchify(images, config_.train.grid_k_disc_u).data);
}

void Trainer::set_discriminators_trainable(bool on) {
    for (auto& p : disc_whole_->parameters()) p.set_requires_grad(on);
    for (auto& p : disc_ensemble_->parameters()) p.set_requires_grad(on);
}

void Trainer::update_ema() {
    torch::NoGradGuard guard;
    const double d = config_.train.ema_decay;
    auto src = generator_->parameters();
    auto dst = ema_generator_->parameters();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i].mul_(d).add_(src[i], 1.0 - d);
}

LossBundle Trainer::train_step(const TrainBatch& batch) {
    const auto& tc = config_.train;
    LossBundle out;
    out.lambda_adv = tc.lambda_adv;
    out.lambda_lpips = tc.lambda_lpips;
    const auto b = batch.x_real.size(0);

    const auto onehot = one_hot_encode(batch.ids, config_.generator.num_classes);
    auto fake = generate(onehot, batch.noise);
    require_finite(fake, "generated images");

    // Discriminator update on detached fakes.
    const auto& layer_ids = disc_ensemble_->layer_ids();
    set_discriminators_trainable(true);
    for (int d_iter = 0; d_iter < tc.d_steps_per_g; ++d_iter) {
        const auto fake_d = fake.detach();
        const auto u_logits = whole_logits(torch::cat({batch.x_real, fake_d}, 0));
        const auto u_split = b * tc.grid_k_disc_u * tc.grid_k_disc_u;
        auto loss_u = disc_loss_whole(u_logits.narrow(0, 0, u_split), u_logits.narrow(0, u_split, u_split));

        FeaturePyramid feats;
        {
            torch::NoGradGuard guard;
            feats = backbone_->phi(torch::cat({batch.x_real, fake_d}, 0), tc.grid_k_disc_ensemble);
        }
        const auto e_split = b * tc.grid_k_disc_ensemble * tc.grid_k_disc_ensemble;
        auto total = loss_u;
        for (std::size_t l = 0; l < feats.size(); ++l) {
            const auto logits = disc_ensemble_->forward_layer(feats.layer_ids[l], feats[l]);
            const auto loss_l = disc_loss_ensemble(logits.narrow(0, 0, e_split), logits.narrow(0, e_split, e_split));
            out.adv_d_ensemble[layer_ids[l]] = loss_l.item<double>();
            total = total + loss_l;
        }
        out.adv_d_u = loss_u.item<double>();

        out.r1 = 0.0;
        if (step_ % tc.r1_interval == 0 && tc.r1_gamma > 0.0) {
            // Lazy regularization: the penalty is applied every r1_interval steps, scaled by the interval.
            const auto r1 = r1_penalty([this](const torch::Tensor& x) { return whole_logits(x); }, batch.x_real,
                                       tc.r1_gamma) *
                            static_cast<double>(tc.r1_interval);
            out.r1 = r1.item<double>();
            total = total + r1;
        }
        opt_d_->zero_grad();
        total.backward();
        opt_d_->step();
    }

    // Generator update.
    set_discriminators_trainable(false);
    const auto feats_fake = backbone_->phi(fake, tc.grid_k_disc_ensemble);
    const auto adv_g = gen_adv_loss(whole_logits(fake), disc_ensemble_->forward(feats_fake));
    torch::Tensor align;
    if (tc.grid_k_align == tc.grid_k_disc_ensemble) {
        FeaturePyramid guide;
        {
            torch::NoGradGuard guard;
            guide = backbone_->phi(batch.x_syn, tc.grid_k_align);
        }
        align = perceptual_distance(guide, feats_fake);
    } else {
        align = lpips_patch_align(backbone_, batch.x_syn, fake, tc.grid_k_align);
    }
    const auto total_g = tc.lambda_adv * adv_g + tc.lambda_lpips * align;
    opt_g_->zero_grad();
    total_g.backward();
    opt_g_->step();
    set_discriminators_trainable(true);
    opt_d_->zero_grad();
    if (tc.ema) update_ema();

    out.adv_g = adv_g.item<double>();
    out.align_lpips = align.item<double>();
    if (!out.all_finite())
        throw NumericError("non-finite loss at step " + std::to_string(step_) + ": " + log_record(step_, out, 0.0));
    return out;
}

LossBundle Trainer::step() {
    auto losses = train_step(make_batch(step_));
    ++step_;
    return losses;
}

std::string log_record(std::int64_t step, const LossBundle& losses, double wall_seconds) {
    nlohmann::json j;
    j["step"] = step;
    j["adv_d_u"] = losses.adv_d_u;
    for (const auto& [id, v] : losses.adv_d_ensemble) j["adv_d_" + id] = v;
    j["adv_g"] = losses.adv_g;
    j["align_lpips"] = losses.align_lpips;
    j["r1"] = losses.r1;
    j["total_d"] = losses.total_d();
    j["total_g"] = losses.total_g();
    j["wall_time"] = wall_seconds;
    return j.dump();
}

TrainResult train(const RunConfig& config, const fs::path& run_dir, const TrainOptions& options) {
    config.validate();
    auto data = resolve_data(config.data);

    fs::create_directories(run_dir / "checkpoints");
    {
        std::ofstream cfg(run_dir / "config.json");
        cfg << config.to_json() << "\n";
    }
    Trainer trainer(config, data.synthetic_train, data.real);
    if (options.resume_from) trainer.load_checkpoint(*options.resume_from);

    TrainResult result;
    result.log_path = run_dir / "train_log.jsonl";
    std::ofstream log(result.log_path, options.resume_from ? std::ios::app : std::ios::trunc);
    const auto start = std::chrono::steady_clock::now();
    const auto& tc = config.train;
    while (trainer.current_step() < tc.max_steps) {
        const auto s = trainer.current_step();
        LossBundle losses;
        try {
            losses = trainer.step();
        } catch (const NumericError& e) {
            nlohmann::json diag{{"step", s}, {"error", e.what()}};
            log << diag.dump() << "\n";
            throw;
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log << log_record(s, losses, wall) << "\n";
        log.flush();
        result.losses.push_back(losses);
        if (options.on_step) options.on_step(s, losses);
        if (!options.quiet && (s % 50 == 0 || s + 1 == tc.max_steps))
            std::cerr << log_record(s, losses, wall) << "\n";
        const auto done = trainer.current_step();
        if (tc.checkpoint_interval > 0 && done % tc.checkpoint_interval == 0)
            trainer.save_checkpoint(run_dir / "checkpoints" / ("step_" + std::to_string(done) + ".pt"));
        if (tc.eval_interval > 0 && options.eval_hook && done % tc.eval_interval == 0)
            options.eval_hook(done, trainer);
    }
    result.final_checkpoint = run_dir / "checkpoints" / "final.pt";
    trainer.save_checkpoint(result.final_checkpoint);
    return result;
}

}  // namespace s2r
