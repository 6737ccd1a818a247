#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "s2r/backbone.hpp"
#include "s2r/dataset.hpp"
#include "s2r/discriminators.hpp"
#include "s2r/generator.hpp"
#include "s2r/losses.hpp"
#include "s2r/palette.hpp"
#include "s2r/run_config.hpp"

namespace s2r {

// Datasets resolved from a DataConfig.
struct ResolvedData {
    ClassPalette palette;
    DatasetHandle synthetic_train;
    DatasetHandle synthetic_test;
    DatasetHandle real;
    std::optional<DatasetHandle> real_reference;  // labeled real images, when available
};

// Loads or generates the datasets named by the config. Dataset errors surface here.
ResolvedData resolve_data(const DataConfig& config);
ClassPalette palette_for(const DataConfig& config);

// Subsystem streams for derive_seed.
enum SeedStream : std::uint64_t { kSeedInit = 1, kSeedData = 2, kSeedNoise = 3, kSeedEval = 4 };

// One training batch: synthetic layouts and guide images, unpaired real images, noise.
struct TrainBatch {
    torch::Tensor ids;     // B×H×W
    torch::Tensor x_syn;   // B×3×H×W
    torch::Tensor x_real;  // B×3×H×W
    torch::Tensor noise;   // B×noise_dim×H×W
};

// Owns the networks and optimizers; performs alternating D/G updates.
//
// Every random choice of step s (batch indices, noise) is a pure function of
// (train.seed, s), so a run restored from a checkpoint continues exactly as
// the uninterrupted run would.
class Trainer {
public:
    Trainer(RunConfig config, DatasetHandle synthetic_train, DatasetHandle real);

    // Batch for step `step` (deterministic).
    TrainBatch make_batch(std::int64_t step) const;
    // One D update (R1 on schedule) followed by one G update on the given batch.
    LossBundle train_step(const TrainBatch& batch);
    // make_batch(current_step()) + train_step, then advances the step counter.
    LossBundle step();

    // Generated images for a batch, through the configured generation route.
    torch::Tensor generate(const torch::Tensor& onehot, const torch::Tensor& noise);

    std::int64_t current_step() const { return step_; }
    const RunConfig& config() const { return config_; }
    Generator& generator() { return generator_; }
    // Weights used for evaluation: the EMA copy when enabled, else the live generator.
    Generator& eval_generator() { return config_.train.ema ? ema_generator_ : generator_; }
    FeatureBackbone& backbone() { return backbone_; }
    WholeImageDiscriminator& whole_discriminator() { return disc_whole_; }
    DiscriminatorEnsemble& ensemble() { return disc_ensemble_; }

    void save_checkpoint(const std::filesystem::path& path) const;
    void load_checkpoint(const std::filesystem::path& path);

private:
    torch::Tensor whole_logits(const torch::Tensor& images);
    void set_discriminators_trainable(bool on);
    void update_ema();

    RunConfig config_;
    DatasetHandle synthetic_;
    DatasetHandle real_;
    Generator generator_{nullptr};
    Generator ema_generator_{nullptr};
    FeatureBackbone backbone_{nullptr};
    WholeImageDiscriminator disc_whole_{nullptr};
    DiscriminatorEnsemble disc_ensemble_{nullptr};
    std::unique_ptr<torch::optim::Adam> opt_g_;
    std::unique_ptr<torch::optim::Adam> opt_d_;
    std::int64_t step_ = 0;
};

// Generator restored from a checkpoint together with the config it was trained with.
struct LoadedGenerator {
    RunConfig config;
    Generator generator{nullptr};
    std::int64_t step = 0;
};
LoadedGenerator load_generator(const std::filesystem::path& checkpoint);
// Config snapshot stored in a checkpoint.
RunConfig read_checkpoint_config(const std::filesystem::path& checkpoint);

// One JSON-lines record of the training log.
std::string log_record(std::int64_t step, const LossBundle& losses, double wall_seconds);

struct TrainOptions {
    std::optional<std::filesystem::path> resume_from;
    // Called every train.eval_interval steps (and never when the interval is 0).
    std::function<void(std::int64_t step, Trainer& trainer)> eval_hook;
    // Called after every step.
    std::function<void(std::int64_t step, const LossBundle& losses)> on_step;
    bool quiet = true;
};

struct TrainResult {
    std::filesystem::path final_checkpoint;
    std::filesystem::path log_path;
    std::vector<LossBundle> losses;  // steps run in this call
};

// Full run: resolved config echoed to <run_dir>/config.json, JSON-lines log at
// <run_dir>/train_log.jsonl, checkpoints at <run_dir>/checkpoints/step_<n>.pt
// and <run_dir>/checkpoints/final.pt.
TrainResult train(const RunConfig& config, const std::filesystem::path& run_dir, const TrainOptions& options = {});

}  // namespace s2r
