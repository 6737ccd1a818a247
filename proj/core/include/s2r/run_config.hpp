#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "s2r/backbone.hpp"
#include "s2r/dataset.hpp"
#include "s2r/discriminators.hpp"
#include "s2r/generator.hpp"

namespace s2r {

enum class Profile { Toy, Benchmark };

struct DataConfig {
    // "directory": read the on-disk layout; "toy": generate toy domains in memory.
    std::string source = "toy";
    std::string synthetic_root;  // paired: images/ + labels/
    std::string real_root;       // unpaired: images/
    std::string reference_root;  // labeled real split (images/ + labels/), optional
    std::string palette = "toy";  // "toy" | "cityscapes34"
    int num_classes = 5;
    ImageSize size{64, 128};
    std::int64_t test_count = 50;  // last N synthetic samples held out
    std::uint64_t toy_seed = 0;
    std::int64_t toy_synthetic = 250;
    std::int64_t toy_real = 200;
};

struct TrainConfig {
    int batch_size = 2;
    double lr = 1e-4;
    double beta1 = 0.0;
    double beta2 = 0.999;
    std::int64_t max_steps = 2000;
    std::uint64_t seed = 0;
    int d_steps_per_g = 1;
    int r1_interval = 16;
    double r1_gamma = 1.0;
    int grid_k_align = 2;
    int grid_k_disc_u = 1;
    int grid_k_disc_ensemble = 2;
    bool patchwise_generation = false;  // generate each patch independently
    int grid_k_generation = 2;
    double lambda_adv = 1.0;
    double lambda_lpips = 10.0;
    bool ema = false;
    double ema_decay = 0.999;
    std::int64_t checkpoint_interval = 500;
    std::int64_t eval_interval = 0;  // 0 disables periodic evaluation
    Profile profile = Profile::Toy;

    void validate() const;
};

struct MetricsConfig {
    std::string embedder = "random_conv";  // "random_conv" | "torchscript"
    std::string embedder_path;
    std::uint64_t embedder_seed = 0;
    std::string segmenter = "toy_oracle";  // "toy_oracle" | "torchscript" | "none"
    std::string segmenter_path;
    int kid_subset_size = 100;
    int kid_subsets = 100;
    std::uint64_t eval_seed = 0;
    std::int64_t max_samples = 0;  // 0 = evaluate every label of the split
    int batch_size = 8;
};

struct RunConfig {
    Profile profile = Profile::Toy;
    DataConfig data;
    GeneratorConfig generator;
    BackboneConfig backbone;
    DiscriminatorConfig discriminator;
    TrainConfig train;
    MetricsConfig metrics;
    std::string preset;   // ablation preset row that produced this config, informational
    std::string run_dir;  // empty: $S2R_RUN_ROOT/<name> or ./runs/<name>

    static RunConfig toy();
    static RunConfig benchmark();

    // Parse a JSON config. Starts from the defaults of its "profile" key
    // (toy when absent); unknown keys raise ConfigError naming the key.
    // Cross-field validation is left to validate().
    static RunConfig from_json(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json(int indent = 2) const;

    // `dotted.key=value`; value parsed as JSON when possible, else taken as a string.
    // Cross-field validation is left to validate(), so related keys can be set one at a time.
    void apply_override(const std::string& assignment);

    // Cross-field checks (class counts agree, sizes compatible, ...). Throws ConfigError.
    void validate() const;
};

const char* to_string(Profile p);

// One row of an ablation table: label, description, and the overrides it applies.
struct AblationRow {
    std::string label;
    std::string description;
    std::vector<std::string> overrides;
};

// "alignment" (rows A-D) or "discrimination" (rows A-E). Throws ConfigError for other names.
std::vector<AblationRow> ablation_preset(const std::string& name);

}  // namespace s2r
