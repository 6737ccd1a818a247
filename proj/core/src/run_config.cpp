#include "s2r/run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "s2r/errors.hpp"

using nlohmann::json;

namespace s2r {

const char* to_string(Profile p) { return p == Profile::Toy ? "toy" : "benchmark"; }

namespace {

Profile profile_from(const std::string& s) {
    if (s == "toy") return Profile::Toy;
    if (s == "benchmark") return Profile::Benchmark;
    throw ConfigError("profile must be 'toy' or 'benchmark', got '" + s + "'");
}

json size_json(ImageSize s) { return json::array({s.height, s.width}); }

ImageSize size_from(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ConfigError(key + " must be [height, width]");
    return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

json to_tree(const RunConfig& c) {
    json j;
    j["profile"] = to_string(c.profile);
    j["preset"] = c.preset;
    j["run_dir"] = c.run_dir;
    j["data"] = {{"source", c.data.source},
                 {"synthetic_root", c.data.synthetic_root},
                 {"real_root", c.data.real_root},
                 {"reference_root", c.data.reference_root},
                 {"palette", c.data.palette},
                 {"num_classes", c.data.num_classes},
                 {"size", size_json(c.data.size)},
                 {"test_count", c.data.test_count},
                 {"toy_seed", c.data.toy_seed},
                 {"toy_synthetic", c.data.toy_synthetic},
                 {"toy_real", c.data.toy_real}};
    j["generator"] = {{"num_classes", c.generator.num_classes},
                      {"base_width", c.generator.base_width},
                      {"num_upsampling_stages", c.generator.num_upsampling_stages},
                      {"noise_dim", c.generator.noise_dim},
                      {"output_size", size_json(c.generator.output_size)}};
    j["backbone"] = {{"arch", c.backbone.arch},
                     {"layer_ids", c.backbone.layer_ids},
                     {"weights_source",
                      c.backbone.weights_source == WeightsSource::RandomFixed ? "random_fixed" : "pretrained_file"},
                     {"weights_path", c.backbone.weights_path},
                     {"seed", c.backbone.seed},
                     {"mean", c.backbone.mean},
                     {"std", c.backbone.std}};
    j["discriminator"] = {{"whole_base_width", c.discriminator.whole_base_width},
                          {"whole_num_blocks", c.discriminator.whole_num_blocks},
                          {"feature_hidden", c.discriminator.feature_hidden},
                          {"feature_num_blocks", c.discriminator.feature_num_blocks},
                          {"group_norm_groups", c.discriminator.group_norm_groups},
                          {"power_iterations", c.discriminator.power_iterations}};
    const auto& t = c.train;
    j["train"] = {{"batch_size", t.batch_size},
                  {"lr", t.lr},
                  {"beta1", t.beta1},
                  {"beta2", t.beta2},
                  {"max_steps", t.max_steps},
                  {"seed", t.seed},
                  {"d_steps_per_g", t.d_steps_per_g},
                  {"r1_interval", t.r1_interval},
                  {"r1_gamma", t.r1_gamma},
                  {"grid_k_align", t.grid_k_align},
                  {"grid_k_disc_u", t.grid_k_disc_u},
                  {"grid_k_disc_ensemble", t.grid_k_disc_ensemble},
                  {"patchwise_generation", t.patchwise_generation},
                  {"grid_k_generation", t.grid_k_generation},
                  {"lambda_adv", t.lambda_adv},
                  {"lambda_lpips", t.lambda_lpips},
                  {"ema", t.ema},
                  {"ema_decay", t.ema_decay},
                  {"checkpoint_interval", t.checkpoint_interval},
                  {"eval_interval", t.eval_interval}};
    const auto& m = c.metrics;
    j["metrics"] = {{"embedder", m.embedder},
                    {"embedder_path", m.embedder_path},
                    {"embedder_seed", m.embedder_seed},
                    {"segmenter", m.segmenter},
                    {"segmenter_path", m.segmenter_path},
                    {"kid_subset_size", m.kid_subset_size},
                    {"kid_subsets", m.kid_subsets},
                    {"eval_seed", m.eval_seed},
                    {"max_samples", m.max_samples},
                    {"batch_size", m.batch_size}};
    return j;
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    try {
        j.at(key).get_to(out);
    } catch (const json::exception& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
    }
}

RunConfig from_tree(const json& j) {
    RunConfig c;
    c.profile = profile_from(j.at("profile").get<std::string>());
    read(j, "preset", c.preset, "");
    read(j, "run_dir", c.run_dir, "");

    const auto& d = j.at("data");
    read(d, "source", c.data.source, "data");
    read(d, "synthetic_root", c.data.synthetic_root, "data");
    read(d, "real_root", c.data.real_root, "data");
    read(d, "reference_root", c.data.reference_root, "data");
    read(d, "palette", c.data.palette, "data");
    read(d, "num_classes", c.data.num_classes, "data");
    c.data.size = size_from(d.at("size"), "data.size");
    read(d, "test_count", c.data.test_count, "data");
    read(d, "toy_seed", c.data.toy_seed, "data");
    read(d, "toy_synthetic", c.data.toy_synthetic, "data");
    read(d, "toy_real", c.data.toy_real, "data");

    const auto& g = j.at("generator");
    read(g, "num_classes", c.generator.num_classes, "generator");
    read(g, "base_width", c.generator.base_width, "generator");
    read(g, "num_upsampling_stages", c.generator.num_upsampling_stages, "generator");
    read(g, "noise_dim", c.generator.noise_dim, "generator");
    c.generator.output_size = size_from(g.at("output_size"), "generator.output_size");

    const auto& b = j.at("backbone");
    read(b, "arch", c.backbone.arch, "backbone");
    read(b, "layer_ids", c.backbone.layer_ids, "backbone");
    std::string ws;
    read(b, "weights_source", ws, "backbone");
    if (ws == "random_fixed")
        c.backbone.weights_source = WeightsSource::RandomFixed;
    else if (ws == "pretrained_file")
        c.backbone.weights_source = WeightsSource::PretrainedFile;
    else
        throw ConfigError("backbone.weights_source must be 'random_fixed' or 'pretrained_file'");
    read(b, "weights_path", c.backbone.weights_path, "backbone");
    read(b, "seed", c.backbone.seed, "backbone");
    read(b, "mean", c.backbone.mean, "backbone");
    read(b, "std", c.backbone.std, "backbone");

    const auto& dc = j.at("discriminator");
    read(dc, "whole_base_width", c.discriminator.whole_base_width, "discriminator");
    read(dc, "whole_num_blocks", c.discriminator.whole_num_blocks, "discriminator");
    read(dc, "feature_hidden", c.discriminator.feature_hidden, "discriminator");
    read(dc, "feature_num_blocks", c.discriminator.feature_num_blocks, "discriminator");
    read(dc, "group_norm_groups", c.discriminator.group_norm_groups, "discriminator");
    read(dc, "power_iterations", c.discriminator.power_iterations, "discriminator");

    const auto& t = j.at("train");
    auto& tc = c.train;
    read(t, "batch_size", tc.batch_size, "train");
    read(t, "lr", tc.lr, "train");
    read(t, "beta1", tc.beta1, "train");
    read(t, "beta2", tc.beta2, "train");
    read(t, "max_steps", tc.max_steps, "train");
    read(t, "seed", tc.seed, "train");
    read(t, "d_steps_per_g", tc.d_steps_per_g, "train");
    read(t, "r1_interval", tc.r1_interval, "train");
    read(t, "r1_gamma", tc.r1_gamma, "train");
    read(t, "grid_k_align", tc.grid_k_align, "train");
    read(t, "grid_k_disc_u", tc.grid_k_disc_u, "train");
    read(t, "grid_k_disc_ensemble", tc.grid_k_disc_ensemble, "train");
    read(t, "patchwise_generation", tc.patchwise_generation, "train");
    read(t, "grid_k_generation", tc.grid_k_generation, "train");
    read(t, "lambda_adv", tc.lambda_adv, "train");
    read(t, "lambda_lpips", tc.lambda_lpips, "train");
    read(t, "ema", tc.ema, "train");
    read(t, "ema_decay", tc.ema_decay, "train");
    read(t, "checkpoint_interval", tc.checkpoint_interval, "train");
    read(t, "eval_interval", tc.eval_interval, "train");
    tc.profile = c.profile;

    const auto& m = j.at("metrics");
    read(m, "embedder", c.metrics.embedder, "metrics");
    read(m, "embedder_path", c.metrics.embedder_path, "metrics");
    read(m, "embedder_seed", c.metrics.embedder_seed, "metrics");
    read(m, "segmenter", c.metrics.segmenter, "metrics");
    read(m, "segmenter_path", c.metrics.segmenter_path, "metrics");
    read(m, "kid_subset_size", c.metrics.kid_subset_size, "metrics");
    read(m, "kid_subsets", c.metrics.kid_subsets, "metrics");
    read(m, "eval_seed", c.metrics.eval_seed, "metrics");
    read(m, "max_samples", c.metrics.max_samples, "metrics");
    read(m, "batch_size", c.metrics.batch_size, "metrics");
    return c;
}

// Overlay `patch` onto `base`, rejecting keys `base` does not have.
void merge_strict(json& base, const json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + " must be an object");
    for (const auto& [key, value] : patch.items()) {
        const auto path = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
        if (base[key].is_object())
            merge_strict(base[key], value, path);
        else
            base[key] = value;
    }
}

json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return json(text);
    }
}

}  // namespace

void TrainConfig::validate() const {
    auto grid_ok = [](int k) { return k == 1 || k == 2 || k == 4; };
    if (batch_size <= 0) throw ConfigError("train.batch_size must be positive");
    if (!(lr > 0.0)) throw ConfigError("train.lr must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) throw ConfigError("train.beta1/beta2 out of range");
    if (max_steps < 0) throw ConfigError("train.max_steps must be non-negative");
    if (d_steps_per_g <= 0) throw ConfigError("train.d_steps_per_g must be positive");
    if (r1_interval <= 0) throw ConfigError("train.r1_interval must be positive");
    if (r1_gamma < 0.0) throw ConfigError("train.r1_gamma must be non-negative");
    if (!grid_ok(grid_k_align)) throw ConfigError("train.grid_k_align must be 1, 2 or 4");
    if (!grid_ok(grid_k_disc_u)) throw ConfigError("train.grid_k_disc_u must be 1, 2 or 4");
    if (!grid_ok(grid_k_disc_ensemble)) throw ConfigError("train.grid_k_disc_ensemble must be 1, 2 or 4");
    if (!grid_ok(grid_k_generation)) throw ConfigError("train.grid_k_generation must be 1, 2 or 4");
    if (lambda_adv < 0.0 || lambda_lpips < 0.0) throw ConfigError("train loss weights must be non-negative");
    if (ema_decay <= 0.0 || ema_decay >= 1.0) throw ConfigError("train.ema_decay must be in (0, 1)");
    if (checkpoint_interval < 0 || eval_interval < 0) throw ConfigError("train intervals must be non-negative");
}

RunConfig RunConfig::toy() {
    RunConfig c;
    c.profile = Profile::Toy;
    c.data.source = "toy";
    c.data.palette = "toy";
    c.data.num_classes = 5;
    c.data.size = {64, 128};
    c.data.toy_synthetic = 600;
    c.data.toy_real = 300;
    c.data.test_count = 100;
    c.generator = GeneratorConfig::toy(5);
    c.train.profile = Profile::Toy;
    return c;
}

RunConfig RunConfig::benchmark() {
    RunConfig c;
    c.profile = Profile::Benchmark;
    c.data.source = "directory";
    c.data.palette = "cityscapes34";
    c.data.num_classes = 34;
    c.data.size = {256, 512};
    c.data.test_count = 5000;
    c.generator = GeneratorConfig::benchmark(34);
    c.backbone.weights_source = WeightsSource::PretrainedFile;
    c.discriminator.whole_base_width = 64;
    c.discriminator.whole_num_blocks = 5;
    c.train.profile = Profile::Benchmark;
    c.train.max_steps = 200000;
    c.train.checkpoint_interval = 5000;
    c.metrics.embedder = "torchscript";
    c.metrics.segmenter = "torchscript";
    c.metrics.batch_size = 4;
    return c;
}

RunConfig RunConfig::from_json(const std::string& text) {
    json user;
    try {
        user = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!user.is_object()) throw ConfigError("config must be a JSON object");
    Profile p = Profile::Toy;
    if (user.contains("profile")) {
        if (!user["profile"].is_string()) throw ConfigError("profile must be a string");
        p = profile_from(user["profile"].get<std::string>());
    }
    auto tree = to_tree(p == Profile::Toy ? toy() : benchmark());
    merge_strict(tree, user, "");
    return from_tree(tree);
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string RunConfig::to_json(int indent) const { return to_tree(*this).dump(indent); }

void RunConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
    const auto key = assignment.substr(0, eq);
    const auto value = parse_value(assignment.substr(eq + 1));

    json patch = value;
    std::vector<std::string> parts;
    std::stringstream ss(key);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};

    auto tree = to_tree(*this);
    // Probe each level so the error names the first unknown component.
    const json* node = &tree;
    std::string path;
    for (const auto& part : parts) {
        path = path.empty() ? part : path + "." + part;
        if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + path + "'");
        node = &(*node)[part];
    }
    if (node->is_object()) throw ConfigError("override '" + key + "' must target a leaf key");
    merge_strict(tree, patch, "");
    *this = from_tree(tree);
}

void RunConfig::validate() const {
    train.validate();
    generator.validate();
    if (data.source != "toy" && data.source != "directory")
        throw ConfigError("data.source must be 'toy' or 'directory'");
    if (data.palette != "toy" && data.palette != "cityscapes34")
        throw ConfigError("data.palette must be 'toy' or 'cityscapes34'");
    if (data.palette == "cityscapes34" && data.num_classes != 34)
        throw ConfigError("data.num_classes must be 34 for the cityscapes34 palette");
    if (data.palette == "toy" && (data.num_classes < 2 || data.num_classes > 8))
        throw ConfigError("data.num_classes must be in [2, 8] for the toy palette");
    if (generator.num_classes != data.num_classes)
        throw ConfigError("generator.num_classes must equal data.num_classes");
    if (!(generator.output_size == data.size)) throw ConfigError("generator.output_size must equal data.size");
    if (data.size.height % 16 != 0 || data.size.width % 16 != 0)
        throw ConfigError("data.size must be divisible by 16");
    if (data.test_count < 0) throw ConfigError("data.test_count must be non-negative");
    if (data.source == "toy" && data.test_count >= data.toy_synthetic)
        throw ConfigError("data.test_count must be smaller than data.toy_synthetic");
    const int kmax = std::max({train.grid_k_align, train.grid_k_disc_u, train.grid_k_disc_ensemble,
                               train.patchwise_generation ? train.grid_k_generation : 1});
    if (data.size.height % (2 * kmax) != 0 || data.size.width % (2 * kmax) != 0)
        throw ConfigError("data.size must be divisible by 2 * largest grid_k");
    if (backbone.weights_source == WeightsSource::PretrainedFile && backbone.weights_path.empty())
        throw ConfigError("backbone.weights_path is required for pretrained_file weights");
    if (metrics.embedder != "random_conv" && metrics.embedder != "torchscript")
        throw ConfigError("metrics.embedder must be 'random_conv' or 'torchscript'");
    if (metrics.segmenter != "toy_oracle" && metrics.segmenter != "torchscript" && metrics.segmenter != "none")
        throw ConfigError("metrics.segmenter must be 'toy_oracle', 'torchscript' or 'none'");
    if (metrics.kid_subset_size <= 0 || metrics.kid_subsets <= 0 || metrics.batch_size <= 0)
        throw ConfigError("metrics KID/batch parameters must be positive");
}

std::vector<AblationRow> ablation_preset(const std::string& name) {
    if (name == "alignment") {
        return {
            {"A", "Whole Image | LPIPS on image level", {"train.grid_k_align=1", "train.patchwise_generation=false"}},
            {"B", "Whole Image | LPIPS on patch-level (4)", {"train.grid_k_align=2", "train.patchwise_generation=false"}},
            {"C", "Whole Image | LPIPS on patch-level (16)", {"train.grid_k_align=4", "train.patchwise_generation=false"}},
            {"D",
             "Individual Patches | LPIPS on patch level",
             {"train.grid_k_align=2", "train.patchwise_generation=true", "train.grid_k_generation=2"}},
        };
    }
    if (name == "discrimination") {
        return {
            {"A", "D_u Patches (4) | D_l Patches (4)", {"train.grid_k_disc_u=2", "train.grid_k_disc_ensemble=2"}},
            {"B", "D_u Patches (4) | D_l Whole Image", {"train.grid_k_disc_u=2", "train.grid_k_disc_ensemble=1"}},
            {"C", "D_u Whole Image | D_l Whole Image", {"train.grid_k_disc_u=1", "train.grid_k_disc_ensemble=1"}},
            {"D", "D_u Whole Image | D_l Patches (16)", {"train.grid_k_disc_u=1", "train.grid_k_disc_ensemble=4"}},
            {"E", "D_u Whole Image | D_l Patches (4)", {"train.grid_k_disc_u=1", "train.grid_k_disc_ensemble=2"}},
        };
    }
    throw ConfigError("unknown ablation preset '" + name + "' (expected 'alignment' or 'discrimination')");
}

}  // namespace s2r
