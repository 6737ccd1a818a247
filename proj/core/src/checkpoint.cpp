#include <torch/serialize/archive.h>

#include "s2r/errors.hpp"
#include "s2r/training.hpp"

namespace fs = std::filesystem;

namespace s2r {

namespace {

constexpr const char* kFormat = "s2r.checkpoint";
constexpr std::int64_t kVersion = 1;

torch::serialize::InputArchive open_checkpoint(const fs::path& path) {
    if (!fs::exists(path)) throw Error("checkpoint not found: " + path.string());
    torch::serialize::InputArchive archive;
    try {
        archive.load_from(path.string());
    } catch (const c10::Error& e) {
        throw Error("cannot read checkpoint " + path.string() + ": " + e.what_without_backtrace());
    }
    c10::IValue format, version;
    if (!archive.try_read("format", format) || !format.isString() || format.toStringRef() != kFormat)
        throw Error(path.string() + " is not an s2r checkpoint");
    archive.read("version", version);
    if (version.toInt() != kVersion)
        throw Error("unsupported checkpoint version " + std::to_string(version.toInt()));
    return archive;
}

void write_module(torch::serialize::OutputArchive& archive, const char* key, const torch::nn::Module& m) {
    torch::serialize::OutputArchive sub;
    m.save(sub);
    archive.write(key, sub);
}

void read_module(torch::serialize::InputArchive& archive, const char* key, torch::nn::Module& m) {
    torch::serialize::InputArchive sub;
    if (!archive.try_read(key, sub)) throw Error(std::string("checkpoint has no entry '") + key + "'");
    m.load(sub);
}

}  // namespace

void Trainer::save_checkpoint(const fs::path& path) const {
    torch::serialize::OutputArchive archive;
    archive.write("format", c10::IValue(std::string(kFormat)));
    archive.write("version", c10::IValue(kVersion));
    archive.write("step", c10::IValue(step_));
    archive.write("config", c10::IValue(config_.to_json()));
    write_module(archive, "generator", *generator_);
    if (config_.train.ema) write_module(archive, "generator_ema", *ema_generator_);
    write_module(archive, "disc_whole", *disc_whole_);
    write_module(archive, "disc_ensemble", *disc_ensemble_);
    {
        torch::serialize::OutputArchive sub;
        opt_g_->save(sub);
        archive.write("opt_g", sub);
    }
    {
        torch::serialize::OutputArchive sub;
        opt_d_->save(sub);
        archive.write("opt_d", sub);
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    // Written to a sibling temp file, then renamed into place.
    const auto tmp = fs::path(path.string() + ".tmp");
    archive.save_to(tmp.string());
    fs::rename(tmp, path);
}

void Trainer::load_checkpoint(const fs::path& path) {
    auto archive = open_checkpoint(path);
    c10::IValue step;
    archive.read("step", step);
    read_module(archive, "generator", *generator_);
    if (config_.train.ema) read_module(archive, "generator_ema", *ema_generator_);
    read_module(archive, "disc_whole", *disc_whole_);
    read_module(archive, "disc_ensemble", *disc_ensemble_);
    {
        torch::serialize::InputArchive sub;
        archive.read("opt_g", sub);
        opt_g_->load(sub);
    }
    {
        torch::serialize::InputArchive sub;
        archive.read("opt_d", sub);
        opt_d_->load(sub);
    }
    step_ = step.toInt();
}

RunConfig read_checkpoint_config(const fs::path& checkpoint) {
    auto archive = open_checkpoint(checkpoint);
    c10::IValue config;
    archive.read("config", config);
    return RunConfig::from_json(config.toStringRef());
}

LoadedGenerator load_generator(const fs::path& checkpoint) {
    auto archive = open_checkpoint(checkpoint);
    c10::IValue config, step;
    archive.read("config", config);
    archive.read("step", step);
    LoadedGenerator out;
    out.config = RunConfig::from_json(config.toStringRef());
    out.step = step.toInt();
    out.generator = Generator(out.config.generator);
    read_module(archive, out.config.train.ema ? "generator_ema" : "generator", *out.generator);
    out.generator->eval();
    for (auto& p : out.generator->parameters()) p.set_requires_grad(false);
    return out;
}

}  // namespace s2r
