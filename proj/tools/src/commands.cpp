#include "s2r/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "s2r/errors.hpp"
#include "s2r/evaluation.hpp"
#include "s2r/image_io.hpp"
#include "s2r/layout.hpp"
#include "s2r/module_utils.hpp"
#include "s2r/toy_domains.hpp"
#include "s2r/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace s2r::cli {

fs::path default_run_root() {
    if (const char* root = std::getenv("S2R_RUN_ROOT"); root != nullptr && *root != '\0') return root;
    return "runs";
}

namespace {

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    auto config = path.empty() ? RunConfig::toy() : RunConfig::from_file(path);
    for (const auto& o : overrides) config.apply_override(o);
    config.validate();
    return config;
}

fs::path resolve_run_dir(const RunConfig& config, const std::string& flag, const std::string& config_path) {
    if (!flag.empty()) return flag;
    if (!config.run_dir.empty()) return config.run_dir;
    const auto name = config_path.empty() ? std::string(to_string(config.profile)) : fs::path(config_path).stem().string();
    return default_run_root() / name;
}

struct Evaluators {
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Segmenter> segmenter;
};

Evaluators make_evaluators(const RunConfig& config, const ClassPalette& palette) {
    const auto& m = config.metrics;
    return {make_embedder(m.embedder, m.embedder_path, m.embedder_seed),
            make_segmenter(m.segmenter, m.segmenter_path, palette)};
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string run_dir;
    std::string resume;
    bool verbose = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    const auto config = load_config(a.config, a.overrides);
    const auto run_dir = resolve_run_dir(config, a.run_dir, a.config);

    TrainOptions opts;
    opts.quiet = !a.verbose;
    if (!a.resume.empty()) opts.resume_from = fs::path(a.resume);
    std::optional<ResolvedData> eval_data;
    Evaluators evaluators;
    if (config.train.eval_interval > 0) {
        eval_data = resolve_data(config.data);
        evaluators = make_evaluators(config, eval_data->palette);
        opts.eval_hook = [&](std::int64_t step, Trainer& trainer) {
            auto splits = standard_splits(*eval_data, config.metrics.eval_seed, config.metrics.max_samples);
            std::ofstream log(run_dir / "eval_log.jsonl", std::ios::app);
            for (const auto& split : splits) {
                auto result = evaluate_split(trainer.eval_generator(), split, *evaluators.embedder,
                                             evaluators.segmenter.get(), eval_data->palette, eval_options_for(config));
                result.report.checkpoint_step = step;
                log << json::parse(result.report.to_json()).dump() << "\n";
            }
        };
    }
    const auto result = train(config, run_dir, opts);
    if (!result.losses.empty()) {
        const auto& last = result.losses.back();
        err << "trained " << result.losses.size() << " steps; final total_g=" << last.total_g()
            << " total_d=" << last.total_d() << "\n";
    }
    out << "run directory: " << run_dir.string() << "\n"
        << "checkpoint: " << result.final_checkpoint.string() << "\n";
    return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string split = "all";
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
    auto config = read_checkpoint_config(a.checkpoint);
    for (const auto& o : a.overrides) config.apply_override(o);
    config.validate();
    if (a.split != "all" && a.split != "split1" && a.split != "split2")
        throw ConfigError("--split must be split1, split2 or all");

    auto loaded = load_generator(a.checkpoint);
    loaded.generator->eval();
    const auto data = resolve_data(config.data);
    auto evaluators = make_evaluators(config, data.palette);
    const auto seed = a.seed.value_or(config.metrics.eval_seed);
    const fs::path out_dir = a.out_dir.empty() ? fs::path(a.checkpoint).parent_path().parent_path() / "eval"
                                               : fs::path(a.out_dir);
    int written = 0;
    for (const auto& split : standard_splits(data, seed, config.metrics.max_samples)) {
        if (a.split != "all" && split.name != a.split) continue;
        auto result = evaluate_split(loaded.generator, split, *evaluators.embedder, evaluators.segmenter.get(),
                                     data.palette, eval_options_for(config));
        result.report.checkpoint_step = loaded.step;
        write_report(result, out_dir);
        out << result.report.to_table() << "\n";
        if (!result.report.miou) err << "warning: " << split.name << ": mIoU omitted (" << result.report.miou_note << ")\n";
        ++written;
    }
    if (written == 0) throw Error("split '" + a.split + "' is not available for this dataset");
    out << "reports written to " << out_dir.string() << "\n";
    return kExitOk;
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
    std::string checkpoint;
    std::string labels;
    std::string out_dir;
    std::uint64_t seed = 0;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
    auto loaded = load_generator(a.checkpoint);
    loaded.generator->eval();
    const auto& gc = loaded.generator->config();
    const auto& tc = loaded.config.train;
    if (!fs::is_directory(a.labels)) throw ConfigError("labels directory not found: " + a.labels);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(a.labels))
        if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    fs::create_directories(a.out_dir);

    torch::NoGradGuard guard;
    std::int64_t written = 0, skipped = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        torch::Tensor ids;
        try {
            ids = read_label_png(files[i]);
            check_id_range(ids, gc.num_classes);
        } catch (const std::exception& e) {
            err << "warning: skipping " << files[i].filename().string() << ": " << e.what() << "\n";
            ++skipped;
            continue;
        }
        if (ids.size(0) != gc.output_size.height || ids.size(1) != gc.output_size.width)
            ids = resize_labels(ids, gc.output_size);
        const auto onehot = one_hot_encode(ids.unsqueeze(0), gc.num_classes);
        const auto z = sample_noise(1, gc.noise_dim, gc.output_size, derive_seed(a.seed, kSeedEval, i));
        const auto image = tc.patchwise_generation
                               ? generate_patchwise(loaded.generator, onehot, z, tc.grid_k_generation)
                               : generate(loaded.generator, onehot, z);
        write_rgb_png(fs::path(a.out_dir) / files[i].filename(), image[0]);
        ++written;
    }
    out << "generated " << written << " images, skipped " << skipped << "\n";
    return kExitOk;
}

// ---- ablate ----------------------------------------------------------------

struct AblateArgs {
    std::string preset;
    std::int64_t steps = 200;
    std::string config;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::string split = "split2";
};

struct AblationResult {
    AblationRow row;
    bool ok = false;
    std::string error;
    double fid = NAN, miou = NAN, kid = NAN;
};

std::string ablation_table(const std::string& preset, const std::vector<AblationResult>& rows) {
    std::size_t dw = 11;
    for (const auto& r : rows) dw = std::max(dw, r.row.description.size());
    auto num = [](double v, int p) {
        if (!std::isfinite(v)) return std::string("-");
        std::ostringstream os;
        os << std::fixed << std::setprecision(p) << v;
        return os.str();
    };
    std::ostringstream os;
    os << "ablation: " << preset << "\n";
    os << std::left << std::setw(8) << "Config" << std::setw(static_cast<int>(dw) + 2) << "Description" << std::right
       << std::setw(10) << "FID" << std::setw(10) << "mIoU" << std::setw(10) << "KID" << "  status\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(8) << r.row.label << std::setw(static_cast<int>(dw) + 2) << r.row.description
           << std::right << std::setw(10) << num(r.fid, 2) << std::setw(10) << num(r.miou * 100.0, 1)
           << std::setw(10) << num(r.kid, 4) << "  " << (r.ok ? "ok" : "failed: " + r.error) << "\n";
    }
    return os.str();
}

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
    const auto rows = ablation_preset(a.preset);
    if (a.steps < 1) throw ConfigError("--steps must be >= 1");
    auto base = load_config(a.config, a.overrides);
    if (base.profile != Profile::Toy) throw ConfigError("ablations run at the toy profile");
    base.train.max_steps = a.steps;
    base.train.checkpoint_interval = 0;
    base.train.eval_interval = 0;
    const fs::path out_dir = a.out_dir.empty() ? default_run_root() / ("ablate_" + a.preset) : fs::path(a.out_dir);
    fs::create_directories(out_dir);

    const auto data = resolve_data(base.data);
    std::vector<AblationResult> results;
    for (const auto& row : rows) {
        AblationResult r{row};
        try {
            auto config = base;
            for (const auto& o : row.overrides) config.apply_override(o);
            config.preset = a.preset + ":" + row.label;
            config.validate();
            const auto run_dir = out_dir / ("config_" + row.label);
            err << "[" << row.label << "] " << row.description << "\n";
            const auto trained = train(config, run_dir);
            auto loaded = load_generator(trained.final_checkpoint);
            loaded.generator->eval();
            auto evaluators = make_evaluators(config, data.palette);
            std::optional<EvalOutput> result;
            for (const auto& split : standard_splits(data, config.metrics.eval_seed, config.metrics.max_samples)) {
                if (split.name != a.split) continue;
                result = evaluate_split(loaded.generator, split, *evaluators.embedder, evaluators.segmenter.get(),
                                        data.palette, eval_options_for(config));
                result->report.checkpoint_step = loaded.step;
                write_report(*result, run_dir / "eval");
            }
            if (!result) throw Error("split '" + a.split + "' is not available");
            r.fid = result->report.fid;
            r.kid = result->report.kid.mean;
            if (result->report.miou) r.miou = result->report.miou->miou;
            r.ok = std::isfinite(r.fid) && std::isfinite(r.kid);
            if (!r.ok) r.error = "non-finite metrics";
        } catch (const std::exception& e) {
            r.error = e.what();
            err << "[" << row.label << "] failed: " << e.what() << "\n";
        }
        results.push_back(r);
    }

    const auto table = ablation_table(a.preset, results);
    json j;
    j["preset"] = a.preset;
    j["steps"] = a.steps;
    j["split"] = a.split;
    j["rows"] = json::array();
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    for (const auto& r : results)
        j["rows"].push_back({{"config", r.row.label},
                             {"description", r.row.description},
                             {"overrides", r.row.overrides},
                             {"fid", finite_or_null(r.fid)},
                             {"miou", finite_or_null(r.miou)},
                             {"kid", finite_or_null(r.kid)},
                             {"status", r.ok ? "ok" : "failed"},
                             {"error", r.error}});
    std::ofstream(out_dir / "ablation.json") << j.dump(2) << "\n";
    std::ofstream(out_dir / "ablation.txt") << table;
    out << table;
    const bool all_ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.ok; });
    return all_ok ? kExitOk : kExitRuntime;
}

// ---- make-toy --------------------------------------------------------------

struct MakeToyArgs {
    std::string out_dir;
    std::uint64_t seed = 0;
    std::int64_t synthetic = 600;
    std::int64_t real = 300;
    int classes = 5;
    std::int64_t height = 64;
    std::int64_t width = 128;
};

int cmd_make_toy(const MakeToyArgs& a, std::ostream& out, std::ostream&) {
    if (a.synthetic < 1 || a.real < 1) throw ConfigError("--synthetic and --real must be >= 1");
    if (a.classes < 2 || a.classes > 8) throw ConfigError("--classes must be in [2, 8]");
    if (a.height <= 0 || a.width <= 0 || a.height % 16 != 0 || a.width % 16 != 0)
        throw ConfigError("--height and --width must be positive multiples of 16");
    const auto toy = make_toy_domains(a.seed, a.synthetic, a.real, a.classes, {a.height, a.width});
    const fs::path root(a.out_dir);
    write_dataset(toy.synthetic, root / "synthetic");
    write_dataset(toy.real_labeled, root / "real");
    out << "wrote " << toy.synthetic.size() << " synthetic and " << toy.real.size() << " real samples to "
        << root.string() << "\n";
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthetic-to-real semantic image synthesis", "s2r"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a generator");
    train_cmd->add_option("--config", train_args.config, "JSON config file (toy defaults when omitted)");
    train_cmd->add_option("--set", train_args.overrides, "Override a config key: dotted.key=value")->take_all();
    train_cmd->add_option("--run-dir", train_args.run_dir, "Run directory");
    train_cmd->add_option("--resume", train_args.resume, "Checkpoint to resume from");
    train_cmd->add_flag("--verbose", train_args.verbose, "Print loss records while training");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint (FID, KID, mIoU)");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--split", eval_args.split, "split1, split2 or all");
    eval_cmd->add_option("--out", eval_args.out_dir, "Report directory");
    eval_cmd->add_option("--seed", eval_args.seed, "Noise seed (default metrics.eval_seed)");
    eval_cmd->add_option("--set", eval_args.overrides, "Override a config key: dotted.key=value")->take_all();

    GenerateArgs gen_args;
    auto* gen_cmd = app.add_subcommand("generate", "Generate one image per label map");
    gen_cmd->add_option("--checkpoint", gen_args.checkpoint, "Checkpoint file")->required();
    gen_cmd->add_option("--labels", gen_args.labels, "Directory of label PNGs")->required();
    gen_cmd->add_option("--out", gen_args.out_dir, "Output directory")->required();
    gen_cmd->add_option("--seed", gen_args.seed, "Noise seed");

    AblateArgs ablate_args;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run every configuration of an ablation table");
    ablate_cmd->add_option("--preset", ablate_args.preset, "alignment or discrimination")->required();
    ablate_cmd->add_option("--steps", ablate_args.steps, "Training steps per configuration");
    ablate_cmd->add_option("--config", ablate_args.config, "Base JSON config (toy defaults when omitted)");
    ablate_cmd->add_option("--set", ablate_args.overrides, "Override a base config key")->take_all();
    ablate_cmd->add_option("--out", ablate_args.out_dir, "Output directory");
    ablate_cmd->add_option("--split", ablate_args.split, "Evaluation split");

    MakeToyArgs toy_args;
    auto* toy_cmd = app.add_subcommand("make-toy", "Write the toy synthetic/real domains to disk");
    toy_cmd->add_option("--out", toy_args.out_dir, "Output root")->required();
    toy_cmd->add_option("--seed", toy_args.seed, "Seed");
    toy_cmd->add_option("--synthetic", toy_args.synthetic, "Synthetic sample count");
    toy_cmd->add_option("--real", toy_args.real, "Real sample count");
    toy_cmd->add_option("--classes", toy_args.classes, "Number of classes (2-8)");
    toy_cmd->add_option("--height", toy_args.height, "Image height");
    toy_cmd->add_option("--width", toy_args.width, "Image width");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_args, out, err);
        if (eval_cmd->parsed()) return cmd_eval(eval_args, out, err);
        if (gen_cmd->parsed()) return cmd_generate(gen_args, out, err);
        if (ablate_cmd->parsed()) return cmd_ablate(ablate_args, out, err);
        if (toy_cmd->parsed()) return cmd_make_toy(toy_args, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitConfig;
}

}  // namespace s2r::cli
