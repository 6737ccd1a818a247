#include "s2r/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "s2r/errors.hpp"
#include "s2r/image_io.hpp"
#include "s2r/layout.hpp"
#include "s2r/module_utils.hpp"
#include "s2r/training.hpp"

namespace s2r {

namespace {

nlohmann::json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

std::string fmt(double v, int precision = 4) {
    if (!std::isfinite(v)) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

}  // namespace

std::string MetricsReport::to_json(int indent) const {
    nlohmann::json j;
    j["split"] = split;
    j["checkpoint_step"] = checkpoint_step;
    j["num_generated"] = num_generated;
    j["num_reference"] = num_reference;
    j["embedder_id"] = embedder_id;
    j["fid"] = number_or_null(fid);
    j["kid"] = {{"mean", number_or_null(kid.mean)},
                {"stddev", number_or_null(kid.stddev)},
                {"subset_size", kid_subset_size},
                {"subsets", kid_subsets}};
    j["sqrtm"] = {{"method", "eigh"}, {"negative_eigenvalues", "clamped to 0"}};
    if (miou) {
        nlohmann::json per_class = nlohmann::json::object();
        for (std::size_t c = 0; c < miou->per_class_iou.size(); ++c) {
            const auto name = c < class_names.size() ? class_names[c] : std::to_string(c);
            per_class[name] = {{"iou", number_or_null(miou->per_class_iou[c])}, {"support", miou->support[c]}};
        }
        j["miou"] = {{"value", miou->miou},
                     {"segmenter", segmenter_kind},
                     {"classes_present", miou->classes_present},
                     {"per_class", per_class}};
    } else {
        j["miou"] = nullptr;
        j["miou_omitted"] = miou_note.empty() ? std::string("no segmenter") : miou_note;
    }
    return j.dump(indent);
}

std::string MetricsReport::to_table() const {
    std::vector<std::pair<std::string, std::string>> rows{
        {"split", split},
        {"samples", std::to_string(num_generated) + " generated / " + std::to_string(num_reference) + " reference"},
        {"embedder", embedder_id},
        {"FID", fmt(fid)},
        {"KID", fmt(kid.mean, 5) + " +- " + fmt(kid.stddev, 5)},
        {"mIoU", miou ? fmt(miou->miou) + " (" + segmenter_kind + ")" : "omitted: " + miou_note},
    };
    std::size_t w = 0;
    for (const auto& [k, v] : rows) w = std::max(w, k.size());
    std::ostringstream os;
    for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(w) + 2) << k << v << "\n";
    if (miou) {
        std::size_t cw = 5;
        for (const auto& n : class_names) cw = std::max(cw, n.size());
        os << "\n" << std::left << std::setw(static_cast<int>(cw) + 2) << "class" << std::right << std::setw(8) << "IoU"
           << std::setw(12) << "support" << "\n";
        for (std::size_t c = 0; c < miou->per_class_iou.size(); ++c) {
            const auto name = c < class_names.size() ? class_names[c] : std::to_string(c);
            os << std::left << std::setw(static_cast<int>(cw) + 2) << name << std::right << std::setw(8)
               << fmt(miou->per_class_iou[c]) << std::setw(12) << miou->support[c] << "\n";
        }
    }
    return os.str();
}

torch::Tensor generate_for_labels(Generator& g, const DatasetHandle& labels, std::int64_t n, std::uint64_t seed,
                                  const EvalOptions& options) {
    require_arg(labels.kind() == DatasetKind::PairedSynthetic, "evaluation labels must come from a paired dataset");
    require_arg(n >= 0 && n <= labels.size(), "generate_for_labels: sample count out of range");
    require_arg(options.batch_size > 0, "evaluation batch size must be positive");
    torch::NoGradGuard guard;
    const auto& gc = g->config();
    std::vector<torch::Tensor> out;
    for (std::int64_t i = 0; i < n; i += options.batch_size) {
        const auto m = std::min<std::int64_t>(options.batch_size, n - i);
        std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
        for (std::int64_t j = 0; j < m; ++j) idx[static_cast<std::size_t>(j)] = i + j;
        auto [images, ids] = labels.batch(idx);
        const auto onehot = one_hot_encode(*ids, gc.num_classes);
        const ImageSize size{ids->size(1), ids->size(2)};
        std::vector<torch::Tensor> noise;
        for (auto k : idx) noise.push_back(sample_noise(1, gc.noise_dim, size, derive_seed(seed, kSeedEval, k)));
        const auto z = torch::cat(noise, 0);
        out.push_back(options.patchwise_generation ? generate_patchwise(g, onehot, z, options.grid_k_generation)
                                                   : generate(g, onehot, z));
    }
    if (out.empty()) return torch::empty({0, 3, gc.output_size.height, gc.output_size.width});
    return torch::cat(out, 0);
}

EvalOutput evaluate_split(Generator& g, const SplitSpec& split, Embedder& embedder, Segmenter* segmenter,
                          const ClassPalette& palette, const EvalOptions& options) {
    const auto n = split.max_samples > 0 ? std::min(split.max_samples, split.labels.size()) : split.labels.size();
    if (n < 2) throw ArgumentError("evaluation split '" + split.name + "' needs at least 2 labels");
    if (split.references.size() < 2)
        throw ArgumentError("evaluation split '" + split.name + "' needs at least 2 reference images");

    EvalOutput result;
    auto& r = result.report;
    r.split = split.name;
    for (int c = 0; c < palette.num_classes(); ++c) r.class_names.push_back(palette.name(c));

    result.generated = generate_for_labels(g, split.labels, n, split.seed, options);
    r.num_generated = n;

    std::vector<std::int64_t> ref_idx(static_cast<std::size_t>(split.references.size()));
    for (std::size_t i = 0; i < ref_idx.size(); ++i) ref_idx[i] = static_cast<std::int64_t>(i);
    const auto refs = split.references.batch(ref_idx).first;
    r.num_reference = refs.size(0);

    const auto fa = embedder.embed(result.generated, options.batch_size);
    const auto fb = embedder.embed(refs, options.batch_size);
    r.embedder_id = fa.embedder_id;
    r.fid = fid(fa, fb);
    r.kid_subset_size = std::min<std::int64_t>({options.kid_subset_size, fa.count(), fb.count()});
    r.kid_subsets = options.kid_subsets;
    r.kid = kid(fa, fb, r.kid_subset_size, r.kid_subsets, derive_seed(split.seed, kSeedEval, 0xC1Dull));

    if (segmenter == nullptr) {
        r.miou_note = "no segmenter configured";
        return result;
    }
    r.segmenter_kind = segmenter->kind();
    auto confusion = torch::zeros({palette.num_classes(), palette.num_classes()}, torch::kLong);
    for (std::int64_t i = 0; i < n; i += options.batch_size) {
        const auto m = std::min<std::int64_t>(options.batch_size, n - i);
        std::vector<std::int64_t> idx(static_cast<std::size_t>(m));
        for (std::int64_t j = 0; j < m; ++j) idx[static_cast<std::size_t>(j)] = i + j;
        const auto gt = *split.labels.batch(idx).second;
        const auto pred = segmenter->predict(result.generated.narrow(0, i, m));
        confusion += confusion_matrix(pred, gt, palette.num_classes());
    }
    r.miou = miou_from_confusion(confusion);
    return result;
}

EvalOptions eval_options_for(const RunConfig& config) {
    EvalOptions o;
    o.batch_size = config.metrics.batch_size;
    o.kid_subset_size = config.metrics.kid_subset_size;
    o.kid_subsets = config.metrics.kid_subsets;
    o.patchwise_generation = config.train.patchwise_generation;
    o.grid_k_generation = config.train.grid_k_generation;
    return o;
}

std::vector<SplitSpec> standard_splits(const ResolvedData& data, std::uint64_t seed, std::int64_t max_samples) {
    std::vector<SplitSpec> out;
    if (data.real_reference)
        out.push_back(SplitSpec{"split1", *data.real_reference,
                                data.real_reference->as_kind(DatasetKind::UnpairedReal), seed, max_samples});
    out.push_back(SplitSpec{"split2", data.synthetic_test, data.real, seed, max_samples});
    return out;
}

void write_report(const EvalOutput& output, const std::filesystem::path& out_dir, int contact_sheet_count) {
    std::filesystem::create_directories(out_dir);
    const auto& name = output.report.split;
    {
        std::ofstream f(out_dir / (name + ".json"));
        f << output.report.to_json() << "\n";
    }
    {
        std::ofstream f(out_dir / (name + ".txt"));
        f << output.report.to_table();
    }
    const auto count = std::min<std::int64_t>(contact_sheet_count, output.generated.size(0));
    if (count > 0) {
        const int cols = static_cast<int>(std::min<std::int64_t>(4, count));
        write_rgb_png(out_dir / (name + "_contact_sheet.png"),
                      make_contact_sheet(output.generated.narrow(0, 0, count), cols));
    }
}

}  // namespace s2r
