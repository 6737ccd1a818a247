#include "s2r/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "s2r/errors.hpp"
#include "s2r/layout.hpp"

namespace s2r {

namespace {

void check_pair(const FeatureSet& a, const FeatureSet& b) {
    if (a.embedder_id != b.embedder_id)
        throw ArgumentError("feature sets come from different embedders: '" + a.embedder_id + "' vs '" +
                            b.embedder_id + "'");
    require_shape(a.features.dim() == 2 && b.features.dim() == 2 && a.dim() == b.dim(),
                  "feature sets must be N×D with equal D");
}

torch::Tensor covariance(const torch::Tensor& x, const torch::Tensor& mu) {
    const auto c = x - mu;
    return c.t().mm(c) / static_cast<double>(x.size(0) - 1);
}

// Symmetric PSD square root via eigendecomposition with eigenvalue clamping.
torch::Tensor sqrtm_psd(const torch::Tensor& s) {
    const auto sym = 0.5 * (s + s.t());
    auto [evals, evecs] = torch::linalg_eigh(sym);
    return evecs.mm(torch::diag(evals.clamp_min(0.0).sqrt())).mm(evecs.t());
}

}  // namespace

double fid(const FeatureSet& a, const FeatureSet& b) {
    check_pair(a, b);
    if (a.count() < 2 || b.count() < 2) throw ArgumentError("fid needs at least 2 samples per set");
    const auto xa = a.features.to(torch::kFloat64);
    const auto xb = b.features.to(torch::kFloat64);
    const auto mu_a = xa.mean(0), mu_b = xb.mean(0);
    const auto sa = covariance(xa, mu_a), sb = covariance(xb, mu_b);
    const auto root_a = sqrtm_psd(sa);
    const auto inner = root_a.mm(sb).mm(root_a);
    const auto evals = torch::linalg_eigvalsh(0.5 * (inner + inner.t()));
    const double tr_sqrt = evals.clamp_min(0.0).sqrt().sum().item<double>();
    const double mean_term = (mu_a - mu_b).pow(2).sum().item<double>();
    return mean_term + sa.trace().item<double>() + sb.trace().item<double>() - 2.0 * tr_sqrt;
}

double mmd2_unbiased(const torch::Tensor& x, const torch::Tensor& y) {
    require_shape(x.dim() == 2 && y.dim() == 2 && x.size(1) == y.size(1), "mmd: expected N×D and M×D");
    const auto m = x.size(0), n = y.size(0);
    if (m < 2 || n < 2) throw ArgumentError("mmd needs at least 2 samples per set");
    const double d = static_cast<double>(x.size(1));
    auto kernel = [d](const torch::Tensor& p, const torch::Tensor& q) { return (p.mm(q.t()) / d + 1.0).pow(3); };
    const auto xd = x.to(torch::kFloat64), yd = y.to(torch::kFloat64);
    const auto kxx = kernel(xd, xd), kyy = kernel(yd, yd), kxy = kernel(xd, yd);
    const double sxx = (kxx.sum() - kxx.diagonal().sum()).item<double>() / static_cast<double>(m * (m - 1));
    const double syy = (kyy.sum() - kyy.diagonal().sum()).item<double>() / static_cast<double>(n * (n - 1));
    const double sxy = kxy.sum().item<double>() / static_cast<double>(m * n);
    return sxx + syy - 2.0 * sxy;
}

KidResult kid(const FeatureSet& a, const FeatureSet& b, std::int64_t subset_size, int n_subsets, std::uint64_t seed) {
    check_pair(a, b);
    if (subset_size < 2) throw ArgumentError("kid subset_size must be >= 2");
    if (subset_size > a.count() || subset_size > b.count())
        throw ArgumentError("kid subset_size " + std::to_string(subset_size) + " exceeds set size");
    if (n_subsets < 1) throw ArgumentError("kid needs at least one subset");
    std::mt19937_64 rng(seed);
    auto draw = [&](std::int64_t n) {
        std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(subset_size));
        return torch::tensor(idx, torch::kLong);
    };
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(n_subsets));
    for (int s = 0; s < n_subsets; ++s) {
        const auto ia = draw(a.count());
        const auto ib = draw(b.count());
        vals.push_back(mmd2_unbiased(a.features.index_select(0, ia), b.features.index_select(0, ib)));
    }
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
    return {mean, sd};
}

torch::Tensor confusion_matrix(const torch::Tensor& pred, const torch::Tensor& gt, int num_classes) {
    require_shape(pred.sizes() == gt.sizes(), "miou: prediction and ground truth shapes differ");
    check_id_range(pred, num_classes);
    check_id_range(gt, num_classes);
    const auto flat = gt.flatten().to(torch::kLong) * num_classes + pred.flatten().to(torch::kLong);
    return torch::bincount(flat, {}, static_cast<std::int64_t>(num_classes) * num_classes)
        .view({num_classes, num_classes});
}

MiouResult miou_from_confusion(const torch::Tensor& confusion) {
    require_shape(confusion.dim() == 2 && confusion.size(0) == confusion.size(1), "confusion matrix must be C×C");
    const auto cm = confusion.to(torch::kLong);
    const auto c = cm.size(0);
    MiouResult r;
    double sum = 0.0;
    for (std::int64_t k = 0; k < c; ++k) {
        const auto tp = cm[k][k].item<std::int64_t>();
        const auto fn = cm[k].sum().item<std::int64_t>() - tp;
        const auto fp = cm.select(1, k).sum().item<std::int64_t>() - tp;
        const auto uni = tp + fp + fn;
        r.support.push_back(tp + fn);
        if (uni == 0) {
            r.per_class_iou.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double iou = static_cast<double>(tp) / static_cast<double>(uni);
        r.per_class_iou.push_back(iou);
        sum += iou;
        ++r.classes_present;
    }
    r.miou = r.classes_present > 0 ? sum / r.classes_present : 0.0;
    return r;
}

MiouResult miou(const torch::Tensor& pred, const torch::Tensor& gt, int num_classes) {
    return miou_from_confusion(confusion_matrix(pred, gt, num_classes));
}

}  // namespace s2r
