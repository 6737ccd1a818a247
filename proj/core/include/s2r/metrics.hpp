#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace s2r {

// N×D embedding of an image set, tagged with the embedder that produced it.
struct FeatureSet {
    torch::Tensor features;  // float64 N×D
    std::string embedder_id;

    std::int64_t count() const { return features.size(0); }
    std::int64_t dim() const { return features.size(1); }
};

// Fréchet distance between Gaussian fits of two feature sets:
//   ||mu_a - mu_b||² + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
// The trace of the matrix square root is computed as Tr((A^{1/2} S_b A^{1/2})^{1/2})
// with A = S_a; negative eigenvalues from round-off are clamped to 0.
double fid(const FeatureSet& a, const FeatureSet& b);

// Unbiased MMD² with the cubic polynomial kernel k(x, y) = (x·y / D + 1)³.
double mmd2_unbiased(const torch::Tensor& x, const torch::Tensor& y);

struct KidResult {
    double mean = 0.0;
    double stddev = 0.0;
};

// Mean (and spread) of mmd2_unbiased over `n_subsets` random subsets of
// `subset_size` rows from each set, drawn without replacement from a seeded generator.
KidResult kid(const FeatureSet& a, const FeatureSet& b, std::int64_t subset_size, int n_subsets,
              std::uint64_t seed = 0);

// C×C confusion matrix (rows: ground truth, cols: prediction) accumulated over all pixels.
torch::Tensor confusion_matrix(const torch::Tensor& pred, const torch::Tensor& gt, int num_classes);

struct MiouResult {
    double miou = 0.0;
    std::vector<double> per_class_iou;  // NaN where the class never occurs in pred or gt
    std::vector<std::int64_t> support;  // ground-truth pixel count per class
    int classes_present = 0;
};

// IoU_c = TP / (TP + FP + FN) over the whole set; mean over classes with a non-empty union.
MiouResult miou(const torch::Tensor& pred, const torch::Tensor& gt, int num_classes);
MiouResult miou_from_confusion(const torch::Tensor& confusion);

}  // namespace s2r
