#pragma once

#include <torch/torch.h>

namespace s2r {

// One-hot encoding of an integer class map.
//
// `ids` is H×W (or B×H×W) of any integer dtype with values in [0, num_classes).
// Returns a float tensor C×H×W (or B×C×H×W) with exactly one 1 per pixel.
// Throws OutOfRangeError naming the first offending pixel.
torch::Tensor one_hot_encode(const torch::Tensor& ids, int num_classes,
                             torch::Dtype dtype = torch::kFloat32);

// Inverse of one_hot_encode on the class axis (dim -3).
torch::Tensor argmax_ids(const torch::Tensor& onehot);

// Throws OutOfRangeError unless every id lies in [0, num_classes).
void check_id_range(const torch::Tensor& ids, int num_classes);

}  // namespace s2r
