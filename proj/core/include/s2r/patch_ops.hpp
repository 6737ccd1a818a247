#pragma once

#include <array>
#include <cstdint>

#include <torch/torch.h>

namespace s2r {

// Output of the patch operator: a k×k grid of equal, non-overlapping patches
// per source item, stacked along the batch axis.
//
// Layout of `data`: (B·k²)×C×(H/k)×(W/k). Patches of one source item are
// contiguous; within an item they are row-major, i.e. patch (i, j) of item b
// sits at index b·k² + i·k + j.
struct PatchStack {
    torch::Tensor data;
    int grid_k = 1;
    std::array<std::int64_t, 4> source_shape{};  // (B, C, H, W)
};

// Differentiable; grid_k = 1 returns the input unchanged.
PatchStack patchify(const torch::Tensor& x, int grid_k);

// Exact inverse of patchify. Throws ShapeError when data and metadata disagree.
torch::Tensor unpatchify(const PatchStack& ps);

}  // namespace s2r
