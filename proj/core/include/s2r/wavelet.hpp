#pragma once

#include <torch/torch.h>

namespace s2r {

// Single-level orthonormal 2-D Haar transform.
//
// For every 2×2 block [[a, b], [c, d]] of every channel:
//   LL = (a + b + c + d) / 2
//   LH = (a - b + c - d) / 2   (horizontal difference)
//   HL = (a + b - c - d) / 2   (vertical difference)
//   HH = (a - b - c + d) / 2
// Output is B×4C×(H/2)×(W/2) with channel blocks ordered LL, LH, HL, HH.
torch::Tensor dwt2(const torch::Tensor& x);

// Exact inverse of dwt2.
torch::Tensor idwt2(const torch::Tensor& coeffs);

}  // namespace s2r
